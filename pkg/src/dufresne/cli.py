"""Command-line entry point.

Exit codes: 0 success, 1 a check failed (or a computation error), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from .errors import DufresneError
from .param_solver import all_ones_table, solve_c
from .shotnoise_sim import ShotNoiseConfig, compare, simulate_chain, simulate_triggered
from .stationary import ChainSpec, StationaryModel, solve_stationary
from .verifier import (
    FAIL,
    VerificationReport,
    check_binomial_identity,
    check_density_eq38,
    check_eq_59,
    check_eq_510,
    check_functional_eq,
    check_moments,
    check_ode,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKS = ("moments", "functional", "identities", "density", "ode")
DEFAULT_S_GRID = (0.1, 0.25, 0.5)
Z_LIMIT = 5.0

# built-in grid for the identities command
FACTORIZATION_PAIRS = ((1.0, 1.0), (2.0, 1.5), (0.7, 1.2), (3.0, 2.5))
INTEGRAL_POINTS = ((1.0, 1.0, 0.5), (2.0, 3.0, 0.2), (0.8, 1.7, 0.6))
BINOMIAL_CASES = ((1, 5, 2), (2, 6, 3), ("1/2", 4, 1))
DENSITY_PAIRS = ((1.0, 1.0), (1.0, 2.0), (2.5, 0.8))


class UsageError(Exception):
    pass


def _real_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")
    if any(not math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError("values must be finite")
    return vals


def _positive_list(text: str) -> tuple[float, ...]:
    vals = _real_list(text)
    if any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"values must be positive, got {text!r}")
    return vals


def _positive_real(text: str) -> float:
    v = _real_list(text)
    if len(v) != 1 or v[0] <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive real, got {text!r}")
    return v[0]


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _check_list(text: str) -> tuple[str, ...]:
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [n for n in names if n not in CHECKS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown checks {bad}; choose from {','.join(CHECKS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dufresne", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json"):
        p.add_argument("--format", choices=("json", "csv"), default=fmt)
        p.add_argument("--out", default="-", help="output path (default: standard output)")

    p = sub.add_parser("solve", help="stationary law for a chain")
    p.add_argument("--alphas", type=_positive_list, required=True)
    p.add_argument("--u", type=_positive_real, default=1.0)
    p.add_argument("--tol", type=_positive_real, default=1e-9)
    common(p)

    p = sub.add_parser("verify", help="run checks on a chain or a saved model")
    p.add_argument("--alphas", type=_positive_list)
    p.add_argument("--u", type=_positive_real, default=1.0)
    p.add_argument("--model", help="solve JSON output to verify ('-' for standard input)")
    p.add_argument("--checks", type=_check_list, default=("moments", "functional"))
    p.add_argument("--s-grid", type=_positive_list, default=DEFAULT_S_GRID)
    p.add_argument("--tol", type=_positive_real)
    common(p)

    p = sub.add_parser("simulate", help="Monte Carlo of the affine chain")
    p.add_argument("--alphas", type=_positive_list, required=True)
    p.add_argument("--u", type=_positive_real, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=200)
    p.add_argument("--replicas", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)

    p = sub.add_parser("shotnoise", help="triggered shot noise sampled at cycle ends")
    p.add_argument("--lambda", dest="lam", type=_positive_real, required=True)
    p.add_argument("--decays", type=_positive_list, required=True)
    p.add_argument("--u", type=_positive_real, default=1.0)
    p.add_argument("--cycles", type=_positive_int, default=1250)
    p.add_argument("--replicas", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--paper-convention", action="store_true",
                   help="use alpha_j = p_j/lambda instead of lambda/p_j")
    common(p)

    p = sub.add_parser("roots", help="parameter roots c for u = 1")
    p.add_argument("--alphas", type=_positive_list, required=True)
    common(p, fmt="csv")

    p = sub.add_parser("table", help="integer coefficient table for all-ones alphas")
    p.add_argument("--rows", type=int, default=10)
    common(p, fmt="csv")

    p = sub.add_parser("identities", help="gamma-convolution, binomial and density identities")
    common(p)
    return parser


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------

def format_number(x) -> str:
    """Integer text when integral within 1e-12, else 17 significant digits."""
    if x is None:
        return ""
    x = float(x)
    r = round(x)
    if abs(x - r) <= 1e-12:
        return str(int(r))
    return format(x, ".17g")


def _full(x) -> str:
    """17 significant digits with no integer snapping, for residuals."""
    return format(float(x), ".17g")


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else format_number(c) for c in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=float) + "\n"


def _json_lines(reports: Sequence[VerificationReport]) -> str:
    return "".join(r.to_json() + "\n" for r in reports)


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_solve(args) -> tuple[str, bool]:
    model = solve_stationary(ChainSpec(args.alphas, args.u), diagnostics=False)
    if model.law is not None:
        model.diagnostics.append(check_moments(model.law, model.spec, 20, args.tol))
    ok = all(d.status != FAIL for d in model.diagnostics)
    doc = model.to_dict()
    if args.format == "csv":
        return _csv(["n", "moment"], [(n, m) for n, m in enumerate(doc["moments"], 1)]), ok
    return _json(doc), ok


def _load_model(path: str) -> StationaryModel:
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        return StationaryModel.from_dict(json.loads(text))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"could not read model: {exc}")


def _model_checks(model: StationaryModel, checks: Sequence[str], s_grid, tol) -> list[VerificationReport]:
    spec = model.spec
    reports: list[VerificationReport] = []

    def not_applicable(name, why):
        reports.append(VerificationReport(name, {"spec": spec.to_dict()}, float("nan"), 0.0,
                                          "report_only", f"not applicable: {why}"))

    for name in checks:
        if name == "moments":
            if model.law is None:
                not_applicable("moments", "no closed-form law")
            else:
                reports.append(check_moments(model.law, spec, 20, tol or 1e-9))
        elif name == "functional":
            if spec.k > 4:
                not_applicable("functional_eq", "quadrature limited to k <= 4")
            else:
                grid = s_grid if model.law is not None else [s for s in s_grid if s <= 0.5]
                reports.append(check_functional_eq(spec, model, grid, tol=tol))
        elif name == "ode":
            if model.law is None:
                not_applicable("ode_residual", "no closed-form law")
            else:
                reports.append(check_ode(model, tol=tol or 1e-5))
        elif name == "identities":
            if spec.k == 2 and spec.u == 2.0:
                a, b = spec.alphas
                reports.extend(check_eq_59(a, b, n) for n in range(1, 16))
                reports.extend(check_eq_510(a, b, s) for s in s_grid if s <= 0.8)
            else:
                not_applicable("identities", "defined for two factors with u = 2")
        elif name == "density":
            if spec.k == 2 and spec.u == 1.0 and max(spec.alphas) < 10:
                reports.append(check_density_eq38(*spec.alphas))
            else:
                not_applicable("density_eq38", "defined for two factors with u = 1")
    return reports


def _cmd_verify(args) -> tuple[str, bool]:
    if args.model is not None:
        if args.alphas is not None:
            raise UsageError("give either --model or --alphas, not both")
        model = _load_model(args.model)
    elif args.alphas is not None:
        model = solve_stationary(ChainSpec(args.alphas, args.u), diagnostics=False)
    else:
        raise UsageError("verify needs --alphas or --model")
    reports = _model_checks(model, args.checks, args.s_grid, args.tol)
    ok = all(r.status != FAIL for r in reports)
    if args.format == "csv":
        rows = [(r.check_name, r.status, _full(r.residual), _full(r.tolerance)) for r in reports]
        return _csv(["check", "status", "residual", "tolerance"], rows), ok
    return _json_lines(reports), ok


def _sim_document(samples, model: StationaryModel, seed: int, *, n_blocks: int = 100,
                  ks: bool = True, z_orders: int = 4) -> tuple[dict, bool]:
    """SimReport against the model's law, or against oracle moments when there is none."""
    report = compare(samples, model.law, seed=seed, n_blocks=n_blocks, ks=ks)
    doc = report.to_dict()
    if model.law is None:
        ref = list(model.moments[1:5])
        doc["reference_moments"] = ref
        doc["z_scores"] = [(m - r) / se for (_, m, se), r in zip(report.empirical_moments, ref)]
    ok = bool(max(abs(z) for z in doc["z_scores"][:z_orders]) <= Z_LIMIT)
    if report.ks_statistic is not None:
        ok = ok and bool(report.ks_passed)
    doc["z_limit"] = Z_LIMIT
    doc["passed"] = ok
    return doc, ok


def _cmd_simulate(args) -> tuple[str, bool]:
    spec = ChainSpec(args.alphas, args.u)
    samples = simulate_chain(spec, args.steps, args.replicas, args.seed, workers=args.workers)
    if args.format == "csv":
        return _csv(["x"], [(repr(float(x)),) for x in samples]), True
    model = solve_stationary(spec, diagnostics=False)
    doc, ok = _sim_document(samples, model, args.seed)
    doc["seeds"]["chain"] = args.seed
    doc = {"spec": spec.to_dict(), "steps": args.steps, "replicas": args.replicas, **doc}
    return _json(doc), ok


def _cmd_shotnoise(args) -> tuple[str, bool]:
    config = ShotNoiseConfig(args.lam, args.decays, args.u, args.cycles, args.seed,
                             replicas=args.replicas, paper_convention=args.paper_convention)
    samples = simulate_triggered(config, workers=args.workers)
    if args.format == "csv":
        return _csv(["x"], [(repr(float(x)),) for x in samples]), True
    # the convention flag only changes the analytic mapping compared against
    model = solve_stationary(config.chain_spec(), diagnostics=False)
    # one jackknife block per path keeps serial correlation inside blocks
    doc, ok = _sim_document(samples, model, args.seed, n_blocks=max(args.replicas, 20),
                            ks=False, z_orders=3)
    doc.update(convention="flipped" if args.paper_convention else "derived",
               reference_spec=config.chain_spec().to_dict())
    doc["seeds"]["triggered"] = args.seed
    return _json(doc), ok


def _cmd_roots(args) -> tuple[str, bool]:
    alphas = args.alphas
    k = len(alphas)
    if k >= 3:
        rs = solve_c(alphas)
        roots, method = sorted(rs.roots, key=lambda z: (-round(z.real, 9), -z.imag)), rs.method
    elif k == 2:
        roots, method = [complex(alphas[0] + alphas[1] + 1.0)], "closed_form"
    else:
        roots, method = [], "none"
    equal = max(alphas) - min(alphas) <= 1e-12 * max(alphas)
    center = (alphas[0] + 1.0) if equal else None
    radius = alphas[0] if equal else None
    if args.format == "csv":
        rows = [(z.real, z.imag, center, 0.0 if equal else None, radius) for z in roots]
        return _csv(["re", "im", "center_re", "center_im", "radius"], rows), True
    doc = {
        "alphas": list(alphas),
        "method": method,
        "roots": [[z.real, z.imag] for z in roots],
        "circle": {"center": [center, 0.0], "radius": radius} if equal else None,
    }
    return _json(doc), True


def _cmd_table(args) -> tuple[str, bool]:
    if not 0 <= args.rows <= 40:
        raise UsageError("--rows must lie in [0, 40]")
    table = all_ones_table(args.rows)
    if args.format == "csv":
        header = ["n"] + [f"c{j}" for j in range(args.rows + 1)]
        rows = [[str(n)] + [str(c) for c in row] + [""] * (args.rows - len(row) + 1)
                for n, row in enumerate(table)]
        return _csv(header, rows), True
    return _json({"rows": [{"n": n, "coefficients": row} for n, row in enumerate(table)]}), True


def identity_reports() -> list[VerificationReport]:
    reports = []
    for a, b in FACTORIZATION_PAIRS:
        reports.extend(check_eq_59(a, b, n) for n in range(1, 16))
    reports.extend(check_eq_510(*p) for p in INTEGRAL_POINTS)
    reports.extend(check_binomial_identity(*c) for c in BINOMIAL_CASES)
    reports.extend(check_density_eq38(*p) for p in DENSITY_PAIRS)
    return reports


def _cmd_identities(args) -> tuple[str, bool]:
    reports = identity_reports()
    ok = all(r.status != FAIL for r in reports)
    if args.format == "csv":
        rows = [(r.check_name, json.dumps(r.inputs, sort_keys=True), r.status, _full(r.residual), _full(r.tolerance))
                for r in reports]
        return _csv(["check", "inputs", "status", "residual", "tolerance"], rows), ok
    return _json_lines(reports), ok


COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "simulate": _cmd_simulate,
    "shotnoise": _cmd_shotnoise,
    "roots": _cmd_roots,
    "table": _cmd_table,
    "identities": _cmd_identities,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        text, ok = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dufresne {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DufresneError, OverflowError) as exc:
        print(f"dufresne {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
