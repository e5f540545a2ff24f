import io
import json

import pytest

from dufresne import cli
from dufresne.cli import format_number, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


# ---------------------------------------------------------------- formatting

@pytest.mark.parametrize("x,text", [(3.0, "3"), (3.0 + 5e-13, "3"), (-2.0, "-2"), (0.1, "0.10000000000000001"),
                                    (1 / 3, "0.33333333333333331"), (None, ""),
                                    (4e-13, "0"), (2e-12, "2e-12"), (0.0, "0")])
def test_format_number(x, text):
    assert format_number(x) == text


def test_format_number_round_trips():
    for x in (0.1, 2.0 / 7, 1e-11, 123456.789):
        assert float(format_number(x)) == x


# ---------------------------------------------------------------- usage errors

@pytest.mark.parametrize("argv", [
    [],
    ["solve"],
    ["solve", "--alphas", "1,-1"],
    ["solve", "--alphas", "1,x"],
    ["solve", "--alphas", "1,nan"],
    ["verify", "--alphas", "1,1", "--checks", "bogus"],
    ["simulate", "--alphas", "1,1", "--replicas", "0"],
    ["table", "--rows", "41"],
    ["verify"],
    ["nope"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = call(capsys, *argv)
    assert code == 2


def test_verify_model_and_alphas_conflict(capsys, tmp_path):
    path = tmp_path / "m.json"
    code, out, _ = call(capsys, "solve", "--alphas", "1,1", "--out", str(path))
    assert code == 0 and out == ""
    code, _, err = call(capsys, "verify", "--model", str(path), "--alphas", "1,1")
    assert code == 2 and "either" in err


def test_unreadable_model_is_usage_error(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("{not json"))
    code, _, _ = call(capsys, "verify", "--model", "-")
    assert code == 2


# ---------------------------------------------------------------- table and roots

def test_table_row_ten(capsys):
    code, out, _ = call(capsys, "table", "--rows", "10")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "n," + ",".join(f"c{j}" for j in range(11))
    assert lines[11] == "10,1,-21,199,-1121,4159,-10625,18943,-23297,18943,-9217,2047"
    assert lines[1] == "0,1" + "," * 10


def test_table_json(capsys):
    code, out, _ = call(capsys, "table", "--rows", "3", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and rows[3]["coefficients"] == [1, -7, 17, -15]


def test_roots_csv_equal_alphas(capsys):
    code, out, _ = call(capsys, "roots", "--alphas", "2,2,2,2")
    assert code == 0
    assert out.splitlines() == [
        "re,im,center_re,center_im,radius",
        "5,0,3,0,2",
        "3,2,3,0,2",
        "3,-2,3,0,2",
    ]


def test_roots_csv_unequal_has_no_circle(capsys):
    code, out, _ = call(capsys, "roots", "--alphas", "1,2,3")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 3
    assert all(line.endswith(",,,") for line in lines[1:])


def test_roots_small_k(capsys):
    code, out, _ = call(capsys, "roots", "--alphas", "1,2", "--format", "json")
    assert code == 0 and json.loads(out)["roots"] == [[4.0, 0.0]]
    code, out, _ = call(capsys, "roots", "--alphas", "1")
    assert code == 0 and out.splitlines() == ["re,im,center_re,center_im,radius"]


# ---------------------------------------------------------------- solve and verify

def test_solve_all_ones(capsys):
    code, out, _ = call(capsys, "solve", "--alphas", "1,1,1,1")
    doc = json.loads(out)
    assert code == 0
    roots = [complex(*z) for z in doc["roots"]]
    for want in (3, 2 + 1j, 2 - 1j):
        assert min(abs(z - want) for z in roots) < 1e-10
    assert doc["moments"][:2] == pytest.approx([1 / 15, 2 / 75], rel=1e-12)
    assert doc["diagnostics"][0]["check_name"] == "moments" and doc["diagnostics"][0]["status"] == "pass"


def test_solve_csv(capsys):
    code, out, _ = call(capsys, "solve", "--alphas", "1,1", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "n,moment"
    assert lines[1] == "1,0.33333333333333331" and len(lines) == 21


def test_solve_u2_unsolved_case_still_succeeds(capsys):
    code, out, _ = call(capsys, "solve", "--alphas", "1,1,1", "--u", "2")
    doc = json.loads(out)
    assert code == 0 and doc["law"] is None and len(doc["moments"]) == 20


def test_round_trip_solve_then_verify(capsys, monkeypatch):
    code, out, _ = call(capsys, "solve", "--alphas", "0.7,1.9,3.1")
    assert code == 0
    solved = json.loads(out)
    diag = solved["diagnostics"][0]

    monkeypatch.setattr("sys.stdin", io.StringIO(out))
    code, out, _ = call(capsys, "verify", "--model", "-", "--checks", "moments")
    assert code == 0
    from_model = json_lines(out)[0]

    code, out, _ = call(capsys, "verify", "--alphas", "0.7,1.9,3.1", "--checks", "moments")
    direct = json_lines(out)[0]
    assert from_model == direct
    assert from_model["residual"] == diag["residual"] and from_model["status"] == diag["status"]


def test_verify_reports_not_applicable(capsys):
    code, out, _ = call(capsys, "verify", "--alphas", "1,1,1,1,1", "--checks", "functional,identities,density")
    reports = json_lines(out)
    assert code == 0
    assert [r["status"] for r in reports] == ["report_only"] * 3
    assert all(r["notes"].startswith("not applicable") for r in reports)


def test_verify_u2_identities_and_ode(capsys):
    code, out, _ = call(capsys, "verify", "--alphas", "1,1", "--u", "2",
                        "--checks", "moments,functional,ode,identities", "--s-grid", "0.1,0.25,0.5")
    reports = json_lines(out)
    assert code == 0
    names = [r["check_name"] for r in reports]
    assert names[:3] == ["moments", "functional_eq", "ode_residual"]
    assert names.count("eq_59") == 15 and names.count("eq_510") == 3
    assert all(r["status"] == "pass" for r in reports)


def test_verify_failing_tolerance_exits_1(capsys):
    code, out, _ = call(capsys, "verify", "--alphas", "1,1", "--checks", "functional", "--tol", "1e-30")
    assert code == 1 and json_lines(out)[0]["status"] == "fail"


def test_verify_csv(capsys):
    code, out, _ = call(capsys, "verify", "--alphas", "1,1", "--checks", "moments", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "check,status,residual,tolerance" and lines[1].startswith("moments,pass,")
    # residuals are not snapped to integers
    assert lines[1].split(",")[3] == "1.0000000000000001e-09"


# ---------------------------------------------------------------- simulation

def test_simulate_json_passes(capsys):
    code, out, _ = call(capsys, "simulate", "--alphas", "1,1", "--steps", "60", "--replicas", "20000",
                        "--seed", "4")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True
    assert doc["sample_count"] == 20000 and doc["ks_statistic"] < doc["ks_critical"]


def test_shotnoise_conventions(capsys):
    argv = ["shotnoise", "--lambda", "1", "--decays", "1,2", "--cycles", "500", "--replicas", "40", "--seed", "2"]
    code, out, _ = call(capsys, *argv)
    doc = json.loads(out)
    assert code == 0 and doc["convention"] == "derived" and doc["reference_spec"]["alphas"] == [1.0, 0.5]
    code, out, _ = call(capsys, *argv, "--paper-convention")
    doc = json.loads(out)
    assert code == 1 and doc["passed"] is False and doc["reference_spec"]["alphas"] == [1.0, 2.0]


@pytest.mark.parametrize("argv", [
    ["simulate", "--alphas", "1,1,1", "--steps", "30", "--replicas", "10000", "--seed", "9"],
    ["shotnoise", "--lambda", "1", "--decays", "1,2", "--cycles", "200", "--replicas", "30", "--seed", "9"],
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_determinism_across_workers(capsys, argv, fmt):
    outputs = set()
    for workers in ("1", "4", "1", "3"):
        code, out, _ = call(capsys, *argv, "--format", fmt, "--workers", workers)
        assert code == 0
        outputs.add(out)
    assert len(outputs) == 1


def test_seed_changes_output(capsys):
    base = ["simulate", "--alphas", "1,1", "--steps", "10", "--replicas", "2000", "--format", "csv"]
    _, a, _ = call(capsys, *base, "--seed", "1")
    _, b, _ = call(capsys, *base, "--seed", "2")
    assert a != b


def test_identities_command(capsys):
    code, out, _ = call(capsys, "identities")
    reports = json_lines(out)
    assert code == 0
    assert sum(r["check_name"] == "eq_59" for r in reports) == 15 * len(cli.FACTORIZATION_PAIRS)
    assert {r["status"] for r in reports} <= {"pass", "report_only"}
