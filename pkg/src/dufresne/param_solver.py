"""Denominator parameters of the stationary law for exponential jumps (u = 1).

With A a product of k independent Beta(alpha_j, 1) factors and B ~ Exp(1),
the Laplace transform of the stationary law satisfies

    (1 + s) * prod_j (theta + alpha_j) Phi = prod_j alpha_j * Phi,   theta = s d/ds,

which is the generalized hypergeometric equation of
kF(k-1)(alphas; c_1..c_{k-1}; -s) once the unknown c's are identified.
Expanding theta powers with Stirling numbers of the second kind gives the
ordinary-derivative coefficients; matching them against the canonical
operator theta * prod(theta + c_i - 1) is a triangular *linear* system in the
elementary symmetric functions e_r(c). The c's are then the roots of one
real polynomial, found in closed form up to degree 4 and by Aberth-Ehrlich
iteration beyond.

Integer and ``Fraction`` inputs stay exact through the coefficient stages.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, DomainError, SolverDisagreementError

__all__ = [
    "CoefficientTable",
    "ParameterPolynomial",
    "RootSet",
    "stirling2",
    "coefficient_table",
    "elementary_symmetric",
    "ode_coefficients",
    "symmetric_functions_of_c",
    "parameter_polynomial",
    "quadratic",
    "cardano",
    "cardano_tabulated",
    "ferrari",
    "ferrari_tabulated",
    "aberth",
    "descartes_sign_bound",
    "solve_c",
    "validity_diagnostic",
    "all_ones_table",
]

RESIDUAL_TOL = 1e-10
AGREEMENT_TOL = 1e-9
ABERTH_MAX_ITER = 200


# ---------------------------------------------------------------------------
# integer tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def stirling2(n: int, j: int) -> int:
    """Stirling number of the second kind S(n, j)."""
    if n < 0 or j < 0:
        raise DomainError("stirling2 needs non-negative arguments")
    if n == j:
        return 1
    if j == 0 or j > n:
        return 0
    return j * stirling2(n - 1, j) + stirling2(n - 1, j - 1)


@dataclass(frozen=True)
class CoefficientTable:
    """Triangular multiplier table: ``entries[n][j]`` multiplies s^j D^j in theta^n.

    Row ``j`` is the derivative order, column ``n`` the theta power; the
    diagonal and the j=1 row are all ones.
    """

    k: int
    entries: tuple

    def entry(self, j: int, n: int) -> int:
        if not 1 <= j <= n <= self.k:
            return 0
        return self.entries[n][j]

    def column(self, n: int) -> tuple[int, ...]:
        """Column ``n`` from the top (j = n) down to j = 1."""
        return tuple(self.entry(j, n) for j in range(n, 0, -1))


def coefficient_table(k: int) -> CoefficientTable:
    """Build the table with entry(j, n) = j * entry(j, n-1) + entry(j-1, n-1)."""
    if k < 1:
        raise DomainError("table order must be >= 1")
    rows: list[tuple[int, ...]] = [(1,)]
    for n in range(1, k + 1):
        prev = rows[-1]
        row = [0] * (n + 1)
        for j in range(1, n + 1):
            up = prev[j] if j < len(prev) else 0
            left = prev[j - 1] if j - 1 < len(prev) else 0
            row[j] = 1 if j == n else j * up + (left if j > 1 else 0)
        rows.append(tuple(row))
    return CoefficientTable(k=k, entries=tuple(rows))


def elementary_symmetric(values: Sequence) -> list:
    """[e_0, e_1, ..., e_n] of ``values`` via the product expansion of prod(1 + v x)."""
    e = [1]
    for v in values:
        nxt = e + [0]
        for r in range(1, len(nxt)):
            nxt[r] = nxt[r] + v * e[r - 1]
        e = nxt
    return e


# ---------------------------------------------------------------------------
# theta-operator algebra
# ---------------------------------------------------------------------------

def _theta_to_derivatives(theta_poly: Sequence) -> dict[int, object]:
    """Convert sum_n a_n theta^n into {j: coefficient of s^j D^j}."""
    out: dict[int, object] = {}
    for n, a in enumerate(theta_poly):
        if a == 0:
            continue
        if n == 0:
            out[0] = out.get(0, 0) + a
            continue
        for j in range(1, n + 1):
            out[j] = out.get(j, 0) + a * stirling2(n, j)
    return out


def _theta_times_shift_power(m: int) -> list[int]:
    """Coefficients (ascending powers of theta) of theta * (theta - 1)^m."""
    poly = [0] * (m + 2)
    for i in range(m + 1):
        poly[i + 1] = math.comb(m, i) * (-1) ** (m - i)
    return poly


def ode_coefficients(alphas: Sequence) -> list:
    """Coefficients T_0..T_k of the u = 1 stationary ODE.

    The equation reads
        sum_{r=0}^{k-1} T_r (1+s) s^(k-1-r) Phi^(k-r) + T_k Phi = 0
    with T_r = sum_{m<=r} S(k-m, k-r) e_m(alphas) and T_k = e_k(alphas).
    """
    k = len(alphas)
    if k < 1:
        raise DomainError("need at least one alpha")
    e = elementary_symmetric(alphas)
    coeffs = []
    for r in range(k):
        coeffs.append(sum(stirling2(k - m, k - r) * e[m] for m in range(r + 1)))
    coeffs.append(e[k])
    return coeffs


def symmetric_functions_of_c(alphas: Sequence) -> list:
    """e_1(c) .. e_{k-1}(c) by matching against theta * prod(theta + c_i - 1).

    Write prod(theta - 1 + c_i) = sum_r e_r(c) (theta - 1)^(k-1-r). The
    s^(k-r) D^(k-r) coefficient of theta (theta-1)^(k-1-r') vanishes for
    r' > r and is 1 for r' = r, so forward substitution recovers e_r(c)
    from the ODE coefficients T_r.
    """
    k = len(alphas)
    if k < 1:
        raise DomainError("need at least one alpha")
    T = ode_coefficients(alphas)
    basis = [_theta_to_derivatives(_theta_times_shift_power(k - 1 - r)) for r in range(k)]
    e_c = [1]
    for r in range(1, k):
        j = k - r
        acc = T[r]
        for rp in range(r):
            acc = acc - e_c[rp] * basis[rp].get(j, 0)
        e_c.append(acc)
    return e_c[1:]


# ---------------------------------------------------------------------------
# polynomials and root sets
# ---------------------------------------------------------------------------

def _horner(coeffs: Sequence, z):
    acc = coeffs[0] * (z - z + 1)
    for c in coeffs[1:]:
        acc = acc * z + c
    return acc


def _scaled_residual(coeffs: Sequence, z: complex) -> float:
    deg = len(coeffs) - 1
    return abs(_horner([complex(c) for c in coeffs], complex(z))) / (1.0 + abs(z) ** deg)


@dataclass(frozen=True)
class ParameterPolynomial:
    """Monic polynomial prod(xi - c_i), coefficients in descending powers."""

    coefficients: tuple
    symmetric_values: tuple
    alphas: tuple = ()

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        return _horner(self.coefficients, z)

    def derivative_coefficients(self) -> list:
        n = self.degree
        return [c * (n - i) for i, c in enumerate(self.coefficients[:-1])]


@dataclass(frozen=True)
class RootSet:
    roots: tuple[complex, ...]
    method: str
    residuals: tuple[float, ...]
    iterations: int = 0
    multiplicities: tuple[int, ...] = field(default=())

    def as_pairs(self) -> list[tuple[float, float]]:
        return [(z.real, z.imag) for z in self.roots]


def parameter_polynomial(alphas: Sequence) -> ParameterPolynomial:
    """Monic polynomial whose roots are the denominator parameters c_i."""
    k = len(alphas)
    if k < 1:
        raise DomainError("need at least one alpha")
    e_c = symmetric_functions_of_c(alphas)
    coeffs = [1] + [(-1) ** r * v for r, v in enumerate(e_c, start=1)]
    return ParameterPolynomial(tuple(coeffs), tuple(e_c), tuple(alphas))


def all_ones_table(rows: int) -> list[list[int]]:
    """Integer coefficient rows 0..rows for all-ones alphas (row n has degree n)."""
    return [list(parameter_polynomial([1] * (n + 1)).coefficients) for n in range(rows + 1)]


def _sort_key(z: complex):
    return (z.real, z.imag)


def _symmetrize(roots: Sequence[complex], tol: float = 1e-9) -> list[complex]:
    """Make conjugate pairs exact (real-coefficient input); near-real roots become real."""
    out: list[complex] = []
    upper: list[complex] = []
    lower: list[complex] = []
    for z in map(complex, roots):
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
        elif z.imag > 0.0:
            upper.append(z)
        else:
            lower.append(z)
    for z in upper:
        if not lower:
            out.append(z)
            continue
        i = min(range(len(lower)), key=lambda m: abs(lower[m] - z.conjugate()))
        w = lower.pop(i)
        re = 0.5 * (z.real + w.real)
        im = 0.5 * (z.imag - w.imag)
        out.extend([complex(re, im), complex(re, -im)])
    return out + lower


def _finish(coeffs: Sequence, roots: Sequence[complex], method: str,
            iterations: int = 0, tol: float = RESIDUAL_TOL, exact: Sequence | None = None) -> RootSet:
    roots = sorted(_symmetrize(roots), key=_sort_key)
    if exact is None:
        res = tuple(_scaled_residual(coeffs, z) for z in roots)
    else:
        deg = len(exact) - 1
        res = tuple(abs(_exact_eval(exact, z)[0]) / (1.0 + abs(z) ** deg) for z in roots)
    worst = max(res, default=0.0)
    if worst > tol:
        raise ConvergenceError(f"{method}: root residual {worst:.3e} exceeds {tol:.1e}")
    mult = []
    for z in roots:
        mult.append(sum(1 for w in roots if abs(w - z) <= 1e-6 * max(1.0, abs(z))))
    return RootSet(tuple(roots), method, res, iterations, tuple(mult))


def _normalized(coeffs: Sequence, degree: int) -> list[float]:
    if len(coeffs) != degree + 1:
        raise DomainError(f"expected {degree + 1} coefficients, got {len(coeffs)}")
    lead = float(coeffs[0])
    if lead == 0.0:
        raise DomainError("leading coefficient must be nonzero")
    return [float(c) / lead for c in coeffs]


def _polish(coeffs: Sequence, z):
    """One Newton step, kept only if it lowers the residual."""
    n = len(coeffs) - 1
    d = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    fz = _horner(coeffs, z)
    dz = _horner(d, z)
    if dz == 0:
        return z
    w = z - fz / dz
    return w if abs(_horner(coeffs, w)) < abs(fz) else z


def _exact_eval(coeffs: Sequence[Fraction], z: complex) -> tuple[complex, complex]:
    """P(z) and P'(z) computed exactly in rationals at the float point z, then rounded."""
    zr, zi = Fraction(z.real), Fraction(z.imag)
    pr, pi_ = Fraction(0), Fraction(0)
    dr, di = Fraction(0), Fraction(0)
    for c in coeffs:
        # P' <- P' z + P ; P <- P z + c
        dr, di = dr * zr - di * zi + pr, dr * zi + di * zr + pi_
        pr, pi_ = pr * zr - pi_ * zi + c, pr * zi + pi_ * zr
    return complex(float(pr), float(pi_)), complex(float(dr), float(di))


def _exact_refine(coeffs: Sequence[Fraction], roots: Sequence[complex],
                  max_iter: int = 100) -> tuple[list[complex], int]:
    """Aberth iterations with P and P' evaluated exactly at the float iterates.

    Float coefficients lose the relative accuracy of tightly clustered roots
    (all-equal small alphas put k - 1 roots on a circle of radius alpha), and
    plain float iteration then settles on the roots of the rounded
    polynomial. Exact evaluation removes that loss; the simultaneous
    correction keeps iterates from collapsing onto one root.
    """
    zs = [complex(z) for z in roots]
    for it in range(1, max_iter + 1):
        biggest = 0.0
        new = []
        for i, z in enumerate(zs):
            p, d = _exact_eval(coeffs, z)
            if p == 0:
                new.append(z)
                continue
            ratio = p / d if d != 0 else complex(1e-3 * max(1.0, abs(z)))
            repel = sum(1.0 / (z - w) for j, w in enumerate(zs) if j != i and z != w)
            step = ratio / (1.0 - ratio * repel)
            biggest = max(biggest, abs(step) / max(1.0, abs(z)))
            new.append(z - step)
        zs = new
        if biggest <= 4e-16:
            return zs, it
    return zs, max_iter


def quadratic(coeffs: Sequence) -> RootSet:
    a, b, c = _normalized(coeffs, 2)
    disc = b * b - 4.0 * c
    if disc >= 0.0:
        s = math.sqrt(disc)
        # cancellation-free pair
        q = -0.5 * (b + math.copysign(s, b)) if b != 0.0 else 0.5 * s
        if q == 0.0:
            roots = [0.0, 0.0]
        else:
            roots = [q, c / q]
    else:
        im = 0.5 * math.sqrt(-disc)
        roots = [complex(-0.5 * b, im), complex(-0.5 * b, -im)]
    return _finish([a, b, c], roots, "quadratic")


def _real_cubic_roots(p: float, q: float) -> list:
    """Roots of y^3 + p y + q with exact conjugate symmetry."""
    disc = 0.25 * q * q + p ** 3 / 27.0
    if p == 0.0 and q == 0.0:
        return [0.0, 0.0, 0.0]
    if disc >= 0.0:
        # disc == 0 also covers p^3 underflow with p > 0
        sd = math.sqrt(disc)
        u = math.copysign(abs(-0.5 * q + sd) ** (1.0 / 3.0), -0.5 * q + sd)
        v = math.copysign(abs(-0.5 * q - sd) ** (1.0 / 3.0), -0.5 * q - sd)
        re = -0.5 * (u + v)
        im = 0.5 * math.sqrt(3.0) * (u - v)
        return [u + v, complex(re, im), complex(re, -im)]
    # three real roots (trigonometric form of the same j^k combination)
    r = math.sqrt(-p / 3.0)
    arg = max(-1.0, min(1.0, -0.5 * q / r ** 3))
    phi = math.acos(arg)
    return [2.0 * r * math.cos((phi - 2.0 * math.pi * m) / 3.0) for m in range(3)]


def cardano(coeffs: Sequence) -> RootSet:
    """All three roots of a real cubic by Cardano's formula."""
    a, b, c, d = _normalized(coeffs, 3)
    shift = -b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    roots = [y + shift for y in _real_cubic_roots(p, q)]
    cf = [a, b, c, d]
    roots = [_polish(cf, z) for z in roots]
    return _finish(cf, roots, "cardano")


def _cardano_radicals(p: float, q: float) -> tuple[complex, complex]:
    """cbrt(-q/2 + sqrt(D)) and cbrt(-q/2 - sqrt(D)), D = q^2/4 + p^3/27.

    Real radicands take the real cube root; otherwise the second radical is
    tied to the first by R+ R- = -p/3, the pairing the formula presumes.
    """
    disc = q * q / 4.0 + p ** 3 / 27.0
    if disc >= 0.0:
        sd = math.sqrt(disc)
        return complex(np.cbrt(-q / 2.0 + sd)), complex(np.cbrt(-q / 2.0 - sd))
    up = cmath.exp(cmath.log(complex(-q / 2.0, math.sqrt(-disc))) / 3.0)
    return up, -p / (3.0 * up)


def cardano_tabulated(A: float, B: float, C: float) -> RootSet:
    """Closed form for xi^3 - A xi^2 + (B - A) xi - C exactly as tabulated.

    xi_k = A/3 + j^k R+ + j^|k-3| R-, R+- = cbrt(-q/2 +- sqrt(q^2/4 + p^3/27)),
    with the radical pairing of ``_cardano_radicals``. No residual gate is
    applied: the caller reports the residuals.
    """
    p = B - A - A * A / 3.0
    q = -2.0 * A ** 3 / 27.0 - C + A * (B - A) / 3.0
    up, vm = _cardano_radicals(p, q)
    j = cmath.exp(2j * math.pi / 3.0)
    roots = [A / 3.0 + j ** k * up + j ** abs(k - 3) * vm for k in range(3)]
    coeffs = [1.0, -A, B - A, -C]
    res = tuple(_scaled_residual(coeffs, z) for z in roots)
    return RootSet(tuple(roots), "cardano_tabulated", res)


def ferrari(coeffs: Sequence) -> RootSet:
    """All four roots of a real quartic via the resolvent cubic.

    The depressed quartic y^4 + p y^2 + q y + r is written as
    (y^2 + z)^2 - [(2z - p) y^2 - q y + z^2 - r]; the bracket is a perfect
    square when z solves z^3 - (p/2) z^2 - r z + (4 p r - q^2)/8 = 0. The
    largest real root is used, which guarantees 2z - p >= 0.
    """
    a4, a3, a2, a1, a0 = _normalized(coeffs, 4)
    shift = -a3 / 4.0
    p = a2 - 3.0 * a3 * a3 / 8.0
    q = a3 ** 3 / 8.0 - a3 * a2 / 2.0 + a1
    r = -3.0 * a3 ** 4 / 256.0 + a3 * a3 * a2 / 16.0 - a3 * a1 / 4.0 + a0

    def quad_pair(bb: float, cc: float) -> list:
        disc = bb * bb - 4.0 * cc
        if disc >= 0.0:
            s = math.sqrt(disc)
            big = -0.5 * (bb + math.copysign(s, bb))
            return [big, cc / big] if big != 0.0 else [0.0, 0.0]
        im = 0.5 * math.sqrt(-disc)
        return [complex(-0.5 * bb, im), complex(-0.5 * bb, -im)]

    if abs(q) <= 1e-14 * max(1.0, abs(p), abs(r)):
        # biquadratic: y^2 = w with w from a quadratic
        ys = []
        for w in quad_pair(p, r):
            sw = cmath.sqrt(w)
            if isinstance(w, float) and w >= 0.0:
                ys.extend([sw.real, -sw.real])
            else:
                ys.extend([sw, -sw])
        roots = ys
    else:
        res_cubic = cardano([1.0, -0.5 * p, -r, (4.0 * p * r - q * q) / 8.0])
        real_roots = [z.real for z in res_cubic.roots if z.imag == 0.0]
        z0 = max(real_roots)
        w = math.sqrt(max(2.0 * z0 - p, 0.0))
        # (y^2 - w y + c1)(y^2 + w y + c2): c1 + c2 = p + w^2, c1 c2 = r and
        # w (c1 - c2) = q. Taking c1, c2 from the first two avoids q / w,
        # which is unstable when 2 z0 - p cancels.
        c_pair = quad_pair(-(p + w * w), r)
        if isinstance(c_pair[0], complex):
            c1, c2 = z0 + q / (2.0 * w), z0 - q / (2.0 * w)
        else:
            hi, lo = max(c_pair), min(c_pair)
            c1, c2 = (hi, lo) if q > 0 else (lo, hi)
        roots = quad_pair(-w, c1) + quad_pair(w, c2)
    cf = [a4, a3, a2, a1, a0]
    roots = [_polish(cf, y + shift) for y in roots]
    return _finish(cf, roots, "ferrari")


def ferrari_tabulated(A: float, B: float, C: float, D: float) -> RootSet:
    """Tabulated closed form for xi^4 - A xi^3 + (B-3A) xi^2 - (C-B+2A) xi + D.

    Reproduces the tabulated p, q, r, resolvent and root expression literally
    (real resolvent root chosen as the largest real one); no residual gate.
    """
    p = B - 3.0 * A - 3.0 * A * A / 8.0
    q = A ** 3 / 8.0 + A * (B - 3.0 * A) / 2.0 + C - B + 2.0 * A
    r = -3.0 * A ** 4 / 256.0 + (B - 3.0 * A) * A * A / 16.0 + (C - B + 2.0 * A) * A / 4.0 + D
    p1 = -r - p * p / 12.0
    q1 = -p ** 3 / 108.0 + (4.0 * r * p - q * q) / 8.0 - p * r / 6.0
    up, vm = _cardano_radicals(p1, q1)
    j = cmath.exp(2j * math.pi / 3.0)
    zetas = [p / 6.0 + j ** k * up + j ** abs(k - 3) * vm for k in range(3)]
    real = [z.real for z in zetas if abs(z.imag) <= 1e-9 * max(1.0, abs(z))]
    zr = max(real) if real else zetas[0].real
    roots = []
    for k in range(4):
        inner = zr / 2.0 - p / 4.0 + (-1) ** (k // 2) * cmath.sqrt(zr * zr - r)
        roots.append(A / 4.0 + 0.5 * cmath.sqrt(2.0 * zr - p) + (-1) ** k * cmath.sqrt(inner))
    coeffs = [1.0, -A, B - 3.0 * A, -(C - B + 2.0 * A), D]
    res = tuple(_scaled_residual(coeffs, z) for z in roots)
    return RootSet(tuple(roots), "ferrari_tabulated", res)


def _default_initial(poly: ParameterPolynomial) -> list[complex]:
    n = poly.degree
    if poly.alphas:
        abar = float(np.mean([float(a) for a in poly.alphas]))
    else:
        abar = 1.0
    centre = abar + 1.0
    # root 1 sits at angle pi on this circle; the others are spread after it
    out = []
    for m in range(1, n + 1):
        ang = math.pi + 2.0 * math.pi * m / (n + 1) + 1e-3 * (m + 1)
        out.append(complex(centre + abar * math.cos(ang), abar * math.sin(ang)))
    return out


def _sequential_initial(poly: ParameterPolynomial) -> list[complex]:
    alphas = sorted(float(a) for a in poly.alphas) if poly.alphas else [1.0] * (poly.degree + 1)
    guesses = [alphas[0]]
    for i in range(1, poly.degree):
        guesses.append(max(guesses[-1], alphas[min(i, len(alphas) - 1)]))
    out = []
    for i, g in enumerate(guesses):
        out.append(complex(g + 0.05 * i, 0.1 * (i + 1) * (-1) ** i))
    return out


def aberth(poly: ParameterPolynomial, initial: Sequence[complex] | None = None,
           *, max_iter: int = ABERTH_MAX_ITER, tol: float = RESIDUAL_TOL) -> RootSet:
    """Aberth-Ehrlich simultaneous iteration.

    Without ``initial`` the guesses sit on the circle of radius mean(alpha)
    centred at mean(alpha) + 1 (slightly rotated to break symmetry); if that
    start fails, the sorted-alpha sequential start is tried before giving up.
    """
    coeffs = [complex(float(c)) for c in poly.coefficients]
    n = poly.degree
    if n < 1:
        raise DomainError("aberth needs degree >= 1")
    if n == 1:
        return _finish(poly.coefficients, [-coeffs[1] / coeffs[0]], "aberth")
    starts = [list(initial)] if initial is not None else [_default_initial(poly), _sequential_initial(poly)]
    dcoeffs = [c * (n - i) for i, c in enumerate(coeffs[:-1])]
    abs_coeffs = [abs(c) for c in coeffs]
    last_err = None
    for z0 in starts:
        z = np.array(z0, dtype=complex)
        if len(z) != n:
            raise DomainError(f"need {n} initial guesses, got {len(z)}")
        if len(set(np.round(z, 14))) != n:
            raise DomainError("initial guesses must be pairwise distinct")
        it = 0
        for it in range(1, max_iter + 1):
            f = np.polyval(coeffs, z)
            df = np.polyval(dcoeffs, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            ratio = np.where(df != 0, f / np.where(df != 0, df, 1.0), f)
            delta = ratio / (1.0 - ratio * inv.sum(axis=1))
            z = z - delta
            bound = np.polyval(abs_coeffs, np.abs(z))
            if np.all(np.abs(delta) <= 4e-16 * np.maximum(1.0, np.abs(z))) or \
                    np.all(np.abs(np.polyval(coeffs, z)) <= 8e-16 * bound):
                break
        try:
            return _finish(poly.coefficients, list(z), "aberth", it, tol)
        except ConvergenceError as exc:
            last_err = exc
    raise ConvergenceError(f"aberth did not converge in {max_iter} iterations: {last_err}")


def descartes_sign_bound(poly) -> int:
    """Sign alternations in the coefficient sequence (zeros skipped)."""
    coeffs = poly.coefficients if isinstance(poly, ParameterPolynomial) else poly
    signs = [c > 0 for c in coeffs if c != 0]
    return sum(1 for x, y in zip(signs, signs[1:]) if x != y)


def _match_distance(a: Sequence[complex], b: Sequence[complex]) -> float:
    if len(a) != len(b):
        return math.inf
    if len(a) <= 7:
        return min(max(abs(x - y) / max(1.0, abs(x)) for x, y in zip(a, perm))
                   for perm in permutations(b))
    return max(min(abs(x - y) / max(1.0, abs(x)) for y in b) for x in a)


def solve_c(alphas: Sequence) -> RootSet:
    """Denominator parameters c_1..c_{k-1}, sorted by (real, imag).

    Degrees 2-4 use the closed forms and are cross-checked against Aberth
    iteration; higher degrees use Aberth alone. Either way the roots are then
    refined by Aberth steps with an exactly evaluated residual.
    """
    if len(alphas) < 3:
        raise DomainError("solve_c needs k >= 3 alphas")
    if any(not float(a) > 0.0 for a in alphas):
        raise DomainError("alphas must be positive")
    poly = parameter_polynomial(alphas)
    coeffs = [float(c) for c in poly.coefficients]
    exact = parameter_polynomial([a if isinstance(a, (int, Fraction)) else Fraction(float(a))
                                  for a in alphas]).coefficients
    it = aberth(poly)
    it_roots, it_extra = _exact_refine(exact, it.roots)
    closed = {2: quadratic, 3: cardano, 4: ferrari}.get(poly.degree)
    if closed is None:
        return _finish(coeffs, it_roots, it.method, it.iterations + it_extra, exact=exact)
    cf = closed(coeffs)
    cf_roots, cf_extra = _exact_refine(exact, cf.roots)
    gap = _match_distance(cf_roots, it_roots)
    if gap > AGREEMENT_TOL:
        raise SolverDisagreementError(
            f"{cf.method} and aberth disagree by {gap:.3e} for alphas={list(alphas)}")
    return _finish(coeffs, cf_roots, cf.method, cf_extra, exact=exact)


def validity_diagnostic(alphas: Sequence, roots: RootSet | Sequence[complex]) -> dict:
    """Report-only comparison of solved parameters against the sorted alphas.

    Each real root and each complex-pair real part / modulus is compared to
    the largest alpha and to the alphas excluding the maximum. Nothing here is
    asserted anywhere.
    """
    zs = roots.roots if isinstance(roots, RootSet) else list(roots)
    srt = sorted(float(a) for a in alphas)
    amax = srt[-1]
    rest = srt[:-1]
    entries = []
    for z in zs:
        z = complex(z)
        if z.imag == 0.0:
            entries.append({"root": [z.real, 0.0], "kind": "real",
                            "exceeds_max_alpha": z.real > amax,
                            "exceeds_other_alphas": all(z.real > a for a in rest)})
        elif z.imag > 0.0:
            entries.append({"root": [z.real, z.imag], "kind": "pair",
                            "real_exceeds_max_alpha": z.real > amax,
                            "modulus_exceeds_max_alpha": abs(z) > amax,
                            "real_exceeds_other_alphas": all(z.real > a for a in rest),
                            "modulus_exceeds_other_alphas": all(abs(z) > a for a in rest)})
    return {"sorted_alphas": srt, "roots": entries}
