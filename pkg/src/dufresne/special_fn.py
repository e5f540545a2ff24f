"""Complex-capable special functions and quadrature rules.

Everything here is a pure function of its arguments. Complex values are plain
Python ``complex``; hypergeometric evaluation additionally accepts numpy arrays
for the argument so that tensor quadratures can evaluate a whole grid at once.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError, ParameterError, PoleError

__all__ = [
    "QuadratureRule",
    "as_complex",
    "conjugate_paired",
    "log_gamma",
    "gamma_ratio",
    "pochhammer",
    "pfq",
    "hyperu",
    "whittaker_w",
    "gauss_legendre",
]

# Godfrey's Lanczos coefficients, g = 607/128, n = 15.
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

SERIES_RTOL = 1e-15
SERIES_MAX_TERMS = 100_000
IMAG_RESIDUE_TOL = 1e-12


def as_complex(z) -> complex:
    """Coerce to ``complex`` and reject non-finite components."""
    w = complex(z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError(f"non-finite complex value {w!r}")
    return w


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def conjugate_paired(values: Iterable, tol: float = 1e-12) -> bool:
    """True when the multiset of ``values`` is closed under complex conjugation."""
    pending = [as_complex(v) for v in values]
    while pending:
        v = pending.pop()
        scale = tol * max(1.0, abs(v))
        if abs(v.imag) <= scale:
            continue
        for i, w in enumerate(pending):
            if abs(w - v.conjugate()) <= scale:
                del pending[i]
                break
        else:
            return False
    return True


def _lanczos_log_gamma(z: complex) -> complex:
    # valid for Re z >= 0.5
    w = z - 1.0
    series = _LANCZOS_C[0]
    for k in range(1, len(_LANCZOS_C)):
        series += _LANCZOS_C[k] / (w + k)
    t = w + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (w + 0.5) * cmath.log(t) - t + cmath.log(series)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    The branch cut runs along the negative real axis, matching
    ``scipy.special.loggamma``. For ``Re z < 0.5`` the argument is shifted
    right with the recurrence ``log G(z) = log G(z + n) - sum log(z + j)``,
    which keeps the result on the principal branch without any 2*pi*i
    bookkeeping.
    """
    z = as_complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log_gamma has a pole at {z.real:g}")
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    n = int(math.ceil(0.5 - z.real))
    shift = 0j
    for j in range(n):
        shift += cmath.log(z + j)
    return _lanczos_log_gamma(z + n) - shift


def gamma_ratio(num: Sequence, den: Sequence) -> complex:
    """prod Gamma(num) / prod Gamma(den), computed in log space."""
    acc = 0j
    for a in num:
        acc += log_gamma(a)
    for b in den:
        acc -= log_gamma(b)
    return cmath.exp(acc)


def pochhammer(z, n: int):
    """Rising factorial z (z+1) ... (z+n-1) as an exact product.

    The result keeps the arithmetic type of ``z``: integers and
    ``fractions.Fraction`` stay exact, complex stays complex.
    """
    if n < 0 or int(n) != n:
        raise DomainError("pochhammer order must be a non-negative integer")
    out = z - z + 1  # unit of the same type as z
    for j in range(int(n)):
        out = out * (z + j)
    return out


def pfq(num: Sequence, den: Sequence, z, *, rtol: float = SERIES_RTOL,
        max_terms: int = SERIES_MAX_TERMS):
    """Generalized hypergeometric series pFq(num; den; z) for real ``z``.

    ``z`` may be a scalar or a numpy array; the return value has the same
    shape. Complex parameters must come in conjugate pairs so that the sum is
    real; the imaginary residue is checked against 1e-12 and then discarded.

    Summation stops once three consecutive terms are below ``rtol`` times
    the running sum (guards against alternating false stops), or at the
    natural end of a terminating series.
    """
    a = [as_complex(v) for v in num]
    b = [as_complex(v) for v in den]
    for bj in b:
        if _is_nonpositive_integer(bj):
            raise ParameterError(f"denominator parameter {bj} is a pole")
    if not (conjugate_paired(a) and conjugate_paired(b)):
        raise ParameterError("complex parameters must occur in conjugate pairs")

    zz = np.asarray(z, dtype=float)
    scalar = zz.ndim == 0
    zz = np.atleast_1d(zz)
    if not np.all(np.isfinite(zz)):
        raise DomainError("pfq argument must be finite")

    n_stop = None
    for aj in a:
        if _is_nonpositive_integer(aj):
            m = int(-aj.real)
            n_stop = m if n_stop is None else min(n_stop, m)

    p, q = len(a), len(b)
    if n_stop is None:
        if p > q + 1 and np.any(zz != 0.0):
            raise DomainError(f"{p}F{q} series diverges for z != 0")
        if p == q + 1 and np.any(np.abs(zz) >= 1.0):
            raise DomainError(f"{p}F{q} series requires |z| < 1 (got max {np.abs(zz).max():g})")

    term = np.ones_like(zz, dtype=complex)
    total = np.ones_like(zz, dtype=complex)
    quiet = np.zeros(zz.shape, dtype=int)
    for n in range(max_terms):
        if n_stop is not None and n >= n_stop:
            break
        ratio = 1.0 + 0j
        for aj in a:
            ratio *= aj + n
        for bj in b:
            ratio /= bj + n
        ratio /= n + 1
        term = term * (ratio * zz)
        total = total + term
        if n_stop is None:
            small = np.abs(term) <= rtol * np.abs(total)
            quiet = np.where(small, quiet + 1, 0)
            if np.all(quiet >= 3):
                break
    else:
        raise ConvergenceError(f"pfq did not converge within {max_terms} terms")

    resid = np.abs(total.imag)
    if np.any(resid > IMAG_RESIDUE_TOL * np.maximum(1.0, np.abs(total.real))):
        raise ParameterError(
            f"pfq imaginary residue {resid.max():.3e} exceeds tolerance; "
            "parameters are not conjugate-symmetric enough"
        )
    out = total.real
    return float(out[0]) if scalar else out


def hyperu(a: float, b: float, x: float) -> float:
    """Tricomi U(a, b, x) from its Laplace-type integral (a > 0, x > 0).

    U(a, b, x) = 1/Gamma(a) * int_0^inf exp(-x t) t^(a-1) (1+t)^(b-a-1) dt.
    """
    if not a > 0.0:
        raise DomainError(f"hyperu integral representation needs a > 0, got {a}")
    if not x > 0.0:
        raise DomainError(f"hyperu needs x > 0, got {x}")
    c = b - a - 1.0

    def tail(t):
        return math.exp(-x * t) * (1.0 + t) ** c

    # t^(a-1) is folded into the QUADPACK algebraic weight on [0, 1]
    head, _ = integrate.quad(tail, 0.0, 1.0, weight="alg", wvar=(a - 1.0, 0.0),
                             epsabs=0.0, epsrel=1e-12, limit=200)
    rest, _ = integrate.quad(lambda t: t ** (a - 1.0) * tail(t), 1.0, math.inf,
                             epsabs=0.0, epsrel=1e-12, limit=200)
    return (head + rest) / math.gamma(a)


def whittaker_w(kappa: float, mu: float, x: float) -> float:
    """Whittaker W_{kappa,mu}(x) = exp(-x/2) x^(mu+1/2) U(mu-kappa+1/2, 1+2mu, x).

    Only the region where the U integral converges (mu - kappa + 1/2 > 0) is
    supported; that covers every parameter pair the u=1 stationary density
    produces.
    """
    a = mu - kappa + 0.5
    if not a > 0.0:
        raise DomainError(f"whittaker_w needs mu - kappa + 1/2 > 0, got {a}")
    if not x > 0.0:
        raise DomainError("whittaker_w needs x > 0")
    return math.exp(-0.5 * x) * x ** (mu + 0.5) * hyperu(a, 1.0 + 2.0 * mu, x)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on (-1, 1)."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def mapped(self, lo: float = 0.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely mapped to (lo, hi)."""
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights

    def integrate(self, f, lo: float = 0.0, hi: float = 1.0) -> float:
        x, w = self.mapped(lo, hi)
        return float(np.dot(w, f(x)))


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> QuadratureRule:
    """Gauss-Legendre nodes and weights by Newton iteration on P_n."""
    if int(order) != order or not 2 <= order <= 512:
        raise DomainError(f"quadrature order must be an integer in [2, 512], got {order}")
    n = int(order)
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for m in range(2, n + 1):
            p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    # one more pass so the derivative matches the converged nodes
    p0 = np.ones_like(x)
    p1 = x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order_idx = np.argsort(x)
    nodes, weights = x[order_idx], w[order_idx]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes=nodes, weights=weights, order=n)
