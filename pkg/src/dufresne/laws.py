"""Dufresne laws D(a; b) and their additive convolutions with gamma laws.

A law is described by its Mellin transform

    E[X^s] = prod_j Gamma(a_j + s)/Gamma(a_j) / prod_i Gamma(b_i + s)/Gamma(b_i),

optionally plus independent Gamma(u) summands. Parameters may be complex in
conjugate pairs; such laws only support moments and Laplace transforms.
Laws with real parameters that can be paired as Beta(a, c - a) factors are
*samplable* and also get a density.

Random streams are numpy ``Generator(PCG64)`` objects keyed by
``SeedSequence(seed, spawn_key=key)``, so a stream is reproducible from
(master seed, key) alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import (
    DomainError,
    InvalidPairingError,
    NotSamplableError,
    ParameterError,
    UnsupportedError,
)
from .special_fn import as_complex, conjugate_paired, gamma_ratio, pfq, pochhammer, whittaker_w

__all__ = [
    "Law",
    "SamplerPlan",
    "random_stream",
    "mellin",
    "moment",
    "laplace",
    "density",
    "whittaker_density",
    "sampler_plan",
    "sample",
]

IMAG_TOL = 1e-10
MAX_MOMENT_ORDER = 60


def random_stream(seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 stream derived from (seed, key...)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def _real_part(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise ParameterError(f"{what} has imaginary residue {z.imag:.3e}")
    return z.real


@dataclass(frozen=True)
class Law:
    """D(num; den) convolved with independent Gamma(shape) summands."""

    num: tuple[complex, ...]
    den: tuple[complex, ...] = ()
    gamma: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(as_complex(a) for a in self.num))
        object.__setattr__(self, "den", tuple(as_complex(b) for b in self.den))
        object.__setattr__(self, "gamma", tuple(float(u) for u in self.gamma))
        if not (conjugate_paired(self.num) and conjugate_paired(self.den)):
            raise ParameterError("complex parameters must occur in conjugate pairs")
        if any(not u > 0.0 for u in self.gamma):
            raise ParameterError("additive gamma shapes must be positive")

    @property
    def is_real(self) -> bool:
        return all(z.imag == 0.0 for z in self.num + self.den)

    @property
    def is_proper(self) -> bool:
        """All numerator real parts positive (the law-on-(0, inf) conditions)."""
        return all(a.real > 0.0 for a in self.num)

    @property
    def is_samplable(self) -> bool:
        try:
            sampler_plan(self)
        except NotSamplableError:
            return False
        return True

    @property
    def additive_shape(self) -> float:
        # independent gamma summands merge into one
        return float(sum(self.gamma))

    def to_dict(self) -> dict:
        return {
            "num": [[z.real, z.imag] for z in self.num],
            "den": [[z.real, z.imag] for z in self.den],
            "gamma": list(self.gamma),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "Law":
        def parse(items):
            out = []
            for it in items:
                if isinstance(it, (list, tuple)):
                    out.append(complex(float(it[0]), float(it[1]) if len(it) > 1 else 0.0))
                else:
                    out.append(complex(float(it)))
            return out

        return cls(tuple(parse(obj.get("num", []))), tuple(parse(obj.get("den", []))),
                   tuple(float(u) for u in obj.get("gamma", [])))

    @classmethod
    def from_json(cls, text: str) -> "Law":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# moments and transforms
# ---------------------------------------------------------------------------

def _dufresne_mellin(law: Law, s: float) -> float:
    for a in law.num:
        if (a + s).real <= 0.0:
            raise DomainError(f"Re(a + s) must be positive, got {a + s}")
    val = gamma_ratio([a + s for a in law.num] + list(law.den),
                      list(law.num) + [b + s for b in law.den])
    return _real_part(val, "Mellin transform")


def mellin(law: Law, s: float) -> float:
    """E[X^s] through gamma-function ratios.

    With additive gamma parts only integer ``s`` is available: the binomial
    expansion of E[(Y + G)^s] uses the gamma-ratio Mellin values of Y and G.
    """
    s = float(s)
    if not law.gamma:
        return _dufresne_mellin(law, s)
    if s < 0 or s != math.floor(s):
        raise UnsupportedError("Mellin transform of a gamma convolution is only available at integer orders")
    n = int(s)
    v = law.additive_shape
    total = 0.0
    for j in range(n + 1):
        gpart = math.exp(math.lgamma(v + n - j) - math.lgamma(v))
        total += math.comb(n, j) * _dufresne_mellin(law, float(j)) * gpart
    return total


def _dufresne_moment(law: Law, n: int) -> float:
    val = 1.0 + 0j
    for a in law.num:
        val *= pochhammer(a, n)
    for b in law.den:
        pb = pochhammer(b, n)
        if pb == 0:
            raise ParameterError(f"denominator parameter {b} hits zero at order {n}")
        val /= pb
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise OverflowError(f"moment of order {n} overflows double range")
    return _real_part(val, "moment")


def moment(law: Law, n: int) -> float:
    """E[X^n] from exact Pochhammer products (binomial convolution for gamma parts)."""
    if n < 0 or int(n) != n:
        raise DomainError("moment order must be a non-negative integer")
    n = int(n)
    if n > MAX_MOMENT_ORDER:
        raise DomainError(f"moment order above {MAX_MOMENT_ORDER} is not supported")
    if not law.gamma:
        return _dufresne_moment(law, n)
    v = law.additive_shape
    total = 0.0
    for j in range(n + 1):
        total += math.comb(n, j) * _dufresne_moment(law, j) * pochhammer(v, n - j)
    if not math.isfinite(total):
        raise OverflowError(f"moment of order {n} overflows double range")
    return total


def moments(law: Law, count: int) -> list[float]:
    """[m_0, ..., m_count]."""
    return [moment(law, n) for n in range(count + 1)]


def laplace(law: Law, s):
    """E[exp(-s X)] = (1+s)^(-sum gamma) * pFq(num; den; -s).

    Accepts scalar or array ``s``. The hypergeometric factor is summed as a
    power series, so non-terminating cases need |s| < 1; a lone gamma factor
    D(c; -) uses its closed form and accepts any s > -1.
    """
    ss = np.asarray(s, dtype=float)
    if np.any(ss <= -1.0):
        raise DomainError("Laplace transform needs s > -1")
    out = (1.0 + ss) ** (-law.additive_shape)
    if len(law.num) == 1 and not law.den and law.num[0].imag == 0.0:
        out = out * (1.0 + ss) ** (-law.num[0].real)
    elif law.num or law.den:
        out = out * pfq(law.num, law.den, -ss)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# sampling plans and densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplerPlan:
    """X = prod Beta(a, b) * prod Gamma(g) + Gamma(sum additive)."""

    beta_factors: tuple[tuple[float, float], ...] = ()
    gamma_factors: tuple[float, ...] = ()
    additive_gamma: tuple[float, ...] = field(default=())

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        x = np.ones(count)
        for a, b in self.beta_factors:
            x *= rng.beta(a, b, count)
        for g in self.gamma_factors:
            x *= rng.standard_gamma(g, count)
        if self.additive_gamma:
            x += rng.standard_gamma(float(sum(self.additive_gamma)), count)
        return x

    def mellin_integer(self, n: int) -> float:
        """E[X^n] implied by the plan (used to cross-check the pairing)."""
        prod = 1.0
        for a, b in self.beta_factors:
            prod *= pochhammer(a, n) / pochhammer(a + b, n)
        for g in self.gamma_factors:
            prod *= pochhammer(g, n)
        if not self.additive_gamma:
            return prod
        v = float(sum(self.additive_gamma))
        total = 0.0
        for j in range(n + 1):
            pj = 1.0
            for a, b in self.beta_factors:
                pj *= pochhammer(a, j) / pochhammer(a + b, j)
            for g in self.gamma_factors:
                pj *= pochhammer(g, j)
            total += math.comb(n, j) * pj * pochhammer(v, n - j)
        return total


def sampler_plan(law: Law) -> SamplerPlan:
    """Pair every denominator c with a numerator a < c as Beta(a, c - a).

    Unpaired numerators become Gamma factors. Among valid pairings the one
    maximizing min(c - a) is chosen; c == a pairs cancel.
    """
    if not law.is_real:
        raise NotSamplableError("complex-parameter laws are moment/Laplace-only")
    num = [z.real for z in law.num]
    den = [z.real for z in law.den]
    if any(a <= 0.0 for a in num):
        raise InvalidPairingError("numerator parameters must be positive to sample")
    if len(den) > len(num):
        raise InvalidPairingError("more denominator than numerator parameters")
    best, best_gap = None, -math.inf
    for chosen in permutations(range(len(num)), len(den)):
        gaps = [den[i] - num[j] for i, j in enumerate(chosen)]
        if any(g < 0.0 for g in gaps):
            continue
        gap = min(gaps) if gaps else math.inf
        if gap > best_gap:
            best, best_gap = chosen, gap
    if best is None:
        raise InvalidPairingError(f"no pairing with c - a >= 0 for num={num}, den={den}")
    betas = tuple((num[j], den[i] - num[j]) for i, j in enumerate(best) if den[i] > num[j])
    used = set(best)
    gammas = tuple(num[j] for j in range(len(num)) if j not in used)
    return SamplerPlan(betas, gammas, tuple(law.gamma))


def sample(law: Law, stream: np.random.Generator, count: int) -> np.ndarray:
    """i.i.d. draws (numpy's gamma sampler is exact rejection-based)."""
    if count < 1:
        raise DomainError("count must be positive")
    return sampler_plan(law).draw(stream, int(count))


def _log_beta_norm(a: float, b: float) -> float:
    return -special.betaln(a, b)


def _gamma_pdf(g: float, y: float) -> float:
    if y <= 0.0:
        return 0.0
    return math.exp((g - 1.0) * math.log(y) - y - math.lgamma(g))


def _fold_beta(inner, a: float, b: float, x: float) -> float:
    """Density of Beta(a, b) * Y at x, given the density ``inner`` of Y."""
    norm = math.exp(_log_beta_norm(a, b))
    if x <= 0.0:
        return 0.0
    val, _ = integrate.quad(lambda t: inner(x / t) / t if t > 0.0 else 0.0, 0.0, 1.0, weight="alg",
                            wvar=(a - 1.0, b - 1.0), epsabs=0.0, epsrel=1e-12, limit=200)
    return norm * val


def _fold_gamma(inner, g: float, x: float) -> float:
    if x <= 0.0:
        return 0.0

    def f(t):
        return _gamma_pdf(g, t) * inner(x / t) / t if t > 0.0 else 0.0
    lo, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-11, limit=200)
    hi, _ = integrate.quad(f, 1.0, math.inf, epsabs=0.0, epsrel=1e-11, limit=200)
    return lo + hi


def _product_density(plan: SamplerPlan):
    betas = list(plan.beta_factors)
    gammas = list(plan.gamma_factors)
    if gammas:
        g0 = gammas.pop(0)

        def base(y, g0=g0):
            return _gamma_pdf(g0, y)
    elif betas:
        a0, b0 = betas.pop(0)

        def base(y, a0=a0, b0=b0):
            if not 0.0 < y < 1.0:
                return 0.0
            return math.exp((a0 - 1.0) * math.log(y) + (b0 - 1.0) * math.log1p(-y) + _log_beta_norm(a0, b0))
    else:
        raise UnsupportedError("degenerate law (point mass at 1) has no density")
    f = base
    for g in gammas:
        f = (lambda inner, g: (lambda y: _fold_gamma(inner, g, y)))(f, g)
    for a, b in betas:
        f = (lambda inner, a, b: (lambda y: _fold_beta(inner, a, b, y)))(f, a, b)
    return f


def density(law: Law, x: float) -> float:
    """Density at ``x`` by adaptive quadrature over the sampler representation.

    For D(a, b; c) written as Beta(a, c - a) * Gamma(b) this is
    int_0^1 f_Beta(t) f_Gamma(x/t) / t dt; additive gamma parts are folded in
    by a convolution integral.
    """
    if not law.is_real:
        raise UnsupportedError("densities of complex-parameter laws are not provided")
    x = float(x)
    if x <= 0.0:
        return 0.0
    plan = sampler_plan(law)
    prod = _product_density(SamplerPlan(plan.beta_factors, plan.gamma_factors))
    if not plan.additive_gamma:
        return prod(x)
    v = float(sum(plan.additive_gamma))
    # (x - y)^(v - 1) goes into the QUADPACK weight
    val, _ = integrate.quad(lambda y: prod(y) * math.exp(-(x - y)), 0.0, x, weight="alg",
                            wvar=(0.0, v - 1.0), epsabs=0.0, epsrel=1e-8, limit=200)
    return val / math.gamma(v)


def whittaker_density(alpha: float, beta: float, x: float) -> float:
    """Closed-form density of D(alpha, beta; alpha + beta + 1) through Whittaker W.

    Gamma(a+b+1)/(Gamma(a)Gamma(b)) e^(-x/2) x^((a+b-3)/2) W_{-(1+a+b)/2, (b-a)/2}(x).
    """
    if x <= 0.0:
        return 0.0
    logc = math.lgamma(alpha + beta + 1.0) - math.lgamma(alpha) - math.lgamma(beta)
    w = whittaker_w(-(1.0 + alpha + beta) / 2.0, (beta - alpha) / 2.0, x)
    return math.exp(logc - 0.5 * x + 0.5 * (alpha + beta - 3.0) * math.log(x)) * w
