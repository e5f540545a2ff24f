"""Stationary law of X = A (X + B), A = prod Beta(alpha_j, 1), B ~ Gamma(u).

Closed forms exist for u = 1 (any number of beta factors) and for u = 2 with
two factors; everything else gets oracle moments plus a Taylor-series
Laplace transform and no law.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, UnsupportedError
from .laws import Law, laplace as law_laplace
from .param_solver import RootSet, ode_coefficients, solve_c, validity_diagnostic

__all__ = [
    "ChainSpec",
    "StationaryModel",
    "ODERecord",
    "rho_roots",
    "solve_stationary",
    "ode_spec",
    "phi_taylor",
]

DEFAULT_MOMENTS = 40
SERIALIZED_MOMENTS = 20


@dataclass(frozen=True)
class ChainSpec:
    alphas: tuple[float, ...]
    u: float

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "u", float(self.u))
        if not self.alphas:
            raise DomainError("need at least one alpha")
        if any(not (a > 0.0 and math.isfinite(a)) for a in self.alphas):
            raise DomainError(f"alphas must be positive and finite, got {self.alphas}")
        if not (self.u > 0.0 and math.isfinite(self.u)):
            raise DomainError(f"u must be positive, got {self.u}")

    @property
    def k(self) -> int:
        return len(self.alphas)

    @property
    def mean_log_a(self) -> float:
        """E[log A] = -sum 1/alpha_j, always negative (contraction on average)."""
        return -sum(1.0 / a for a in self.alphas)

    def a_moment(self, n: float) -> float:
        """E[A^n] = prod alpha_j / (alpha_j + n)."""
        out = 1.0
        for a in self.alphas:
            out *= a / (a + n)
        return out

    def to_dict(self) -> dict:
        return {"alphas": list(self.alphas), "u": self.u}

    @classmethod
    def from_dict(cls, obj: dict) -> "ChainSpec":
        return cls(tuple(obj["alphas"]), obj["u"])


def rho_roots(alpha: float, beta: float) -> tuple[float, float]:
    """(rho, rho_plus): roots of p^2 - p - alpha*beta, rho <= 0 < 1 <= rho_plus."""
    disc = math.sqrt(1.0 + 4.0 * alpha * beta)
    rho_plus = 0.5 * (1.0 + disc)
    # product of roots is -alpha*beta; avoids cancellation in (1 - disc)/2
    rho = -alpha * beta / rho_plus
    return rho, rho_plus


def phi_taylor(moments: Sequence[float], s):
    """Laplace transform from moments: sum (-s)^n m_n / n!.

    Returns ``(value, error_estimate)`` where the estimate is the magnitude of
    the last term kept. Warns when the terms are still growing at the end.
    """
    m = list(moments)
    if len(m) < 30:
        raise DomainError("phi_taylor needs at least 30 moments")
    ss = np.asarray(s, dtype=float)
    if np.any(np.abs(ss) > 0.5):
        raise DomainError("phi_taylor is only used for |s| <= 0.5")
    total = np.zeros_like(ss)
    term = np.ones_like(ss)
    prev = last = None
    for n, mn in enumerate(m):
        if n > 0:
            term = term * (-ss) / n
        prev, last = last, term * mn
        total = total + last
    err = np.abs(last)
    if np.any(np.abs(last) > np.abs(prev)):
        warnings.warn("phi_taylor terms are growing; truncation estimate unreliable", RuntimeWarning)
    if np.ndim(total) == 0:
        return float(total), float(err)
    return total, err


@dataclass
class StationaryModel:
    spec: ChainSpec
    law: Law | None
    moments: tuple[float, ...]
    rho: float | None = None
    roots: RootSet | None = None
    diagnostics: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def has_law(self) -> bool:
        return self.law is not None

    def laplace(self, s):
        """Phi(s) from the law when available, else from the oracle moments."""
        if self.law is not None:
            return law_laplace(self.law, s)
        value, _ = phi_taylor(self.moments, s)
        return value

    def to_dict(self) -> dict:
        out = {
            "spec": self.spec.to_dict(),
            "law": self.law.to_dict() if self.law is not None else None,
            "rho": self.rho,
            "moments": list(self.moments[1:SERIALIZED_MOMENTS + 1]),
        }
        if self.roots is not None:
            out["roots"] = [[z.real, z.imag] for z in self.roots.roots]
            out["root_method"] = self.roots.method
        if self.extras:
            out.update(self.extras)
        if self.diagnostics:
            out["diagnostics"] = [d.to_dict() for d in self.diagnostics]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "StationaryModel":
        """Rebuild from ``to_dict`` output; moments are recomputed by the oracle."""
        from .verifier import moment_oracle

        spec = ChainSpec.from_dict(obj["spec"])
        law = Law.from_dict(obj["law"]) if obj.get("law") else None
        return cls(spec=spec, law=law, moments=tuple(moment_oracle(spec, DEFAULT_MOMENTS)),
                   rho=obj.get("rho"))


def solve_stationary(spec: ChainSpec, *, n_moments: int = DEFAULT_MOMENTS,
                     diagnostics: bool = True) -> StationaryModel:
    """Stationary law for the chain, with oracle moments attached.

    u = 1: D(alphas; c) with c from ``solve_c`` (c = alpha + beta + 1 for two
    factors, Gamma(alpha) for one). u = 2 with two factors: D(alpha + rho,
    beta + rho; alpha + beta + 1) plus an independent Gamma(-rho) summand.
    Other cases return a model without a law.
    """
    from .verifier import check_moments, moment_oracle

    oracle = tuple(moment_oracle(spec, n_moments))
    law = None
    rho = None
    roots = None
    extras: dict = {}
    if spec.u == 1.0:
        if spec.k == 1:
            law = Law(spec.alphas, ())
        elif spec.k == 2:
            a, b = spec.alphas
            law = Law((a, b), (a + b + 1.0,))
        else:
            roots = solve_c(spec.alphas)
            law = Law(spec.alphas, roots.roots)
            extras["validity"] = validity_diagnostic(spec.alphas, roots)
    elif spec.u == 2.0 and spec.k == 2:
        a, b = spec.alphas
        rho, rho_plus = rho_roots(a, b)
        law = Law((a + rho, b + rho), (a + b + 1.0,), (-rho,))
        extras["rho_plus"] = rho_plus
        extras["samplable"] = law.is_samplable
        extras["proper"] = law.is_proper
    model = StationaryModel(spec=spec, law=law, moments=oracle, rho=rho, roots=roots, extras=extras)
    if diagnostics and law is not None:
        model.diagnostics.append(check_moments(law, spec, 20, 1e-9))
    return model


@dataclass(frozen=True)
class ODERecord:
    """sum_j coefficients[j](s) * Phi^(j)(s) = 0."""

    coefficients: tuple[Callable[[float], float], ...]
    label: str

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def terms(self, derivs: Sequence[float], s: float) -> list[float]:
        return [c(s) * d for c, d in zip(self.coefficients, derivs)]

    def residual(self, derivs: Sequence[float], s: float) -> float:
        """|sum of terms| relative to the largest term."""
        t = self.terms(derivs, s)
        scale = max(abs(x) for x in t)
        return abs(math.fsum(t)) / scale if scale > 0 else 0.0


def _shift_quotient(u: float) -> Callable[[float], float]:
    """s -> ((1+s)^u - 1)/s, equal to u at s = 0."""
    def g(s: float) -> float:
        if s == 0.0:
            return u
        return math.expm1(u * math.log1p(s)) / s
    return g


def ode_spec(spec: ChainSpec) -> ODERecord:
    """Linear ODE satisfied by the Laplace transform of the stationary law.

    (1+s)^u sum_{i>=1} T_{k-i} s^(i-1) Phi^(i) + e_k(alpha) ((1+s)^u - 1)/s Phi = 0,
    T from ``param_solver.ode_coefficients``. Provided for two factors with any
    u and for u in {1, 2} with any number of factors.
    """
    k, u = spec.k, spec.u
    if not (k <= 2 or u in (1.0, 2.0)):
        raise UnsupportedError(f"no ODE provided for u={u} with k={k} factors")
    T = ode_coefficients(spec.alphas)
    g = _shift_quotient(u)
    coeffs: list[Callable[[float], float]] = [lambda s, ek=T[k]: ek * g(s)]
    for i in range(1, k + 1):
        coeffs.append(lambda s, t=T[k - i], i=i: t * (1.0 + s) ** u * s ** (i - 1))
    return ODERecord(tuple(coeffs), f"k={k}, u={u:g}")
