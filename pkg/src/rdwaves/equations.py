"""Registry of reaction-diffusion right-hand sides f(u) for u_t - u_xx = f(u).

One EquationSpec variant per family: the Fisher equation, the generic KPP
class, cubic polynomial reactions, the power-law equation and its extension
with four tunable coupling terms, the square-root-coupled family behind the
solitary waves, the perturbed and generalized Fisher equations, and pure
quadratic decay.  Everything is immutable and numpy-vectorized; fractional
powers of non-positive bases are rejected (scalar path) or mapped to nan
(array path) rather than returning complex values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "EquationError",
    "EquationSpec",
    "Fisher",
    "KPPGeneric",
    "CubicPolynomial",
    "PowerLaw",
    "GeneralFamily",
    "SigmaFamily",
    "PerturbedFisher",
    "GeneralizedFisher",
    "QuadraticDecay",
    "DerivedConstants",
    "derived_constants",
    "rhs_eval",
    "kpp_check",
    "KPPReport",
    "build_eq47",
    "Eq47Build",
    "spec_to_json",
    "spec_from_json",
]

_INT_TOL = 1e-12

# set by rhs_eval so scalar evaluation can name the offending term
_RAISE_CONTEXT: list[str] = []


class EquationError(ValueError):
    """Invalid parameters or out-of-domain evaluation for an EquationSpec."""


def _frac_pow(u, p: float, term: str):
    """u**p with integer fast path; fractional power of u < 0 yields nan."""
    if abs(p - round(p)) < _INT_TOL:
        ip = int(round(p))
        with np.errstate(divide="ignore"):
            return np.power(u, ip) if ip >= 0 else 1.0 / np.power(u, -ip)
    if _RAISE_CONTEXT and np.ndim(u) == 0:
        if u < 0.0 or (u == 0.0 and p < 0):
            raise EquationError(
                f"term {term} undefined at u={float(u)}: fractional power of a non-positive base"
            )
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.power(np.maximum(u, 0.0), p)
        if p < 0:
            return np.where(u > 0.0, val, np.nan)
        return np.where(u >= 0.0, val, np.nan)


@dataclass(frozen=True)
class DerivedConstants:
    """k = 2/(n-1) and lambda = 2(n+1)/(n-1)^2 for the power-law families."""

    k: float
    lam: float


def derived_constants(n: float) -> DerivedConstants:
    if n == 1:
        raise EquationError("n = 1 is excluded: k = 2/(n-1) undefined")
    return DerivedConstants(k=2.0 / (n - 1.0), lam=2.0 * (n + 1.0) / (n - 1.0) ** 2)


@dataclass(frozen=True)
class EquationSpec:
    """Base type; subclasses define rhs(u) with the u_t - u_xx = f(u) sign."""

    @property
    def variant(self) -> str:
        return type(self).__name__

    def rhs(self, u):  # pragma: no cover - abstract
        raise NotImplementedError

    def params(self) -> dict:
        out = {}
        for name in getattr(self, "__dataclass_fields__", {}):
            val = getattr(self, name)
            if callable(val):
                continue
            out[name] = val
        return out

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{self.variant}({ps})"


@dataclass(frozen=True)
class Fisher(EquationSpec):
    """f(u) = u(1 - u)."""

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        return u * (1.0 - u)


@dataclass(frozen=True)
class KPPGeneric(EquationSpec):
    """f supplied by the caller; serialization is not supported."""

    f: Callable = field(compare=False)
    label: str = "custom"

    def rhs(self, u):
        return np.asarray(self.f(np.asarray(u, dtype=float)), dtype=float)


@dataclass(frozen=True)
class CubicPolynomial(EquationSpec):
    """f(u) = alpha (u^3 + b u^2 + c u), alpha = +-1."""

    alpha: int
    b: float
    c: float

    def __post_init__(self):
        if self.alpha not in (-1, 1):
            raise EquationError("alpha must be +1 or -1")

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        return self.alpha * (u**3 + self.b * u**2 + self.c * u)


@dataclass(frozen=True)
class PowerLaw(EquationSpec):
    """f(u) = -lambda u^n with lambda = 2(n+1)/(n-1)^2."""

    n: float

    def __post_init__(self):
        derived_constants(self.n)

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        return -derived_constants(self.n).lam * _frac_pow(u, self.n, "u^n")


@dataclass(frozen=True)
class GeneralFamily(EquationSpec):
    """f(u) = k(-(k+1)u^n + l1 u + l2 u^((n+1)/2) + l3 u^((3-n)/2) + l4 u^(2-n)).

    halfpower_sign flips the two half-integer-power couplings; it records the
    branch actually solved when the underlying logarithmic-derivative base is
    negative (possible with integer k only).
    """

    n: float
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0
    lambda4: float = 0.0
    halfpower_sign: int = 1

    def __post_init__(self):
        derived_constants(self.n)
        if self.halfpower_sign not in (-1, 1):
            raise EquationError("halfpower_sign must be +1 or -1")

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        n = self.n
        k = derived_constants(n).k
        s = float(self.halfpower_sign)
        total = self.lambda1 * u
        if k + 1.0 != 0.0:  # skip 0 * u^n, which would poison u = 0 for n < 0
            total = total - (k + 1.0) * _frac_pow(u, n, "u^n")
        if self.lambda2 != 0.0:
            total = total + self.lambda2 * s * _frac_pow(u, (n + 1.0) / 2.0, "u^((n+1)/2)")
        if self.lambda3 != 0.0:
            total = total + self.lambda3 * s * _frac_pow(u, (3.0 - n) / 2.0, "u^((3-n)/2)")
        if self.lambda4 != 0.0:
            total = total + self.lambda4 * _frac_pow(u, 2.0 - n, "u^(2-n)")
        return k * total


@dataclass(frozen=True)
class SigmaFamily(EquationSpec):
    """f(u) = (1 + nu u^(1-n)) (-(n+1)u^n + nu(n-3)u + sigma u^((n+1)/2))."""

    n: float
    nu: float
    sigma: float

    def __post_init__(self):
        derived_constants(self.n)

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        n = self.n
        factor = 1.0 + self.nu * _frac_pow(u, 1.0 - n, "u^(1-n)")
        inner = (
            -(n + 1.0) * _frac_pow(u, n, "u^n")
            + self.nu * (n - 3.0) * u
            + self.sigma * _frac_pow(u, (n + 1.0) / 2.0, "u^((n+1)/2)")
        )
        return factor * inner


@dataclass(frozen=True)
class PerturbedFisher(EquationSpec):
    """f(u) = u(u - 1 + eps sqrt(3/2 - u)), defined for u <= 3/2.

    The square-root coupling makes the equation branch-sensitive: the bell
    profile solves it on the half-plane where the wave's internal sign agrees
    with the principal root (see the catalog's domain notes).
    """

    epsilon: float

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(invalid="ignore"):
            root = np.sqrt(np.where(u <= 1.5, 1.5 - u, np.nan))
        return u * (u - 1.0 + self.epsilon * root)


@dataclass(frozen=True)
class GeneralizedFisher(EquationSpec):
    """f(u) = u(-c1 + (c1+1) sqrt(u) - u); reduces to Fisher at c1 = -1."""

    c1: float
    halfpower_sign: int = 1

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        total = -self.c1 - u
        if self.c1 + 1.0 != 0.0:
            total = total + (self.c1 + 1.0) * self.halfpower_sign * _frac_pow(u, 0.5, "sqrt(u)")
        return u * total


@dataclass(frozen=True)
class QuadraticDecay(EquationSpec):
    """f(u) = -u^2."""

    def rhs(self, u):
        u = np.asarray(u, dtype=float)
        return -u * u


def rhs_eval(spec: EquationSpec, u: float) -> float:
    """Scalar f(u); raises EquationError on fractional powers of u <= 0."""
    _RAISE_CONTEXT.append(spec.variant)
    try:
        val = float(spec.rhs(float(u)))
    finally:
        _RAISE_CONTEXT.pop()
    if math.isnan(val) and not math.isnan(u):
        raise EquationError(f"{spec.describe()} undefined at u={u}")
    return val


@dataclass(frozen=True)
class KPPReport:
    """Numerical check of f(0) = 0, f(1) = 0, f'(0) = alpha > 0, f'(u) < alpha."""

    f0: float
    f1: float
    fprime0: float
    f0_zero: bool
    f1_zero: bool
    fprime0_positive: bool
    interior_bound_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.f0_zero and self.f1_zero and self.fprime0_positive and self.interior_bound_ok


def kpp_check(spec: EquationSpec, tol: float = 1e-9, n_interior: int = 199) -> KPPReport:
    """Check the front-supporting conditions on [0, 1] numerically.

    f'(0) uses a one-sided second-order difference (h = 1e-6) since several
    families are undefined for u < 0.
    """
    h = 1e-6

    def f(u):
        try:
            return rhs_eval(spec, u)
        except EquationError:
            return math.nan

    f0, f1 = f(0.0), f(1.0)
    fprime0 = (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h)
    us = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    fu = spec.rhs(us)
    dfu = np.gradient(fu, us)
    interior_ok = bool(np.all(np.isfinite(dfu)) and np.all(dfu < fprime0 + 1e-6))
    return KPPReport(
        f0=f0,
        f1=f1,
        fprime0=fprime0,
        f0_zero=abs(f0) < tol,
        f1_zero=abs(f1) < tol,
        fprime0_positive=fprime0 > 0.0,
        interior_bound_ok=interior_ok,
    )


@dataclass(frozen=True)
class Eq47Build:
    """Three-term family built from (n, c1, lambda2), plus front metadata."""

    spec: GeneralFamily
    c1: float
    kpp_condition_holds: bool
    velocity: float | None  # k + 1 - k c1, defined when the condition holds


def build_eq47(n: float, c1: float, lambda2: float) -> Eq47Build:
    """Equation with rhs -k(k+1)u^n + l2 k u^((n+1)/2) + ((k+1)c1^2 - l2 c1)k u.

    The constant state u = c1^k solves it identically.  When the plane-wave
    front condition lambda2 = (k+1)(c1+1) holds, the front travels with
    velocity k + 1 - k c1.  For c1 < 0 with even integer k the half-power
    term of the exact solution lives on the negative branch; the returned
    spec records that via halfpower_sign.
    """
    dc = derived_constants(n)
    k = dc.k
    half_sign = 1
    if c1 < 0.0:
        k_int = abs(k - round(k)) < _INT_TOL
        if k_int and int(round(k)) % 2 == 0:
            half_sign = -1
    spec = GeneralFamily(
        n=n,
        lambda1=(k + 1.0) * c1**2 - lambda2 * c1,
        lambda2=lambda2,
        halfpower_sign=half_sign,
    )
    holds = abs(lambda2 - (k + 1.0) * (c1 + 1.0)) < 1e-12
    return Eq47Build(
        spec=spec,
        c1=c1,
        kpp_condition_holds=holds,
        velocity=(k + 1.0 - k * c1) if holds else None,
    )


_VARIANTS = {
    "Fisher": Fisher,
    "CubicPolynomial": CubicPolynomial,
    "PowerLaw": PowerLaw,
    "GeneralFamily": GeneralFamily,
    "SigmaFamily": SigmaFamily,
    "PerturbedFisher": PerturbedFisher,
    "GeneralizedFisher": GeneralizedFisher,
    "QuadraticDecay": QuadraticDecay,
}


def spec_to_json(spec: EquationSpec) -> dict:
    """JSON form {variant, params}; KPPGeneric carries a label only."""
    if isinstance(spec, KPPGeneric):
        return {"variant": "KPPGeneric", "params": {"label": spec.label}}
    return {"variant": spec.variant, "params": spec.params()}


def spec_from_json(obj: dict) -> EquationSpec:
    variant = obj.get("variant")
    if variant == "KPPGeneric":
        raise EquationError("KPPGeneric carries a Python callable and cannot be deserialized")
    if variant not in _VARIANTS:
        raise EquationError(f"unknown equation variant {variant!r}; valid: {sorted(_VARIANTS)}")
    return _VARIANTS[variant](**obj.get("params", {}))
