"""n-capacity and n-modulus of concentric ball configurations.

For ``B(0, ρ) ⊂ B(0, R)`` the extremal is ``φ(x) = t ln(R/|x|)/ln(R/ρ)`` and
``ncap = ω_{n−1} (ln(R/ρ))^{1−n}``.  Non-concentric sets are not handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DEFAULT_QUAD_TOL, _check_dim, sphere_measure
from .errors import DomainError, UnsupportedError
from .quadrature import adaptive_quad


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class AnnulusSpec:
    n: int
    outer: float
    inner: float
    level: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "n", _check_dim(self.n))
        _positive("outer", self.outer)
        _positive("inner", self.inner)
        _positive("level", self.level)
        if not self.inner < self.outer:
            raise DomainError(f"need inner < outer, got inner={self.inner!r}, outer={self.outer!r}")

    @property
    def log_ratio(self) -> float:
        return math.log(self.outer / self.inner)


def annulus_capacity(spec: AnnulusSpec) -> float:
    """n-capacity of B(0, inner) relative to B(0, outer); the level is ignored."""
    if not isinstance(spec, AnnulusSpec):
        raise UnsupportedError("only concentric annuli have a closed-form capacity")
    return sphere_measure(spec.n) * spec.log_ratio ** (1 - spec.n)


def capacity_potential(spec: AnnulusSpec, radius: float) -> float:
    r = float(radius)
    if r < 0 or r > spec.outer:
        raise DomainError(f"radius {r!r} outside [0, {spec.outer!r}]")
    if r <= spec.inner:
        return spec.level
    if r == spec.outer:
        return 0.0
    return spec.level * math.log(spec.outer / r) / spec.log_ratio


def capacity_potential_slope(spec: AnnulusSpec, radius: float) -> float:
    r = float(radius)
    if r < spec.inner or r > spec.outer:
        return 0.0
    return -spec.level / (r * spec.log_ratio)


def potential_energy(spec: AnnulusSpec, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """``∫ |∇φ|^n dx`` of the capacity potential by adaptive quadrature in r."""
    n = spec.n
    omega = sphere_measure(n)
    target_scale = omega * spec.level**n * spec.log_ratio ** (1 - n)

    def integrand(r):
        return abs(capacity_potential_slope(spec, r)) ** n * r ** (n - 1)

    # relative accuracy quad_tol on the result
    return omega * adaptive_quad(integrand, spec.inner, spec.outer, quad_tol * target_scale / omega)


def n_modulus(n: int, cap: float) -> float:
    n = _check_dim(n)
    cap = float(cap)
    if not cap > 0:
        raise DomainError("capacity must be positive")
    if math.isinf(cap):
        return 0.0
    return cap ** (1.0 / (1 - n))


def modulus_shift_check(n: int, r1: float, r2: float, eps_list) -> float:
    """Largest deviation from the modulus change-of-domain formula for B(0, ε) in B(0, r1) versus B(0, r2).

    For concentric balls the formula is exact, so the result is pure rounding.
    """
    from .harmonic_radius import robin_ball_center

    n = _check_dim(n)
    r1, r2 = _positive("r1", r1), _positive("r2", r2)
    eps = np.asarray(list(eps_list), dtype=float)
    if eps.size == 0:
        raise DomainError("eps_list must be non-empty")
    if np.any(eps <= 0) or np.any(eps >= min(r1, r2)):
        raise DomainError("every eps must lie in (0, min(r1, r2))")
    tau1 = robin_ball_center(n, r1).robin
    tau2 = robin_ball_center(n, r2).robin
    worst = 0.0
    for e in eps:
        mod1 = n_modulus(n, annulus_capacity(AnnulusSpec(n, r1, float(e))))
        mod2 = n_modulus(n, annulus_capacity(AnnulusSpec(n, r2, float(e))))
        worst = max(worst, abs(mod1 - mod2 - (tau2 - tau1)))
    return worst
