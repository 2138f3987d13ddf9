"""Robin function, n-harmonic radius and concentration levels in closed-form cases.

Supported domains are the ball ``B(0, R)`` with the point at its centre (any
n) and the unit disk with an interior point at distance ``a`` from the centre
(n = 2 only).  Robin function and harmonic radius are tied by
``τ = −(n/α_n) ln ρ_Ω``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import _check_dim, bundle, sharp_constant_closed_form
from .errors import DomainError, UnsupportedError
from .profile import RadialProfile
from .quadrature import gauss_legendre

DOMAIN_KINDS = ("ball", "disk")
VERDICTS = ("achieved", "boundary_case", "inconclusive")


@dataclass(frozen=True)
class DomainSpec:
    kind: str
    n: int = 2
    R: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise UnsupportedError(f"domain kind {self.kind!r} has no closed-form Green function here")
        object.__setattr__(self, "n", _check_dim(self.n))
        if not (self.R > 0 and math.isfinite(self.R)):
            raise DomainError("R must be positive")
        if self.kind == "ball" and self.offset != 0.0:
            raise UnsupportedError("off-centre points in a ball are only supported for the unit disk")
        if self.kind == "disk":
            if self.n != 2:
                raise UnsupportedError("the disk domain is two-dimensional")
            if self.R != 1.0:
                raise DomainError("the disk domain is the unit disk")
            if not 0.0 <= self.offset < 1.0:
                raise DomainError(f"disk offset must lie in [0, 1), got {self.offset!r}")

    @classmethod
    def ball(cls, n: int, R: float = 1.0) -> "DomainSpec":
        return cls("ball", n, R)

    @classmethod
    def disk(cls, a: float) -> "DomainSpec":
        return cls("disk", 2, 1.0, float(a))


@dataclass(frozen=True)
class RobinData:
    green_singular_coeff: float
    robin: float
    harmonic_radius: float

    def relation_defect(self) -> float:
        return abs(-self.green_singular_coeff * math.log(self.harmonic_radius) - self.robin)


def _coeff(n: int) -> float:
    return n / bundle(n).alpha


def robin_ball_center(n: int, R: float = 1.0) -> RobinData:
    """Green function at the centre is (n/α_n) ln(R/|y|), so the regular part is −(n/α_n) ln R."""
    n = _check_dim(n)
    if not (R > 0 and math.isfinite(R)):
        raise DomainError("R must be positive")
    k = _coeff(n)
    return RobinData(k, -k * math.log(R), float(R))


def harmonic_radius_disk(a: float) -> RobinData:
    """Unit disk, point at distance ``a``: G(x, y) = (1/2π) ln(|1 − x̄y|/|x − y|)."""
    a = float(a)
    if not 0.0 <= a < 1.0:
        raise DomainError(f"offset must lie in [0, 1), got {a!r}")
    k = _coeff(2)
    x = complex(a, 0.0)
    # regular part H(x, y) = −(1/2π) ln|1 − x̄y| evaluated at y = x
    robin = -k * math.log(abs(1.0 - x.conjugate() * x))
    radius = (1.0 - a) * (1.0 + a)
    return RobinData(k, robin, radius)


def robin_data(domain: DomainSpec) -> RobinData:
    if domain.kind == "ball":
        return robin_ball_center(domain.n, domain.R)
    return harmonic_radius_disk(domain.offset)


def concentration_level(n: int, domain: DomainSpec) -> float:
    """Optimal concentration level C(n) − n ln ρ_Ω(x₀)."""
    n = _check_dim(n)
    if domain.n != n:
        raise DomainError(f"domain is {domain.n}-dimensional, requested n={n}")
    return sharp_constant_closed_form(n) - n * math.log(robin_data(domain).harmonic_radius)


def existence_criterion(n: int, candidate_inf: float, sup_log_radius: float, tol: float = 1e-12) -> str:
    """Compare a candidate infimum with C(n) − n·sup ln ρ_Ω.

    ``achieved`` when strictly below, ``boundary_case`` at equality (relative
    ``tol``), and ``inconclusive`` above; the criterion is only sufficient.
    """
    n = _check_dim(n)
    candidate_inf, sup_log_radius = float(candidate_inf), float(sup_log_radius)
    if not (math.isfinite(candidate_inf) and math.isfinite(sup_log_radius)):
        raise DomainError("inputs must be finite")
    threshold = sharp_constant_closed_form(n) - n * sup_log_radius
    band = tol * max(1.0, abs(threshold))
    if abs(candidate_inf - threshold) <= band:
        return "boundary_case"
    return "achieved" if candidate_inf < threshold else "inconclusive"


# n = 2 harmonic transplantation from B(0, 1 − a²) to the unit disk.


@dataclass(frozen=True)
class TransplantResult:
    energy_disk: float
    energy_ball: float
    energy_gap: float
    volume_disk: float
    volume_ball: float
    volume_ratio: float
    level_capacity_gap: float


def _mobius(y, a):
    return (y - a) / (1.0 - a * y)


def _mobius_deriv_abs(y, a):
    return (1.0 - a * a) / np.abs(1.0 - a * y) ** 2


def _ball_integrals(profile: RadialProfile) -> tuple[float, float]:
    """2π∫U'(s)² s ds exactly on each spline piece, and 2π∫e^U s ds."""
    x, w = gauss_legendre(8)
    lo, hi = profile.nodes[:-1], profile.nodes[1:]
    s = lo[:, None] + (hi - lo)[:, None] * x
    ws = (hi - lo)[:, None] * w
    du = profile.derivative(s)
    energy = 2 * math.pi * float(np.sum(ws * du * du * s))
    volume = 2 * math.pi * float(np.sum(ws * np.exp(profile(s)) * s))
    return energy, volume


def _level_crossings(q, a: float, theta):
    """Distance s along the ray y = a + s e^{iθ} at which |M(y)| = q."""
    b = 1.0 - a * a
    c = np.cos(theta)[:, None]
    q2 = q[None, :] ** 2
    lin = q2 * a * b * c
    return (-lin + np.sqrt(lin * lin + (1.0 - q2 * a * a) * q2 * b * b)) / (1.0 - q2 * a * a)


def _disk_integrals(profile: RadialProfile, a: float, n_theta: int, order: int) -> tuple[float, float]:
    """Polar quadrature around x₀ = a: trapezoid in θ, Gauss-Legendre in s on panels
    bounded by the preimages of the profile's nodes, so the integrand is smooth per panel."""
    r = profile.domain_radius
    theta = 2 * math.pi * np.arange(n_theta) / n_theta
    knots = profile.nodes[profile.nodes > 0] / r
    knots[-1] = 1.0
    edges = np.concatenate([np.zeros((n_theta, 1)), _level_crossings(knots, a, theta)], axis=1)
    x, w = gauss_legendre(order)
    width = np.diff(edges, axis=1)
    s = (edges[:, :-1, None] + width[:, :, None] * x).reshape(n_theta, -1)
    ws = (width[:, :, None] * w).reshape(n_theta, -1)
    y = a + s * np.exp(1j * theta)[:, None]
    rad = np.minimum(r * np.abs(_mobius(y, a)), r)
    jac = s * ws * (2 * math.pi / n_theta)
    du = profile.derivative(rad) * r * _mobius_deriv_abs(y, a)
    energy = float(np.sum(du * du * jac))
    volume = float(np.sum(np.exp(profile(rad)) * jac))
    return energy, volume


def _level_capacity_gap(profile: RadialProfile, a: float, levels: int = 9) -> float:
    """Max over a level grid of |2-cap of {u ≥ t} in the disk − 2-cap of {U ≥ t} in the ball|.

    The disk side integrates |∇ψ| over the boundary circle of the superlevel set,
    with ψ = ln|M|/ln q the capacity potential.
    """
    r = profile.domain_radius
    top = float(profile.values[0])
    worst = 0.0
    n_phi = 512
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    for t in top * np.linspace(0.1, 0.9, levels):
        s_t = brentq(lambda s: float(profile(s)) - t, 0.0, r, xtol=1e-15, rtol=1e-15)
        q = s_t / r
        x_plus, x_minus = (q + a) / (1 + a * q), (a - q) / (1 - a * q)
        centre, radius = (x_plus + x_minus) / 2, (x_plus - x_minus) / 2
        y = centre + radius * np.exp(1j * phi)
        flux = _mobius_deriv_abs(y, a) / (q * math.log(1.0 / q))
        cap_disk = float(np.sum(flux)) * radius * 2 * math.pi / n_phi
        cap_ball = 2 * math.pi / math.log(r / s_t)
        worst = max(worst, abs(cap_disk - cap_ball))
    return worst


def transplant_check(
    a: float, profile: RadialProfile, n: int = 2, n_theta: int = 256, order: int = 8
) -> TransplantResult:
    """Transplant a radial profile on B(0, 1 − a²) to the unit disk along Green level sets.

    ``u(y) = U((1 − a²)|M(y)|)`` with ``M(y) = (y − a)/(1 − ay)``.  The
    Dirichlet energies are compared by independent quadratures, together with
    the e^u volumes and the capacities of corresponding superlevel sets.
    """
    if n != 2:
        raise UnsupportedError("transplantation is implemented for n = 2 only")
    a = float(a)
    data = harmonic_radius_disk(a)
    if not math.isclose(profile.domain_radius, data.harmonic_radius, rel_tol=1e-12):
        raise DomainError(
            f"profile must live on the ball of radius 1 − a² = {data.harmonic_radius!r}, got {profile.domain_radius!r}"
        )
    if np.any(profile.values < 0):
        raise DomainError("profile must be non-negative")
    if not profile.is_nonincreasing(tol=0.0) or profile.values[0] <= profile.values[-1]:
        raise UnsupportedError("profile is not a decreasing function of the Green function")
    e_ball, v_ball = _ball_integrals(profile)
    e_disk, v_disk = _disk_integrals(profile, a, n_theta, order)
    return TransplantResult(
        e_disk, e_ball, abs(e_disk - e_ball), v_disk, v_ball, v_disk / v_ball, _level_capacity_gap(profile, a)
    )


def truncated_bubble_profile(a: float, L: float = 0.25) -> RadialProfile:
    """Φ_L for n = 2 carried to the ball of radius 1 − a² by dilation."""
    from .functional import BubbleSpec, test_function_profile

    r = harmonic_radius_disk(a).harmonic_radius
    base = test_function_profile(BubbleSpec(2, L))
    nodes = base.nodes * r
    nodes[-1] = r
    return RadialProfile(nodes, base.values, base.derivs / r, base.weights * r, r, base.grid_kind)
