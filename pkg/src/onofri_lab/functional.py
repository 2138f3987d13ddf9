"""Moser-Onofri functional on radial profiles and the bubble test family.

``J_ρ(u) = (1/(nρ)) ∫_B |∇u|^n dx − ln ∫_B e^u dx`` on the unit ball, with
``u(1) = 0``.  ``Φ_L(r) = η₀(r/L) − η₀(1/L)`` is the truncated bubble of scale
``L``; ``J_{C_n}(Φ_L)`` decreases to the sharp constant as ``L → 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import _check_dim, bubble_slope, bubble_value, bundle, sharp_constant
from .errors import ConvergenceError, DomainError
from .profile import RadialProfile
from .quadrature import composite_rule, geometric_edges


def onofri_energy(n: int, rho: float, profile: RadialProfile) -> float:
    n = _check_dim(n)
    if not rho > 0:
        raise DomainError("rho must be positive")
    if not np.isclose(profile.domain_radius, 1.0, rtol=1e-14):
        raise DomainError("profile must be defined on the unit ball [0, 1]")
    if abs(profile.values[-1]) > 1e-12:
        raise DomainError("profile must vanish on the boundary")
    slope = np.abs(profile.derivs)
    with np.errstate(divide="ignore"):
        log_grad = np.where(slope > 0, n * np.log(slope), -np.inf)
    log_dirichlet = profile.log_integrate_exp(log_grad, n)
    dirichlet = math.exp(log_dirichlet) if math.isfinite(log_dirichlet) else 0.0
    return dirichlet / (n * rho) - profile.log_integrate_exp(profile.values, n)


@dataclass(frozen=True)
class BubbleSpec:
    n: int
    L: float

    def __post_init__(self):
        _check_dim(self.n)
        if not 0 < self.L <= 1:
            raise DomainError("bubble scale L must lie in (0, 1]")


def test_function(spec: BubbleSpec, radius):
    """Φ_L(r) = η₀(r/L) − η₀(1/L)."""
    r = np.asarray(radius, dtype=float)
    if np.any(r < 0) or np.any(r > 1):
        raise DomainError("radius must lie in [0, 1]")
    out = bubble_value(spec.n, r / spec.L) - bubble_value(spec.n, 1.0 / spec.L)
    return float(out) if np.ndim(out) == 0 else out


test_function.__test__ = False  # not a pytest test


def test_function_profile(spec: BubbleSpec, ratio: float = 1.15, order: int = 10) -> RadialProfile:
    """Φ_L on a composite Gauss-Legendre grid graded geometrically from ``1e-5 L`` to 1."""
    edges = geometric_edges(min(1e-5 * spec.L, 1e-6), 1.0, ratio)
    nodes, weights = composite_rule(edges, order)
    nodes = np.concatenate([[0.0], nodes, [1.0]])
    weights = np.concatenate([[0.0], weights, [0.0]])
    n, L = spec.n, spec.L
    values = test_function(spec, nodes)
    values[-1] = 0.0
    derivs = bubble_slope(n, nodes / L) / L
    return RadialProfile(nodes, values, derivs, weights, 1.0, "graded")


test_function_profile.__test__ = False


def bubble_energy_closed_form(n: int, L: float) -> float:
    """J_{C_n}(Φ_L) = ln(n/ω) − Σ_{k<n} S^k/k, S = 1/(1 + L^{n/(n−1)})."""
    c = bundle(n)
    s = 1.0 / (1.0 + L ** (n / (n - 1)))
    return math.log(n / c.omega) - sum(s**k / k for k in range(1, n))


@dataclass(frozen=True)
class ConcentrationLimit:
    n: int
    L: tuple
    values: tuple
    extrapolated: float
    reliable: bool
    fit: str = ""
    instability: float = math.nan
    target: float = math.nan
    notes: tuple = field(default_factory=tuple)

    @property
    def gaps(self) -> tuple:
        return tuple(v - self.target for v in self.values)


def _limit_fit(hs, vals, with_log: bool) -> float:
    """Constant term of a least-squares fit vals ≈ a + b h (+ c h ln h)."""
    hs = np.asarray(hs, dtype=float)
    cols = [np.ones_like(hs), hs]
    if with_log:
        cols.append(hs * np.log(hs))
    mat = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(mat, np.asarray(vals, dtype=float), rcond=None)
    return float(coef[0])


def extrapolate_to_zero(L, values, power: float):
    """Extrapolate ``values(L)`` to ``L = 0`` assuming an error ~ L^power.

    Two models are tried, with and without a logarithmic factor; each is fitted
    on the last k and last k+1 points and the model whose two fits agree best
    is kept.  Returns ``(limit, model, instability)``.
    """
    L = np.asarray(L, dtype=float)
    values = np.asarray(values, dtype=float)
    hs = L**power
    best = None
    for with_log in (False, True):
        k = 3 if with_log else 2
        if len(L) < k + 1:
            continue
        a = _limit_fit(hs[-k:], values[-k:], with_log)
        b = _limit_fit(hs[-(k + 1):], values[-(k + 1):], with_log)
        cand = (abs(a - b), a, "power-log" if with_log else "power")
        if best is None or cand[0] < best[0]:
            best = cand
    if best is None:
        a = _limit_fit(hs[-2:], values[-2:], False)
        return a, "power", math.inf
    return best[1], best[2], best[0]


def concentration_limit(n: int, L_list, quad_tol: float = 1e-11) -> ConcentrationLimit:
    n = _check_dim(n)
    L_list = [float(x) for x in L_list]
    if not L_list:
        raise DomainError("L_list must be non-empty")
    if any(not 0 < x <= 1 for x in L_list):
        raise DomainError("every L must lie in (0, 1]")
    if any(b >= a for a, b in zip(L_list, L_list[1:])):
        raise DomainError("L_list must be strictly decreasing")
    target = sharp_constant(n, quad_tol).by_closed_form
    c = bundle(n)
    values = [onofri_energy(n, c.c_crit, test_function_profile(BubbleSpec(n, L))) for L in L_list]
    if len(values) == 1:
        return ConcentrationLimit(
            n, tuple(L_list), tuple(values), values[0], False, "none", math.inf, target,
            ("single scale: no extrapolation possible",),
        )
    diffs = np.abs(np.diff(values))
    if len(diffs) >= 2 and np.any(diffs[1:] > diffs[:-1] * (1 + 1e-9) + 1e-13):
        raise ConvergenceError(f"J(Φ_L) is not contracting along L = {L_list}: successive gaps {diffs.tolist()}")
    power = n / (n - 1)
    limit, model, instab = extrapolate_to_zero(L_list, values, power)
    reliable = len(values) >= 3 and math.isfinite(instab)
    notes = () if reliable else ("too few scales for a stable extrapolation",)
    return ConcentrationLimit(n, tuple(L_list), tuple(values), limit, reliable, model, instab, target, notes)
