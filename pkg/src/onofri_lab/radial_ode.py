"""Radial shooting for −Δ_n v = e^v on the unit ball.

The radial equation ``(r^{n−1}(−v')^{n−1})' = r^{n−1} e^v`` is integrated as the
first-order system in the flux ``m = r^{n−1}(−v')^{n−1}``.  Integration runs in
the log-radius ``x = ln r``::

    dv/dx = −m^{1/(n−1)},    dm/dx = exp(v + n x)

where ``v + n ln r`` stays bounded for every peak height, so ``e^v`` never has to
be formed on its own.  The start radius sits deep inside the regime where the
two-term series ``m ≈ e^c r^n / n`` is exact to double precision.

A solution with ``v(1) = ln λ`` gives the mean-field solution ``u = v − v(1)`` of
``−Δ_n u = λ e^u`` with mass ``λ ∫ e^u = ω_{n−1} m(1)``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .constants import _check_dim, bubble_value, bundle, sphere_measure
from .errors import BlowUpError, DomainError, InsufficientDataError, NumericalError
from .profile import RadialProfile
from .quadrature import gauss_legendre

DEFAULT_ODE_TOL = 1e-10
# series start: e^{c} r0^n / n is kept below this
_START_FLUX = 1e-24
_GL_ORDER = 6


def _start_log_radius(n: int, peak: float, r_end: float) -> float:
    x_series = (math.log(n * _START_FLUX) - peak) / n
    return min(math.log(1e-6 * r_end), x_series)


def _integrate(n: int, peak: float, r_end: float, ode_tol: float):
    """Integrate (w, m) with w = v − peak, so small solutions keep full relative precision."""
    x0 = _start_log_radius(n, peak, r_end)
    x_end = math.log(r_end)
    q = 1.0 / (n - 1)
    m0 = math.exp(peak + n * x0) / n
    w0 = -(n - 1) / n * m0**q
    # size of m(r_end) and of the drop in w, in the linear regime
    m_scale = min(1.0, math.exp(min(peak, 0.0)) * r_end**n / n)
    w_scale = min(1.0, m_scale**q * r_end)

    def rhs(x, y):
        w, m = y
        return [-(max(m, 0.0) ** q), math.exp(peak + w + n * x)]

    sol = solve_ivp(
        rhs,
        (x0, x_end),
        [w0, m0],
        method="RK45",
        rtol=ode_tol,
        atol=[ode_tol * 1e-2 * w_scale, ode_tol * 1e-2 * m_scale],
        dense_output=True,
    )
    if sol.status != 0 or not np.all(np.isfinite(sol.y)):
        reached = float(math.exp(sol.t[-1])) if sol.t.size else 0.0
        raise BlowUpError(f"shooting from peak {peak!r} stopped at radius {reached:.6g}: {sol.message}", reached)
    return sol, x0


def shoot(
    n: int, peak: float, r_end: float = 1.0, ode_tol: float = DEFAULT_ODE_TOL, absolute: bool = True
) -> RadialProfile:
    """Profile of v on [0, r_end] with v(0) = peak, v'(0) = 0.

    With ``absolute=False`` the values are ``v − peak``, which keeps full
    precision in ``v − v(r_end)`` for very negative peaks.

    Nodes are Gauss-Legendre points of every accepted integrator step (in
    log-radius), plus the two endpoints; the attached weights integrate over
    ``[0, r_end]``.  The flux ``m`` at each node is kept in ``profile._meta``.
    """
    n = _check_dim(n)
    if not math.isfinite(peak):
        raise DomainError("peak must be finite")
    if ode_tol <= 0:
        raise DomainError("ode_tol must be positive")
    if not r_end > 0:
        raise DomainError("r_end must be positive")

    sol, x0 = _integrate(n, float(peak), float(r_end), ode_tol)
    xi, wi = gauss_legendre(_GL_ORDER)
    steps = sol.t
    a, h = steps[:-1, None], np.diff(steps)[:, None]
    x_nodes = (a + h * xi).ravel()
    x_weights = (h * wi).ravel()
    w, m = sol.sol(x_nodes)
    r = np.exp(x_nodes)

    # endpoints: origin (exact data) and r_end (integrator state)
    w_end, m_end = sol.y[:, -1]
    r_all = np.concatenate([[0.0], r, [r_end]])
    w_all = np.concatenate([[0.0], w, [w_end]])
    m_all = np.concatenate([[0.0], m, [m_end]])
    dv_all = np.concatenate([[0.0], -(np.maximum(m, 0.0) ** (1.0 / (n - 1))) / r, [-(m_end ** (1.0 / (n - 1))) / r_end]])
    # dr = r dx; the sliver [0, r0] carries relative weight below 1e-20
    w_all_weights = np.concatenate([[0.0], x_weights * r, [0.0]])
    r_all[-1] = r_end
    profile = RadialProfile(r_all, w_all, dv_all, w_all_weights, float(r_end), "graded")
    profile._meta.update(flux=m_all, peak=float(peak), steps=int(steps.size - 1), start_radius=math.exp(x0))
    return profile.shifted(float(peak)) if absolute else profile


def _exact_flux_end(n: int, peak: float) -> float:
    """m(1) of the rescaled-bubble solution; closed form, used for diagnostics only."""
    c = bundle(n)
    log_t = -(math.log(c.beta) - peak) / (n - 1)
    return c.c_crit / c.omega * math.exp(-(n - 1) * math.log1p(math.exp(-log_t)))


@dataclass(frozen=True, eq=False)
class BranchPoint:
    n: int
    peak_v: float
    lam: float
    mass: float
    peak_u: float
    energy_J: float
    pohozaev_residual: float
    profile: RadialProfile = field(repr=False)
    log_lam: float = math.nan

    def energy(self, rho: float) -> float:
        from .functional import onofri_energy

        return onofri_energy(self.n, rho, self.profile)


def pohozaev_sides(n: int, lam: float, profile: RadialProfile, log_lam: float | None = None) -> tuple[float, float]:
    """Both sides of the ball Pohozaev identity for −Δ_n u = λ e^u, u(1) = 0:

    ``ω |u'(1)|^n  =  (n²/(n−1)) λ ∫_B (e^u − 1) dx``.
    """
    if not np.isclose(profile.domain_radius, 1.0) or abs(profile.values[-1]) > 1e-12:
        raise DomainError("Pohozaev identity needs a profile on the unit ball with u(1) = 0")
    omega = sphere_measure(n)
    lhs = omega * abs(profile.derivs[-1]) ** n
    u = profile.values
    if u.max() < 1.0:
        excess = lam * profile.integrate(np.expm1(u), n)
    else:
        # λ e^u can overflow only through e^u; fold λ into the exponent
        if log_lam is None:
            log_lam = math.log(lam)
        excess = math.exp(profile.log_integrate_exp(u + log_lam, n)) - lam * omega / n
    rhs = n * n / (n - 1) * excess
    return lhs, rhs


def pohozaev_defect(n: int, lam: float, profile: RadialProfile, log_lam: float | None = None) -> float:
    lhs, rhs = pohozaev_sides(n, lam, profile, log_lam)
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else abs(lhs - rhs) / scale


def _log_lam(point: BranchPoint) -> float | None:
    return None if math.isnan(point.log_lam) else point.log_lam


def pohozaev_residual(point: BranchPoint) -> float:
    return pohozaev_defect(point.n, point.lam, point.profile, _log_lam(point))


def branch_point(n: int, peak: float, ode_tol: float = DEFAULT_ODE_TOL) -> BranchPoint:
    """Mean-field solution on the unit ball generated by shooting height ``peak``."""
    from .functional import onofri_energy

    n = _check_dim(n)
    w = shoot(n, peak, 1.0, ode_tol, absolute=False)
    w_end = float(w.values[-1])
    u = w.shifted(-w_end)
    u.values[-1] = 0.0
    v_end = peak + w_end
    lam = math.exp(v_end)
    mass = sphere_measure(n) * float(w._meta["flux"][-1])
    c = bundle(n)
    point = BranchPoint(
        n=n,
        peak_v=float(peak),
        lam=lam,
        mass=mass,
        peak_u=-w_end,
        energy_J=onofri_energy(n, c.c_crit, u),
        pohozaev_residual=pohozaev_defect(n, lam, u, v_end),
        profile=u,
        log_lam=v_end,
    )
    # for huge peaks the deficit C_n − mass drops below the integration error
    if not 0.0 < mass <= c.c_crit * (1 + 10 * ode_tol):
        raise NumericalError(f"mass {mass!r} outside (0, C_n] at peak {peak!r}")
    return point


@dataclass
class SolutionBranch:
    n: int
    points: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def peaks(self) -> np.ndarray:
        return np.array([p.peak_v for p in self.points])

    @property
    def masses(self) -> np.ndarray:
        return np.array([p.mass for p in self.points])

    def mass_is_increasing(self) -> bool:
        return bool(np.all(np.diff(self.masses) > 0))


def worker_count() -> int:
    raw = os.environ.get("ONOFRI_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def scan_branch(n: int, peaks, ode_tol: float = DEFAULT_ODE_TOL, workers: int | None = None) -> SolutionBranch:
    """Branch points for every peak, sorted by peak; failures are recorded, not raised."""
    n = _check_dim(n)
    peaks = sorted(float(p) for p in peaks)
    if not peaks:
        raise DomainError("peaks must be non-empty")
    if not all(math.isfinite(p) for p in peaks):
        raise DomainError("peaks must be finite")

    def attempt(peak):
        try:
            return branch_point(n, peak, ode_tol)
        except (NumericalError, DomainError) as exc:
            return exc

    workers = worker_count() if workers is None else max(1, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(attempt, peaks))
    else:
        outcomes = [attempt(p) for p in peaks]

    branch = SolutionBranch(n)
    for peak, out in zip(peaks, outcomes):
        if isinstance(out, Exception):
            branch.failures.append((peak, f"{type(out).__name__}: {out}"))
        else:
            branch.points.append(out)
    return branch


# ---------------------------------------------------------------------------
# blow-up diagnostics


@dataclass(frozen=True, eq=False)
class RescaleResult:
    epsilon: float
    eta: RadialProfile = field(repr=False)
    sup_deviation: float
    in_blowup_regime: bool
    note: str = ""


def blowup_scale(n: int, lam: float, peak_u: float, log_lam: float | None = None) -> float:
    """ε with λ ε^n e^{peak_u − ln β_n} = 1."""
    if log_lam is None:
        log_lam = math.log(lam)
    return math.exp((math.log(bundle(n).beta) - log_lam - peak_u) / n)


def rescale_profile(
    n: int, profile: RadialProfile, lam: float, peak_u: float, r_cap: float = 10.0, log_lam: float | None = None
) -> RescaleResult:
    """η(r) = u(εr) − peak_u + ln β_n on [0, min(r_cap, R/ε)], compared against η₀.

    The carried weights are the source rule rescaled; they are exact only when
    ``r_top`` falls on a panel boundary, so the result is meant for pointwise use.
    """
    eps = blowup_scale(n, lam, peak_u, log_lam)
    r_top = min(r_cap, profile.domain_radius / eps)
    keep = profile.nodes <= r_top * eps * (1 + 1e-14)
    nodes = profile.nodes[keep] / eps
    shift = math.log(bundle(n).beta) - peak_u
    values = profile.values[keep] + shift
    derivs = profile.derivs[keep] * eps
    weights = profile.weights[keep] / eps
    if nodes[-1] < r_top * (1 - 1e-12):
        nodes = np.append(nodes, r_top)
        values = np.append(values, float(profile(r_top * eps)) + shift)
        derivs = np.append(derivs, float(profile.derivative(r_top * eps)) * eps)
        weights = np.append(weights, 0.0)
    else:
        nodes[-1] = r_top
    eta = RadialProfile(nodes, values, derivs, weights, r_top, "graded")
    deviation = float(np.max(np.abs(values - bubble_value(n, nodes))))
    return RescaleResult(eps, eta, deviation, eps < 1.0)


def rescale_to_bubble(point: BranchPoint, r_cap: float = 10.0) -> RescaleResult:
    """Blow-up rescaling of a branch point toward the standard bubble.

    The result is flagged (``in_blowup_regime = False``) when ``ε ≥ 1`` or the
    mass is not within 20% of C_n; the rescaled profile is still returned.
    """
    n = point.n
    res = rescale_profile(n, point.profile, point.lam, point.peak_u, r_cap, _log_lam(point))
    notes = []
    if res.epsilon >= 1.0:
        notes.append(f"epsilon = {res.epsilon:.6g} is not < 1")
    if point.mass < 0.8 * bundle(n).c_crit:
        notes.append("mass not within 20% of C_n")
    return RescaleResult(res.epsilon, res.eta, res.sup_deviation, not notes, "; ".join(notes))


def log_slope(profile: RadialProfile, lo: float, hi: float, samples: int = 64) -> float:
    """Least-squares slope of the profile against −ln r over [lo, hi]."""
    if not 0 < lo < hi:
        raise DomainError("fit range must satisfy 0 < lo < hi")
    if hi > profile.domain_radius * (1 + 1e-12):
        raise DomainError(f"fit range upper end {hi} exceeds the profile radius {profile.domain_radius:.6g}")
    inside = np.count_nonzero((profile.nodes >= lo) & (profile.nodes <= hi))
    if inside < 4:
        raise InsufficientDataError(f"only {inside} profile nodes inside [{lo}, {hi}]")
    r = np.geomspace(lo, min(hi, profile.domain_radius), samples)
    slope, _ = np.polyfit(-np.log(r), profile(r), 1)
    return float(slope)


def farfield_slope(point: BranchPoint, fit_range=(5.0, 50.0)) -> float:
    """Slope of the rescaled profile against −ln r; tends to n²/(n−1) as the mass tends to C_n."""
    lo, hi = fit_range
    res = rescale_profile(point.n, point.profile, point.lam, point.peak_u, math.inf, _log_lam(point))
    if res.epsilon >= 1.0:
        raise DomainError("branch point is not in the blow-up regime (epsilon >= 1)")
    return log_slope(res.eta, lo, hi)
