"""Direct minimization of the subcritical Moser-Onofri functional on the ball.

``J_ρ(u) = (1/(nρ)) ∫_B |∇u|^n − ln ∫_B e^u`` is discretized with continuous
piecewise-linear radial elements on ``0 = r_0 < … < r_N = 1`` with ``u_N = 0``.
On each element the slope ``g`` is constant, so the Dirichlet term is exactly
``Σ ω (r_{i+1}^n − r_i^n)/n · |g|^n``; the exponential term uses a 4-point
Gauss-Legendre rule per element.

The functional is not convex.  Each Newton step solves
``(H + τK) p = −∇J`` where ``K`` is the r^{n−1}-weighted stiffness matrix and
``τ ≥ 0`` is raised until the shifted matrix is positive definite; ``τ = 0``
near a nondegenerate minimizer recovers plain Newton.  An Armijo backtracking
search enforces decrease of ``J``.  For ``n > 2`` the degenerate weight
``|g|^{n−2}`` is regularized as ``(g² + ε_reg)^{(n−2)/2}``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .constants import _check_dim, bundle
from .errors import DomainError
from .profile import RadialProfile
from .quadrature import gauss_legendre

log = logging.getLogger(__name__)

EPS_REG = 1e-12
_QUAD_POINTS = 4
_NEWTON_STEP_TOL = 1e-9


@dataclass(frozen=True)
class MinimizeOptions:
    grid_size: int = 512
    grid_kind: str = "graded"
    max_iters: int = 200
    step_tol: float = 1e-14
    grad_tol: float = 1e-9
    init: object = "zero"
    grading: float = 2.0

    def __post_init__(self):
        if self.grid_size < 16:
            raise DomainError("grid_size must be at least 16")
        if self.grid_kind not in ("uniform", "graded"):
            raise DomainError("grid_kind must be 'uniform' or 'graded'")
        if self.step_tol <= 0 or self.grad_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be positive")


def radial_grid(size: int, kind: str = "graded", grading: float = 2.0) -> np.ndarray:
    """``size`` nodes on [0, 1]; ``graded`` clusters them at the origin as (i/N)^grading."""
    s = np.linspace(0.0, 1.0, size)
    return s if kind == "uniform" else s**grading


class _Discretization:
    def __init__(self, n: int, rho: float, r: np.ndarray):
        self.n, self.rho, self.r = n, rho, r
        c = bundle(n)
        self.omega = c.omega
        self.h = np.diff(r)
        self.W = c.omega * np.diff(r**n) / n
        xi, wq = gauss_legendre(_QUAD_POINTS)
        self.xi = xi
        rq = r[:-1, None] + self.h[:, None] * xi
        self.rq = rq
        self.cq = c.omega * self.h[:, None] * wq * rq ** (n - 1)
        self.log_cq = np.log(self.cq, where=self.cq > 0, out=np.full_like(self.cq, -np.inf))
        self.eps = 0.0 if n == 2 else EPS_REG
        m = r.size - 1
        k = self.W / self.h**2
        K = np.zeros((m + 1, m + 1))
        idx = np.arange(m)
        K[idx, idx] += k
        K[idx + 1, idx + 1] += k
        K[idx, idx + 1] -= k
        K[idx + 1, idx] -= k
        self.K = K[:m, :m]
        self.K_chol = np.linalg.cholesky(self.K)

    def full(self, U):
        return np.append(U, 0.0)

    def slopes(self, u):
        return np.diff(u) / self.h

    def quad_values(self, u):
        return u[:-1, None] * (1.0 - self.xi) + u[1:, None] * self.xi

    def dirichlet(self, u, regularized=True):
        g = self.slopes(u)
        if regularized:
            return float(np.dot(self.W, (g * g + self.eps) ** (self.n / 2)))
        return float(np.dot(self.W, np.abs(g) ** self.n))

    def log_volume(self, u):
        return float(logsumexp(self.log_cq + self.quad_values(u)))

    def energy(self, U, regularized=True):
        u = self.full(U)
        return self.dirichlet(u, regularized) / (self.n * self.rho) - self.log_volume(u)

    def derivatives(self, U):
        n, u = self.n, self.full(U)
        g = self.slopes(u)
        s = g * g + self.eps
        a = n * self.W * s ** ((n - 2) / 2) * g / self.h
        grad = np.zeros(u.size)
        grad[:-1] -= a
        grad[1:] += a
        if n == 2:
            b = 2.0 * self.W / self.h**2
        else:
            b = n * self.W * s ** ((n - 4) / 2) * (s + (n - 2) * g * g) / self.h**2
        m = u.size - 1
        H = np.zeros((m + 1, m + 1))
        idx = np.arange(m)
        H[idx, idx] += b
        H[idx + 1, idx + 1] += b
        H[idx, idx + 1] -= b
        H[idx + 1, idx] -= b
        scale = 1.0 / (n * self.rho)
        grad *= scale
        H *= scale

        # −ln Z, with weights normalised by Z
        uq = self.quad_values(u)
        logw = self.log_cq + uq
        logZ = logsumexp(logw)
        p = np.exp(logw - logZ)
        phi_l, phi_r = 1.0 - self.xi, self.xi
        dZ = np.zeros(u.size)
        dZ[:-1] += p @ phi_l
        dZ[1:] += p @ phi_r
        grad -= dZ
        d_ll, d_rr, d_lr = p @ (phi_l * phi_l), p @ (phi_r * phi_r), p @ (phi_l * phi_r)
        H[idx, idx] -= d_ll
        H[idx + 1, idx + 1] -= d_rr
        H[idx, idx + 1] -= d_lr
        H[idx + 1, idx] -= d_lr
        H += np.outer(dZ, dZ)
        return grad[:-1], H[:-1, :-1]

    def dual_norm(self, G):
        y = np.linalg.solve(self.K_chol, G)
        return float(math.sqrt(np.dot(y, y)))


@dataclass(frozen=True, eq=False)
class MinimizeResult:
    n: int
    rho: float
    profile: RadialProfile = field(repr=False)
    J_value: float
    el_residual: float
    iterations: int
    converged: bool
    nodes: np.ndarray = field(repr=False)
    nodal_values: np.ndarray = field(repr=False)
    lam: float = math.nan
    message: str = ""

    @property
    def peak(self) -> float:
        return float(self.nodal_values[0])

    @property
    def mass(self) -> float:
        return self.lam * math.exp(self.profile.log_integrate_exp(self.profile.values, self.n))

    @property
    def epsilon(self) -> float:
        """Blow-up length scale (β_n / (λ e^{peak}))^{1/n}."""
        return math.exp((math.log(bundle(self.n).beta) - math.log(self.lam) - self.peak) / self.n)


def _initial_values(n: int, r: np.ndarray, init) -> np.ndarray:
    from .functional import BubbleSpec, test_function

    if isinstance(init, str):
        if init == "zero":
            return np.zeros(r.size)
        raise DomainError(f"unknown init {init!r}")
    if isinstance(init, tuple) and len(init) == 2 and init[0] == "bubble":
        return np.asarray(test_function(BubbleSpec(n, float(init[1])), r), dtype=float)
    if isinstance(init, RadialProfile):
        return np.asarray(init(r), dtype=float)
    arr = np.asarray(init, dtype=float)
    if arr.shape != r.shape:
        raise DomainError("given initial values must match the grid")
    return arr.copy()


def _element_profile(disc: _Discretization, u: np.ndarray, kind: str) -> RadialProfile:
    """The P1 solution sampled at the element quadrature points (plus endpoints)."""
    xi, wq = gauss_legendre(_QUAD_POINTS)
    g = disc.slopes(u)
    nodes = disc.rq.ravel()
    values = disc.quad_values(u).ravel()
    derivs = np.repeat(g, xi.size)
    weights = (disc.h[:, None] * wq).ravel()
    nodes = np.concatenate([[0.0], nodes, [1.0]])
    values = np.concatenate([[u[0]], values, [0.0]])
    derivs = np.concatenate([[0.0], derivs, [g[-1]]])
    weights = np.concatenate([[0.0], weights, [0.0]])
    return RadialProfile(nodes, values, derivs, weights, 1.0, kind)


def minimize_subcritical(n: int, rho: float, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Stationary point of the discrete J_ρ for 0 < ρ < C_n reached by damped Newton from ``opts.init``."""
    n = _check_dim(n)
    opts = opts or MinimizeOptions()
    c_crit = bundle(n).c_crit
    if not rho > 0:
        raise DomainError("rho must be positive")
    if rho >= c_crit:
        raise DomainError(
            f"rho = {rho!r} is not below the critical mass C_n = {c_crit!r}; "
            "the critical functional on the ball has no minimizer"
        )
    r = radial_grid(opts.grid_size, opts.grid_kind, opts.grading)
    disc = _Discretization(n, rho, r)
    U = _initial_values(n, r, opts.init)
    U = U[:-1] - U[-1]

    J = disc.energy(U)
    tau = 0.0
    tau_floor = 1e-8 / rho
    converged, message, it = False, "", 0
    flat = 64 * np.finfo(float).eps * max(1.0, abs(J))
    for it in range(1, opts.max_iters + 1):
        G, H = disc.derivatives(U)
        res = disc.dual_norm(G)
        tau = tau / 10.0 if tau > tau_floor else 0.0
        while True:
            try:
                L = np.linalg.cholesky(H + tau * disc.K)
                break
            except np.linalg.LinAlgError:
                tau = max(10.0 * tau, tau_floor)
        p = -np.linalg.solve(L.T, np.linalg.solve(L, G))
        # the dual norm barely sees nodes whose elements have r^{n-1}-weight near zero,
        # so a small Newton step is required as well
        if res <= opts.grad_tol and np.max(np.abs(p)) <= _NEWTON_STEP_TOL:
            converged, it = True, it - 1
            break
        slope = float(np.dot(G, p))
        alpha = 1.0
        while True:
            J_new = disc.energy(U + alpha * p)
            if J_new <= J + 1e-4 * alpha * slope:
                break
            if alpha == 1.0 and tau == 0.0 and abs(J_new - J) <= flat:
                # J is flat to round-off along p; accept the Newton step if it lowers the residual
                if disc.dual_norm(disc.derivatives(U + p)[0]) <= max(res, opts.grad_tol):
                    break
            alpha *= 0.5
            if alpha < 1e-12:
                break
        if alpha < 1e-12:
            if abs(slope) < 1e-28:
                message = "line search stalled at round-off level"
                break
            tau = max(10.0 * tau, tau_floor * 1e4)
            continue
        step = alpha * p
        U = U + step
        J = J_new
        if np.max(np.abs(step)) < opts.step_tol:
            G, _ = disc.derivatives(U)
            res = disc.dual_norm(G)
            converged = res <= opts.grad_tol
            message = "step below step_tol"
            break
    else:
        G, _ = disc.derivatives(U)
        res = disc.dual_norm(G)
        converged = res <= opts.grad_tol
        message = "max_iters reached"

    u = disc.full(U)
    profile = _element_profile(disc, u, opts.grid_kind)
    J_value = disc.energy(U, regularized=False)
    lam = rho / math.exp(disc.log_volume(u))
    if not converged:
        log.warning("minimize_subcritical(n=%d, rho=%g) not converged: %s (residual %.3g)", n, rho, message, res)
    return MinimizeResult(n, rho, profile, J_value, res, it, converged, r, u, lam, message)


@dataclass(frozen=True)
class BlowupRecord:
    rho: float
    peak: float
    mass: float
    epsilon: float
    J_value: float
    converged: bool
    el_residual: float


def trace_blowup(n: int, rho_list, opts: MinimizeOptions | None = None) -> list[BlowupRecord]:
    """Subcritical minimizers along an increasing ρ ladder, each warm-started from the previous one."""
    n = _check_dim(n)
    opts = opts or MinimizeOptions()
    rho_list = [float(x) for x in rho_list]
    if not rho_list:
        raise DomainError("rho_list must be non-empty")
    if any(b <= a for a, b in zip(rho_list, rho_list[1:])):
        raise DomainError("rho_list must be strictly increasing")
    records = []
    init = opts.init
    for rho in rho_list:
        res = minimize_subcritical(n, rho, _replace(opts, init=init))
        records.append(BlowupRecord(rho, res.peak, res.mass, res.epsilon, res.J_value, res.converged, res.el_residual))
        init = res.nodal_values
    return records


def _replace(opts: MinimizeOptions, **changes) -> MinimizeOptions:
    from dataclasses import replace

    return replace(opts, **changes)
