"""Sampled radial functions.

A ``RadialProfile`` stores a radial function on ``[0, R]`` at a set of nodes
together with its derivative and a quadrature rule for ``∫_0^R f(r) dr``.
Nodes added only to pin the endpoints (``r = 0``, ``r = R``) carry zero weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError

GRID_KINDS = ("uniform", "graded")


@dataclass(frozen=True, eq=False)
class RadialProfile:
    nodes: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    weights: np.ndarray
    domain_radius: float
    grid_kind: str = "graded"
    _meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        for name in ("values", "derivs", "weights"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != nodes.shape:
                raise DomainError(f"{name} must have the same shape as nodes")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("profile needs at least two nodes")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("profile nodes must be strictly increasing")
        if nodes[0] < 0:
            raise DomainError("profile nodes must be non-negative")
        if not np.isclose(nodes[-1], self.domain_radius, rtol=1e-14, atol=0.0):
            raise DomainError("last node must equal the domain radius")
        if self.grid_kind not in GRID_KINDS:
            raise DomainError(f"grid_kind must be one of {GRID_KINDS}")
        if nodes[0] == 0.0 and self.derivs[0] != 0.0:
            raise DomainError("radial profile must have zero slope at the origin")

    def integrate(self, f_values, n: int | None = None) -> float:
        """``∫_0^R f(r) dr``, or the ball integral ``∫_{B_R} f dx`` when ``n`` is given."""
        f_values = np.asarray(f_values, dtype=float)
        if n is None:
            return float(np.dot(self.weights, f_values))
        from .constants import sphere_measure

        return sphere_measure(n) * float(np.dot(self.weights, self.nodes ** (n - 1) * f_values))

    def log_integrate_exp(self, log_f, n: int | None = None) -> float:
        """``ln ∫ exp(log_f)``, ball measure when ``n`` is given; safe for huge exponents."""
        from scipy.special import logsumexp

        log_f = np.asarray(log_f, dtype=float)
        keep = self.weights > 0
        terms = np.log(self.weights[keep]) + log_f[keep]
        if n is None:
            return float(logsumexp(terms))
        from .constants import sphere_measure

        terms = terms + (n - 1) * np.log(self.nodes[keep])
        return float(logsumexp(terms)) + np.log(sphere_measure(n))

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.nodes, self.values, self.derivs, extrapolate=False)

    def __call__(self, r):
        """Cubic Hermite interpolant of the samples."""
        r = np.asarray(r, dtype=float)
        if np.any(r < self.nodes[0] - 1e-15) or np.any(r > self.domain_radius * (1 + 1e-14)):
            raise DomainError("evaluation radius outside the profile's node range")
        return self._spline(np.clip(r, self.nodes[0], self.nodes[-1]))

    def derivative(self, r):
        r = np.clip(np.asarray(r, dtype=float), self.nodes[0], self.nodes[-1])
        return self._spline.derivative()(r)

    def shifted(self, constant: float) -> "RadialProfile":
        return RadialProfile(
            self.nodes, self.values + constant, self.derivs, self.weights, self.domain_radius, self.grid_kind,
            dict(self._meta),
        )

    def is_nonincreasing(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))

    @classmethod
    def from_function(cls, func, dfunc, nodes, weights, domain_radius, grid_kind="graded"):
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, func(nodes), dfunc(nodes), weights, domain_radius, grid_kind)


def with_endpoints(nodes, weights, domain_radius: float):
    """Prepend ``0`` and append ``domain_radius`` (with zero weight) to an open rule."""
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    head = [] if nodes[0] == 0.0 else [0.0]
    tail = [] if np.isclose(nodes[-1], domain_radius, rtol=1e-15, atol=0.0) else [domain_radius]
    full_nodes = np.concatenate([head, nodes, tail])
    full_weights = np.concatenate([np.zeros(len(head)), weights, np.zeros(len(tail))])
    if tail == []:
        full_nodes[-1] = domain_radius
    return full_nodes, full_weights
