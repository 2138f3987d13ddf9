"""Quadrature helpers: composite Gauss-Legendre rules and an adaptive
Gauss-Kronrod wrapper with error reporting."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericalError


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``order``-point rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def composite_rule(edges, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule over consecutive panels ``edges``."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly increasing")
    xi, wi = gauss_legendre(order)
    a, h = edges[:-1, None], np.diff(edges)[:, None]
    return (a + h * xi).ravel(), (h * wi).ravel()


def geometric_edges(r_min: float, r_max: float, ratio: float = 1.2, include_zero: bool = True) -> np.ndarray:
    """Panel edges growing geometrically from ``r_min`` to ``r_max``.

    The last panel is stretched so that ``r_max`` is hit exactly.
    """
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    count = max(1, int(np.ceil(np.log(r_max / r_min) / np.log(ratio))))
    edges = np.geomspace(r_min, r_max, count + 1)
    edges[-1] = r_max
    if include_zero:
        edges = np.concatenate([[0.0], edges])
    return edges


def adaptive_quad(f, a: float, b: float, tol: float, limit: int = 500, points=None) -> float:
    """Adaptive Gauss-Kronrod on [a, b]; raises when the error estimate exceeds ``tol``."""
    value, err = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=limit, points=points)
    if not np.isfinite(value) or err > tol:
        raise NumericalError(
            f"adaptive quadrature on [{a}, {b}] did not reach tolerance {tol:g} "
            f"(estimate {value!r}, error bound {err:.3g})"
        )
    return value
