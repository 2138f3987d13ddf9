"""Dimensional constants of the n-Laplacian Liouville problem.

All constants are composed from the unit-sphere measure ``ω_{n-1}``, which is
evaluated through exact Gamma values at integer and half-integer arguments.
The sharp Moser-Onofri constant on the unit ball is available by two
independent routes: adaptive quadrature of the bubble integral, and the
closed form ``ln(n/ω_{n-1}) - H_{n-1}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, DomainError
from .quadrature import adaptive_quad

DEFAULT_QUAD_TOL = 1e-11


def _check_dim(n) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n!r}")
    return int(n)


def _gamma_half(n: int) -> float:
    """Γ(n/2) from Γ(1) = 1 and Γ(1/2) = √π by exact recursion."""
    if n % 2 == 0:
        return float(math.factorial(n // 2 - 1))
    k = (n - 1) // 2
    # Γ(k + 1/2) = (2k)! √π / (4^k k!)
    return float(Fraction(math.factorial(2 * k), 4**k * math.factorial(k))) * math.sqrt(math.pi)


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere in R^n, ``2 π^{n/2} / Γ(n/2)``."""
    n = _check_dim(n)
    if n % 2 == 0:
        return 2.0 * math.pi ** (n // 2) / _gamma_half(n)
    k = (n - 1) // 2
    # odd n: 2 π^k 4^k k! / (2k)!, no √π round trip
    return 2.0 * math.pi**k * float(Fraction(4**k * math.factorial(k), math.factorial(2 * k)))


def harmonic_number(k: int) -> float:
    return float(sum(Fraction(1, j) for j in range(1, k + 1)))


@dataclass(frozen=True)
class DimensionConstants:
    n: int
    omega: float
    alpha: float
    c_crit: float
    beta: float
    quant_mass: float

    def as_dict(self) -> dict:
        return asdict(self)


def bundle(n: int) -> DimensionConstants:
    n = _check_dim(n)
    omega = sphere_measure(n)
    alpha = n * omega ** (1.0 / (n - 1))
    c_crit = (n * n / (n - 1)) ** (n - 1) * omega
    beta = n * (n * n / (n - 1)) ** (n - 1)
    quant_mass = (n * alpha / (n - 1)) ** (n - 1)
    return DimensionConstants(n, omega, alpha, c_crit, beta, quant_mass)


def bubble_value(n: int, radius):
    """η₀(r) = ln β_n − n ln(1 + r^{n/(n−1)}); vectorised over ``radius``."""
    n = _check_dim(n)
    r = np.asarray(radius, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    out = math.log(bundle(n).beta) - n * np.log1p(r ** (n / (n - 1)))
    return float(out) if out.ndim == 0 else out


def bubble_slope(n: int, radius):
    """dη₀/dr."""
    r = np.asarray(radius, dtype=float)
    t = r ** (n / (n - 1))
    out = -(n * n / (n - 1)) * r ** (1.0 / (n - 1)) / (1.0 + t)
    return float(out) if out.ndim == 0 else out


def _bubble_moment(n: int, weight, abs_tol: float) -> float:
    """ω ∫_0^∞ r^{n−1} e^{η₀} weight(η₀) dr on the compactified variable
    s = t/(1+t), t = r^{n/(n−1)}; ``abs_tol`` bounds the error of the result."""
    p = n / (n - 1)
    omega = sphere_measure(n)

    def integrand(s):
        if s <= 0.0 or s >= 1.0:
            return 0.0
        t = s / (1.0 - s)
        r = t ** (1.0 / p)
        dr_ds = (r / (p * t)) / (1.0 - s) ** 2
        eta = bubble_value(n, r)
        return r ** (n - 1) * math.exp(eta) * weight(eta) * dr_ds

    return omega * adaptive_quad(integrand, 0.0, 1.0, abs_tol / omega)


def bubble_mass(n: int, quad_tol: float | None = None) -> float:
    """∫_{R^n} e^{η₀} dx by adaptive quadrature (equals C_n).

    ``quad_tol`` is an absolute bound; the default is ``1e-12 · C_n``.
    """
    n = _check_dim(n)
    if quad_tol is None:
        quad_tol = 1e-12 * bundle(n).c_crit
    if quad_tol <= 0:
        raise DomainError("quad_tol must be positive")
    return _bubble_moment(n, lambda eta: 1.0, quad_tol)


@dataclass(frozen=True)
class SharpConstant:
    n: int
    by_quadrature: float
    by_closed_form: float

    @property
    def value(self) -> float:
        return self.by_closed_form


def sharp_constant_closed_form(n: int) -> float:
    n = _check_dim(n)
    return math.log(n / sphere_measure(n)) - harmonic_number(n - 1)


def sharp_constant(n: int, quad_tol: float = DEFAULT_QUAD_TOL) -> SharpConstant:
    """Infimum of the critical Moser-Onofri functional on the unit ball.

    The quadrature route evaluates ``(1/(nC_n)) ∫ e^{η₀} η₀ + ((n−1)/n) ln β_n − ln C_n``;
    it must agree with the closed form to ``10 * quad_tol``.
    """
    n = _check_dim(n)
    if quad_tol <= 0:
        raise DomainError("quad_tol must be positive")
    c = bundle(n)
    moment = _bubble_moment(n, lambda eta: eta, quad_tol * n * c.c_crit)
    by_quad = moment / (n * c.c_crit) + (n - 1) / n * math.log(c.beta) - math.log(c.c_crit)
    closed = sharp_constant_closed_form(n)
    if abs(by_quad - closed) > 10 * quad_tol:
        raise ConsistencyError(
            f"sharp constant routes disagree for n={n}: quadrature {by_quad!r} vs closed form {closed!r}"
        )
    return SharpConstant(n, by_quad, closed)
