"""Functional evaluation against closed forms.

For the n = 2 solution family u_δ(r) = 2 ln((1+δ)/(1+δr²)) on the unit disk:
∫|∇u|² = 16π(ln(1+δ) − δ/(1+δ)) and ∫e^u = π(1+δ).
For Φ_L with S = 1/(1+L^{n/(n−1)}): J_{C_n}(Φ_L) = ln(n/ω) − Σ_{k<n} S^k/k, which is
itself checked against direct quadrature of both integrals below.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from onofri_lab.constants import bundle, sharp_constant_closed_form
from onofri_lab.errors import DomainError
from onofri_lab.functional import (
    BubbleSpec,
    bubble_energy_closed_form,
    concentration_limit,
    extrapolate_to_zero,
    onofri_energy,
    test_function,
    test_function_profile,
)
from onofri_lab.profile import RadialProfile
from onofri_lab.quadrature import composite_rule
from onofri_lab.radial_ode import branch_point

PI = math.pi


def zero_profile(radius=1.0):
    nodes, weights = composite_rule(np.linspace(0, radius, 17), 6)
    nodes = np.concatenate([[0.0], nodes, [radius]])
    weights = np.concatenate([[0.0], weights, [0.0]])
    return RadialProfile(nodes, np.zeros_like(nodes), np.zeros_like(nodes), weights, radius)


def test_energy_of_zero_n2():
    assert onofri_energy(2, 3.7, zero_profile()) == pytest.approx(-math.log(PI), abs=1e-14)


def test_energy_of_zero_n3():
    assert onofri_energy(3, 1.0, zero_profile()) == pytest.approx(-math.log(4 * PI / 3), abs=1e-14)


def family_energy_n2(delta, rho):
    dirichlet = 16 * PI * (math.log1p(delta) - delta / (1 + delta))
    return dirichlet / (2 * rho) - math.log(PI * (1 + delta))


def test_energy_delta1_at_critical_mass():
    p = branch_point(2, math.log(8.0))
    assert p.energy(8 * PI) == pytest.approx(-0.5 - math.log(PI), abs=1e-9)
    assert p.energy_J == pytest.approx(-0.5 - math.log(PI), abs=1e-9)


@given(st.floats(min_value=-2.0, max_value=4.0), st.floats(min_value=0.1, max_value=100.0))
def test_energy_of_n2_family(log10_delta, rho):
    delta = 10.0**log10_delta
    p = branch_point(2, math.log(8 * delta))
    assert p.energy(rho) == pytest.approx(family_energy_n2(delta, rho), rel=1e-9, abs=1e-9)


def test_energy_validation():
    with pytest.raises(DomainError):
        onofri_energy(2, 0.0, zero_profile())
    with pytest.raises(DomainError):
        onofri_energy(2, 1.0, zero_profile(2.0))
    shifted = zero_profile().shifted(1.0)
    with pytest.raises(DomainError):
        onofri_energy(2, 1.0, shifted)


def test_test_function_examples():
    assert test_function(BubbleSpec(2, 0.5), 1.0) == 0.0
    assert test_function(BubbleSpec(2, 1.0), 0.0) == pytest.approx(2 * math.log(2), abs=1e-15)
    assert test_function(BubbleSpec(2, 0.1), 0.0) == pytest.approx(2 * math.log(101), abs=1e-13)


@given(st.integers(2, 8), st.floats(min_value=1e-4, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
def test_test_function_formula(n, L, r):
    # Φ_L(r) = n ln((1 + L^{−p})/(1 + (r/L)^p)), p = n/(n−1)
    p = n / (n - 1)
    expected = n * (math.log1p(L**-p) - math.log1p((r / L) ** p))
    assert test_function(BubbleSpec(n, L), r) == pytest.approx(expected, abs=1e-12 * max(1.0, abs(expected)))


def test_bubble_spec_validation():
    for L in (0.0, -0.5, 1.5):
        with pytest.raises(DomainError):
            BubbleSpec(2, L)
    with pytest.raises(DomainError):
        test_function(BubbleSpec(2, 0.5), 1.5)


def _closed_form_by_integrals(n, L):
    """J_{C_n}(Φ_L) from direct 1-D quadrature of its two integrals."""
    c = bundle(n)

    def grad_term(r):
        return c.omega * r ** (n - 1) * abs(test_function_slope(n, L, r)) ** n

    def vol_term(r):
        return c.omega * r ** (n - 1) * math.exp(test_function(BubbleSpec(n, L), r))

    pts = sorted({L * 0.1, L, min(1.0, 10 * L)} - {1.0})
    dirichlet = quad(grad_term, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, points=pts, limit=400)[0]
    volume = quad(vol_term, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, points=pts, limit=400)[0]
    return dirichlet / (n * c.c_crit) - math.log(volume)


def test_function_slope(n, L, r):
    p = n / (n - 1)
    return -n * p * (r / L) ** (p - 1) / L / (1 + (r / L) ** p)


test_function_slope.__test__ = False


@pytest.mark.parametrize("n", [2, 3, 4, 5])
@pytest.mark.parametrize("L", [1.0, 0.3, 0.05])
def test_bubble_energy_closed_form_matches_direct_quadrature(n, L):
    assert bubble_energy_closed_form(n, L) == pytest.approx(_closed_form_by_integrals(n, L), abs=1e-8)


@given(st.integers(2, 6), st.floats(min_value=1e-5, max_value=1.0))
def test_energy_on_test_function_profile(n, L):
    J = onofri_energy(n, bundle(n).c_crit, test_function_profile(BubbleSpec(n, L)))
    assert J == pytest.approx(bubble_energy_closed_form(n, L), abs=1e-10)
    assert J > sharp_constant_closed_form(n)


@pytest.mark.parametrize("n", [2, 3])
def test_concentration_limit_examples(n):
    lim = concentration_limit(n, [1e-1, 1e-2, 1e-3, 1e-4])
    assert lim.reliable
    assert abs(lim.extrapolated - sharp_constant_closed_form(n)) <= 1e-3
    for L, v in zip(lim.L, lim.values):
        assert v == pytest.approx(bubble_energy_closed_form(n, L), abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_concentration_limit_tail_and_order(n):
    lim = concentration_limit(n, [1e-1, 1e-2, 1e-3, 1e-4])
    tail = np.array(lim.values)[1:]
    assert np.all(np.diff(tail) < 0)
    gaps = np.array(lim.gaps)
    assert np.all(gaps > 0)
    orders = np.log10(gaps[:-1] / gaps[1:])
    assert np.all(orders >= n / (n - 1) - 0.2)
    assert np.all(orders <= n / (n - 1) + 0.5)


def test_concentration_limit_singleton_is_unreliable():
    lim = concentration_limit(2, [1.0])
    assert len(lim.values) == 1 and not lim.reliable


def test_concentration_limit_validation():
    with pytest.raises(DomainError):
        concentration_limit(2, [1e-2, 1e-1])
    with pytest.raises(DomainError):
        concentration_limit(2, [2.0, 1.0])
    with pytest.raises(DomainError):
        concentration_limit(2, [])


def test_extrapolation_recovers_known_limit():
    L = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    values = 3.0 + 2.0 * L**1.5 - 0.7 * L**3
    est, *_ = extrapolate_to_zero(L, values, 1.5)
    assert est == pytest.approx(3.0, abs=1e-6)
