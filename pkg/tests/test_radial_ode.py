"""Shooting solver against the explicit radial solution family.

Every radial solution of −Δ_n v = e^v is a rescaled bubble,
v(r) = η₀(r/ε) − n ln ε with ε = (β_n e^{−c})^{1/n}, so with
S = T/(1+T), T = ε^{−n/(n−1)} the boundary flux is ω m(1) = C_n S^{n−1}.
For n = 2 and c = ln(8δ) this is λ = 8δ/(1+δ)², mass 8πδ/(1+δ), u(0) = 2 ln(1+δ).
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onofri_lab import radial_ode
from onofri_lab.constants import bubble_value, bundle
from onofri_lab.errors import DomainError, InsufficientDataError, NumericalError
from onofri_lab.profile import RadialProfile
from onofri_lab.quadrature import composite_rule, geometric_edges
from onofri_lab.radial_ode import (
    branch_point,
    farfield_slope,
    log_slope,
    pohozaev_defect,
    pohozaev_residual,
    pohozaev_sides,
    rescale_to_bubble,
    scan_branch,
    shoot,
)

PI = math.pi


def family_n2(delta):
    return 8 * delta / (1 + delta) ** 2, 8 * PI * delta / (1 + delta), 2 * math.log1p(delta)


def family_mass(n, peak):
    c = bundle(n)
    log_eps = (math.log(c.beta) - peak) / n
    t = math.exp(-n / (n - 1) * log_eps)
    s = t / (1 + t)
    return c.c_crit * s ** (n - 1)


def test_shoot_n2_delta1():
    v = shoot(2, math.log(8.0))
    assert v.values[-1] == pytest.approx(math.log(2.0), abs=1e-9)
    assert v.derivs[-1] == pytest.approx(-2.0, abs=1e-9)
    assert v.values[0] == math.log(8.0) and v.derivs[0] == 0.0


def test_shoot_n2_delta4():
    v = shoot(2, math.log(32.0))
    assert v.values[-1] == pytest.approx(math.log(32 / 25), abs=1e-9)


def test_shoot_profile_matches_closed_form_everywhere():
    v = shoot(2, math.log(8 * 3.0))
    exact = np.log(24.0 / (1 + 3.0 * v.nodes**2) ** 2)
    assert np.max(np.abs(v.values - exact)) <= 1e-9


@pytest.mark.parametrize("n", [2, 3, 5])
def test_shoot_linear_regime(n):
    peak = -30.0
    v = shoot(n, peak)
    drop = (n - 1) / n * (math.exp(peak) / n) ** (1 / (n - 1))
    # next series term is relatively O(drop); |v| = 30 costs ~4e-15 absolute
    assert v.values[-1] - peak == pytest.approx(-drop, rel=2 * drop, abs=1e-14)
    assert np.max(np.abs(v.values - peak)) <= drop * (1 + 2 * drop) + 1e-14
    assert v._meta["flux"][-1] == pytest.approx(math.exp(peak) / n, rel=1e-9)


def test_shoot_relative_values_keep_precision():
    rel = shoot(3, -40.0, absolute=False)
    assert rel.values[0] == 0.0
    assert rel.values[-1] < 0


def test_shoot_validation():
    with pytest.raises(DomainError):
        shoot(2, math.inf)
    with pytest.raises(DomainError):
        shoot(2, 0.0, ode_tol=0.0)
    with pytest.raises(DomainError):
        shoot(2, 0.0, r_end=-1.0)
    with pytest.raises(DomainError):
        shoot(1, 0.0)


def test_branch_point_n2_delta1():
    p = branch_point(2, math.log(8.0))
    assert p.lam == pytest.approx(2.0, rel=1e-9)
    assert p.mass == pytest.approx(4 * PI, rel=1e-9)
    assert p.peak_u == pytest.approx(2 * math.log(2), rel=1e-9)
    assert p.profile.values[-1] == 0.0


def test_branch_point_n3_linear_regime():
    p = branch_point(3, -20.0)
    assert p.mass == pytest.approx(4 * PI * math.exp(-20) / 3, rel=1e-6)
    assert p.lam == pytest.approx(math.exp(-20), rel=1e-6)


@given(st.floats(min_value=-3.0, max_value=6.0))
def test_branch_n2_matches_family(log10_delta):
    delta = 10.0**log10_delta
    lam, mass, peak_u = family_n2(delta)
    p = branch_point(2, math.log(8 * delta))
    assert p.lam == pytest.approx(lam, rel=1e-6)
    assert p.mass == pytest.approx(mass, rel=1e-6)
    assert p.peak_u == pytest.approx(peak_u, rel=1e-6)


@given(st.integers(min_value=2, max_value=6), st.floats(min_value=-10.0, max_value=40.0))
def test_branch_mass_matches_rescaled_bubble(n, peak):
    p = branch_point(n, peak)
    assert p.mass == pytest.approx(family_mass(n, peak), rel=1e-8)


@given(st.integers(min_value=2, max_value=6), st.floats(min_value=-20.0, max_value=60.0))
def test_branch_point_invariants(n, peak):
    p = branch_point(n, peak)
    c_n = bundle(n).c_crit
    assert 0 < p.mass < c_n or p.mass == pytest.approx(c_n, rel=1e-9)
    assert p.lam > 0 and p.peak_u >= 0
    assert p.profile.values[-1] == 0.0
    assert p.profile.is_nonincreasing(tol=1e-12)
    assert p.pohozaev_residual <= 1e-6
    # λ ∫ e^u = ω ∫ r^{n−1} e^v
    log_mass = math.log(p.lam) + p.profile.log_integrate_exp(p.profile.values, n)
    assert math.exp(log_mass) == pytest.approx(p.mass, rel=1e-8)


def test_pohozaev_sides_n2_delta1():
    p = branch_point(2, math.log(8.0))
    lhs, rhs = pohozaev_sides(2, p.lam, p.profile)
    assert lhs == pytest.approx(8 * PI, rel=1e-9)
    assert rhs == pytest.approx(8 * PI, rel=1e-9)
    assert pohozaev_residual(p) <= 1e-9


def test_pohozaev_zero_profile():
    nodes, weights = composite_rule(np.linspace(0, 1, 9), 4)
    nodes = np.concatenate([[0.0], nodes, [1.0]])
    weights = np.concatenate([[0.0], weights, [0.0]])
    zero = RadialProfile(nodes, np.zeros_like(nodes), np.zeros_like(nodes), weights, 1.0)
    assert pohozaev_defect(3, 1.0, zero) == 0.0


def test_pohozaev_n3_peak10():
    assert branch_point(3, 10.0).pohozaev_residual <= 1e-6


def test_huge_peaks_do_not_overflow():
    p = branch_point(2, 800.0)
    assert math.isfinite(p.log_lam) and p.pohozaev_residual <= 1e-6
    assert p.mass == pytest.approx(8 * PI, rel=1e-9)


def test_scan_branch_n2_quantization():
    deltas = [10.0**k for k in range(7)]
    br = scan_branch(2, [math.log(8 * d) for d in deltas])
    assert not br.failures
    for p, d in zip(br.points, deltas):
        assert p.mass == pytest.approx(8 * PI * d / (1 + d), rel=1e-6)
    assert br.mass_is_increasing()
    assert br.masses[-1] < 8 * PI and br.masses[-1] == pytest.approx(8 * PI, rel=1e-5)


def test_scan_branch_n3_below_critical_mass():
    br = scan_branch(3, [30.0, 0.0, 20.0, 5.0, 10.0])
    assert list(br.peaks) == [0.0, 5.0, 10.0, 20.0, 30.0]
    assert np.all(br.masses < 81 * PI)
    assert br.masses[-1] > 0.99 * 81 * PI


def test_scan_branch_single_point():
    assert len(scan_branch(2, [1.0]).points) == 1


def test_scan_branch_records_failures(monkeypatch):
    real = radial_ode.branch_point

    def flaky(n, peak, ode_tol):
        if peak == 2.0:
            raise NumericalError("synthetic failure")
        return real(n, peak, ode_tol)

    monkeypatch.setattr(radial_ode, "branch_point", flaky)
    br = scan_branch(2, [1.0, 2.0, 3.0])
    assert [p.peak_v for p in br.points] == [1.0, 3.0]
    assert br.failures == [(2.0, "NumericalError: synthetic failure")]


def test_scan_branch_parallel_is_deterministic():
    peaks = [0.5 * k for k in range(12)]
    serial = scan_branch(3, peaks, workers=1)
    parallel = scan_branch(3, peaks, workers=4)
    assert np.array_equal(serial.masses, parallel.masses)


def test_scan_branch_validation():
    with pytest.raises(DomainError):
        scan_branch(2, [])
    with pytest.raises(DomainError):
        scan_branch(2, [math.nan])


def test_rescaling_n2_is_exact_bubble():
    # for the n = 2 family ε = δ^{−1/2} and η coincides with η₀
    delta = 1e3
    res = rescale_to_bubble(branch_point(2, math.log(8 * delta)))
    assert res.in_blowup_regime
    assert res.epsilon == pytest.approx(delta**-0.5, rel=1e-8)
    assert res.sup_deviation <= 1e-6
    assert res.eta.domain_radius == 10.0


def test_rescaling_flags_delta1():
    res = rescale_to_bubble(branch_point(2, math.log(8.0)))
    assert res.epsilon == pytest.approx(1.0, rel=1e-8)
    assert not res.in_blowup_regime and res.note


def test_rescaling_general_n_tracks_bubble():
    res = rescale_to_bubble(branch_point(4, 40.0))
    assert res.in_blowup_regime and res.sup_deviation <= 1e-6


def _fit_exact_bubble(n, lo, hi, samples=64):
    r = np.geomspace(lo, hi, samples)
    eta = np.log(bundle(n).beta) - n * np.log1p(r ** (n / (n - 1)))
    return np.polyfit(-np.log(r), eta, 1)[0]


def test_farfield_slope_n2():
    delta = 1e4
    s = farfield_slope(branch_point(2, math.log(8 * delta)), (5.0, 50.0))
    assert 3.8 <= s <= 4.0
    assert s == pytest.approx(_fit_exact_bubble(2, 5.0, 50.0), rel=1e-6)


def test_farfield_slope_n3_near_critical_mass():
    p = branch_point(3, 20.0)
    assert p.mass > 0.99 * bundle(3).c_crit
    s = farfield_slope(p, (5.0, 30.0))
    assert abs(s / 4.5 - 1) <= 0.05


@pytest.mark.parametrize("n", [2, 3, 4])
def test_log_slope_of_exact_bubble(n):
    edges = geometric_edges(1e-3, 1e5, 1.3)
    nodes, weights = composite_rule(edges, 4)
    nodes = np.concatenate([[0.0], nodes, [1e5]])
    weights = np.concatenate([[0.0], weights, [0.0]])
    eta0 = RadialProfile(nodes, bubble_value(n, nodes), np.r_[0.0, np.gradient(bubble_value(n, nodes[1:]), nodes[1:])], weights, 1e5)
    assert log_slope(eta0, 1e3, 1e5) == pytest.approx(n * n / (n - 1), rel=1e-3)


def test_log_slope_needs_data():
    p = shoot(2, 0.0)
    with pytest.raises(InsufficientDataError):
        log_slope(p, 0.999999, 1.0)
    with pytest.raises(DomainError):
        log_slope(p, 0.5, 2.0)


def test_farfield_slope_rejects_non_blowup():
    with pytest.raises(DomainError):
        farfield_slope(branch_point(2, math.log(8.0)))
