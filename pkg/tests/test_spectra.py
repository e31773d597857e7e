import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from contactspec.channels import make_channel
from contactspec.errors import InvalidArgument, ResolutionFailure, SearchFailure
from contactspec.spectra import (
    T_ADM_DEFAULT,
    T_ADM_FROZEN,
    UNIQUENESS_TARGET,
    calibrate_t_adm,
    efimov_exponent,
    efimov_exponent_uncertainty,
    efimov_tower,
    geometric_ratio,
    model_operator_levels,
    rc_thresholds,
    threshold_m_star,
    threshold_m_star_star,
    thresholds,
)

# roots of the independent angular-integral oracle
M_STAR_F1 = 1 / 13.606965697899
M_STAR_F3 = 1 / 75.99449434089
M_STAR_F5 = 1 / 187.95835508640


def test_fermion_m_star_against_oracle():
    m = threshold_m_star(1, "fermion")
    assert m == pytest.approx(M_STAR_F1, rel=1e-9)
    assert m == pytest.approx(oracles.mass_root(lambda x: oracles.channel(0.0, x, 1, "fermion")), rel=1e-9)
    assert abs(make_channel(m, 1, "fermion")(0.0)) < 1e-8


def test_higher_sectors_destabilize_later():
    m3 = threshold_m_star(3, "fermion")
    m5 = threshold_m_star(5, "fermion")
    assert m3 == pytest.approx(M_STAR_F3, rel=1e-8)
    assert m5 == pytest.approx(M_STAR_F5, rel=1e-8)
    assert m5 < m3 < M_STAR_F1


def test_boson_m_star_beyond_window():
    with pytest.raises(SearchFailure) as info:
        threshold_m_star(0, "boson")
    assert info.value.sign == -1 and info.value.hi >= 1e3
    # Lambda_0(0; m) = 1 - 2 phi / sin(2 phi) < 0 for every mass
    for m in (1e-3, 1.0, 1e3):
        phi = math.asin(1 / (1 + m))
        assert make_channel(m, 0, "boson")(0.0) == pytest.approx(1 - 2 * phi / math.sin(2 * phi), rel=1e-9)


def test_uniqueness_edge_calibrated():
    m = threshold_m_star_star(1, "fermion")
    assert m == pytest.approx(UNIQUENESS_TARGET, rel=1e-9)
    oracle = oracles.mass_root(lambda x: oracles.channel_imag(T_ADM_FROZEN, x, 1, "fermion"))
    assert m == pytest.approx(oracle, rel=1e-9)


def test_default_t_adm_misses_target():
    m = threshold_m_star_star(1, "fermion", t_adm=T_ADM_DEFAULT)
    assert abs(m / UNIQUENESS_TARGET - 1) > 0.02


def test_calibrate_t_adm_reproduces_frozen_value():
    assert calibrate_t_adm() == pytest.approx(T_ADM_FROZEN, abs=1e-10)


@pytest.mark.parametrize("l", [1, 3, 5])
def test_threshold_ordering_and_upper_bound(l):
    rep = thresholds(l, "fermion")
    assert rep.m_star < rep.m_star_star < 1
    assert rep.diagnostics["m_star_residual"] < 1e-6
    assert rep.diagnostics["m_star_star_residual"] < 1e-6


@given(st.floats(0.05, 0.95))
def test_m_star_star_above_m_star_for_any_t(t):
    assert threshold_m_star_star(1, "fermion", t_adm=t) > M_STAR_F1


def test_t_adm_validation():
    with pytest.raises(InvalidArgument):
        threshold_m_star_star(1, "fermion", t_adm=2.5)


def test_boson_report_records_bound():
    rep = thresholds(0, "boson")
    assert rep.m_star is None
    assert rep.diagnostics["m_star_lower_bound"] >= 1e3 > 1


def test_rc_thresholds():
    c_star, c_star_star = rc_thresholds(0)
    assert c_star == pytest.approx(2 / math.pi, abs=1e-8)
    assert c_star_star == pytest.approx(0.5, abs=1e-8)
    t = 0.3
    assert rc_thresholds(0, t)[1] == pytest.approx(t / math.tan(math.pi * t / 2), abs=1e-8)
    assert rc_thresholds(1)[0] > c_star
    assert rc_thresholds(1)[0] == pytest.approx(math.pi / 2, abs=1e-8)


def test_efimov_exponent_three_bosons():
    cf = make_channel(1.0, 0, "boson", 2)
    s0 = efimov_exponent(cf)
    assert s0 == pytest.approx(1.00624, abs=1e-4)
    assert oracles.three_boson(s0) == pytest.approx(0.0, abs=1e-9)
    assert geometric_ratio(s0) == pytest.approx(515.0, abs=0.5)


def test_efimov_exponent_absent_for_equal_mass_fermions():
    assert efimov_exponent(make_channel(1.0, 1, "fermion")) is None


def test_efimov_exponent_single_pair_bosons():
    s0, err = efimov_exponent_uncertainty(make_channel(1.0, 0, "boson", 1))
    assert 0 < s0 < 1 and err < 1e-8
    # brute-force scan of the oracle brackets the same root
    grid = np.linspace(0.01, 1.0, 991)
    vals = np.array([oracles.channel(s, 1.0, 0, "boson") for s in grid])
    i = np.nonzero(vals > 0)[0][0]
    assert grid[i - 1] <= s0 <= grid[i]


@given(st.floats(0.02, 3.0))
def test_efimov_present_iff_negative_at_zero(m):
    cf = make_channel(m, 1, "fermion")
    assert (efimov_exponent(cf) is not None) == (cf(0.0) < 0)


def test_geometric_ratio():
    assert geometric_ratio(1.00624) == pytest.approx(515.03, abs=0.5)
    assert geometric_ratio(2 * math.pi) == pytest.approx(math.e, rel=1e-15)
    assert geometric_ratio(1e9) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(InvalidArgument):
        geometric_ratio(0.0)


def test_free_dirichlet_ground_state():
    assert model_operator_levels(0.0, 0.0, 1.0, 2000, grid="uniform", count=1)[0] == pytest.approx(
        math.pi**2, rel=5e-3)


@pytest.mark.parametrize("r0, R, direction", [(1.0, 1e6, "zero"), (1e-6, 1.0, "minus_infinity")])
def test_tower_ratios(r0, R, direction):
    s0 = 1.00624
    res = efimov_tower(s0, r0, R)
    expected = math.exp(-2 * math.pi / s0)
    assert all(e < 0 for e in res.tower) and list(res.tower) == sorted(res.tower)
    for q in res.last_ratios(direction):
        assert q == pytest.approx(expected, rel=0.05)


def test_tower_ratio_converges_under_refinement():
    s0 = 1.5
    ratios = {n: np.array(efimov_tower(s0, 1.0, 1e5, n_grid=n).ratios) for n in (1000, 2000, 4000, 8000)}
    assert np.max(np.abs(ratios[8000] - ratios[4000])) < np.max(np.abs(ratios[2000] - ratios[1000])) / 4
    expected = math.exp(-2 * math.pi / s0)
    assert np.all(np.abs(ratios[8000] / expected - 1) < 0.01)


def test_tower_large_exponent_ratio():
    res = efimov_tower(2 * math.pi, 1.0, 1e3, n_grid=2000)
    assert res.ratios[1] == pytest.approx(math.exp(-1), rel=0.05)


def test_tower_resolution_failure():
    with pytest.raises(ResolutionFailure, match="widen"):
        efimov_tower(1.00624, 1.0, 1e3)
    with pytest.raises(InvalidArgument):
        efimov_tower(1.0, 1.0, 1e6, n_grid=100)


def test_searches_are_deterministic():
    assert threshold_m_star(1, "fermion") == threshold_m_star(1, "fermion")
