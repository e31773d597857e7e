import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from contactspec.channels import (
    ChannelSpec,
    Statistics,
    RCChannel,
    boson_oracle_symbol,
    calibrate,
    kinetic_multiplier,
    make_channel,
    mellin_symbol,
    mellin_symbol_imag,
    pair_kernel,
    partial_wave_kernel,
    rc_channel_function,
    rc_symbol,
)
from contactspec.errors import CalibrationFailure, InvalidArgument, SingularEvaluation

FERMION_1 = ChannelSpec(1.0, 1, "fermion")
BOSON_0 = ChannelSpec(1.0, 0, "boson")


def test_spec_parity_rule():
    with pytest.raises(InvalidArgument, match="odd l"):
        ChannelSpec(1.0, 0, "fermion")
    with pytest.raises(InvalidArgument, match="even l"):
        ChannelSpec(1.0, 1, "boson")
    with pytest.raises(InvalidArgument):
        ChannelSpec(-1.0, 1, "fermion")
    with pytest.raises(InvalidArgument):
        ChannelSpec(1.0, 1, "fermion", 3)


def test_kinetic_multiplier_equal_masses():
    assert kinetic_multiplier(1.0) == pytest.approx(math.pi**2 * math.sqrt(3), rel=1e-15)


def test_pair_kernel_examples():
    assert pair_kernel(1.0, 1.0, 1.0, FERMION_1) == pytest.approx(-1 / 3, abs=1e-15)
    assert pair_kernel(0.7, 2.3, 0.0, FERMION_1) == 0.0
    assert pair_kernel(1.0, 1.0, 1.0, BOSON_0) == pytest.approx(-2 / 3, abs=1e-15)


def test_pair_kernel_singular():
    with pytest.raises(SingularEvaluation):
        pair_kernel(1.0, 1.0, 1.0, ChannelSpec(1e-300, 1, "fermion"))


def test_partial_wave_closed_form():
    r = 1.0
    ref = -(4 * math.pi / r) * math.atanh(r / (1 + r * r))
    assert partial_wave_kernel(1.0, 1.0, BOSON_0) == pytest.approx(ref, rel=1e-10)
    assert ref == pytest.approx(-6.9028, abs=1e-4)


def _unchecked_spec(m, l, stat):
    # bypasses the parity gate to look at the forbidden projections directly
    spec = object.__new__(ChannelSpec)
    for name, value in (("m", m), ("l", l), ("statistics", Statistics(stat)), ("multiplicity", 1)):
        object.__setattr__(spec, name, value)
    return spec


@given(st.floats(0.05, 20.0), st.floats(0.05, 20.0), st.floats(0.05, 20.0))
def test_partial_wave_parity_selection(p, q, m):
    for l, stat in ((0, "fermion"), (2, "fermion"), (1, "boson"), (3, "boson")):
        assert abs(partial_wave_kernel(p, q, _unchecked_spec(m, l, stat))) < 1e-14 * max(1.0, 1 / (p * q))


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0), st.sampled_from([0.1, 10.0]))
def test_partial_wave_homogeneity(p, q, lam):
    for spec in (FERMION_1, BOSON_0, ChannelSpec(0.3, 3, "fermion")):
        k = partial_wave_kernel(p, q, spec)
        assert partial_wave_kernel(lam * p, lam * q, spec) * lam**2 == pytest.approx(k, rel=1e-10, abs=1e-300)


def test_mellin_symbol_boson_s0():
    spec = ChannelSpec(1.0, 0, "boson", 1)
    assert mellin_symbol(0.0, spec) == pytest.approx(-(4 / math.sqrt(3)) * math.pi / 6, abs=1e-8)
    assert abs(mellin_symbol(10.0, spec)) < 1e-4


@given(st.floats(0.0, 8.0))
def test_mellin_symbol_even(s):
    for spec in (FERMION_1, BOSON_0, ChannelSpec(0.1, 3, "fermion")):
        assert mellin_symbol(s, spec) == pytest.approx(mellin_symbol(-s, spec), abs=1e-10)


def test_mellin_reality():
    # the sine transform vanishes by k_l(1, 1/r) = r^2 k_l(1, r)
    from contactspec.numerics import halfline_rule

    rule = halfline_rule(2, 40.0)
    u = rule.nodes
    k = np.array([partial_wave_kernel(1.0, math.exp(x), ChannelSpec(0.2, 1, "fermion")) for x in u])
    for s in (0.3, 1.0, 2.5):
        assert abs(np.sum(rule.weights * k * np.exp(u) * np.sin(s * u))) < 1e-10


@pytest.mark.parametrize("m, l, stat", [(1.0, 1, "fermion"), (0.05, 1, "fermion"), (0.2, 3, "fermion"),
                                        (1.0, 0, "boson"), (3.0, 2, "boson"), (0.01, 5, "fermion")])
def test_mellin_symbol_against_independent_oracle(m, l, stat):
    spec = ChannelSpec(m, l, stat)
    for s in (0.0, 0.4, 1.3, 4.0):
        assert mellin_symbol(s, spec) == pytest.approx(oracles.beta_hat(s, m, l, stat), abs=1e-10)
    for t in (0.3, 0.9):
        assert mellin_symbol_imag(t, spec) == pytest.approx(oracles.channel_imag(t, m, l, stat) - 1, abs=1e-10)


def test_mellin_symbol_imag_domain():
    with pytest.raises(InvalidArgument):
        mellin_symbol_imag(2.0, FERMION_1)


def test_boson_oracle_symbol():
    assert boson_oracle_symbol(0.0) == pytest.approx(1 - 4 * math.pi / (3 * math.sqrt(3)), abs=1e-15)
    assert boson_oracle_symbol(0.0) == pytest.approx(-1.4184, abs=1e-4)
    assert abs(boson_oracle_symbol(1.00624)) < 1e-4
    assert boson_oracle_symbol(10.0) == pytest.approx(1.0, abs=1e-4)
    assert boson_oracle_symbol(1e-9) == pytest.approx(boson_oracle_symbol(0.0), abs=1e-14)


def test_channel_matches_three_boson_oracle():
    cf = make_channel(1.0, 0, "boson", 2)
    s = np.linspace(0, 10, 101)
    assert np.max(np.abs(cf(s) - boson_oracle_symbol(s))) < 1e-6
    assert cf(0.0) == pytest.approx(-1.4184, abs=1e-4)


def test_equal_mass_fermion_positive():
    cf = make_channel(1.0, 1, "fermion")
    assert np.all(cf(np.linspace(0, 20, 81)) > 0)


def test_channel_even_and_real():
    cf = make_channel(0.1, 1, "fermion")
    s = np.linspace(0.1, 5, 9)
    assert np.allclose(cf(s), cf(-s), atol=1e-10)
    assert np.isrealobj(cf(s))


def test_calibration_gamma_is_one():
    assert calibrate() == pytest.approx(1.0, abs=1e-4)


def test_calibration_doubled_kernel_flagged():
    base = lambda s: mellin_symbol(s, ChannelSpec(1.0, 0, "boson", 2))
    with pytest.raises(CalibrationFailure):
        calibrate(symbol=lambda s: 2.0 * base(s))
    assert calibrate(symbol=lambda s: 2.0 * base(s), allow_out_of_range=True) == pytest.approx(0.5, abs=1e-4)


def test_calibration_s_dependent_spread_fails():
    base = lambda s: mellin_symbol(s, ChannelSpec(1.0, 0, "boson", 2))
    with pytest.raises(CalibrationFailure):
        calibrate(symbol=lambda s: base(s) * (1 + 0.01 * np.asarray(s)))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        calibrate(symbol=lambda s: base(s) * (1 + 2e-4 * np.asarray(s)))
    assert caught


def test_heavy_third_particle_decouples_where_it_should():
    # fermionic and higher bosonic sectors decouple; the bosonic s-wave does not
    for spec in (ChannelSpec(1e3, 1, "fermion"), ChannelSpec(1e3, 2, "boson")):
        assert abs(mellin_symbol(0.5, spec)) < 1e-2
    heavy = mellin_symbol(0.5, ChannelSpec(1e3, 0, "boson"))
    assert heavy == pytest.approx(-1 / math.cosh(math.pi * 0.25), rel=1e-2)


def test_rc_closed_form():
    for s in (0.0, 0.3, 1.0, 2.0, 6.0):
        assert rc_symbol(s) == pytest.approx(oracles.rc_symbol_l0(s), abs=1e-10)
    assert rc_channel_function(0.0, RCChannel(2 / math.pi)) == pytest.approx(0.0, abs=1e-10)
    assert rc_channel_function(1.0, RCChannel(0.5)) == pytest.approx(1 - 0.5 * math.tanh(math.pi / 2), abs=1e-10)
    assert rc_channel_function(1.0, RCChannel(0.5)) == pytest.approx(0.5414, abs=1e-4)


@given(st.floats(0.0, 10.0), st.integers(0, 4), st.floats(0.01, 3.0))
def test_rc_even(s, l, C):
    rc = RCChannel(C, l)
    assert rc(s) == pytest.approx(rc(-s), abs=1e-10)


def test_rc_validation():
    with pytest.raises(InvalidArgument):
        RCChannel(0.0)
