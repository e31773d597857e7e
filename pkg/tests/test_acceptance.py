"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import json
import math
import time
import warnings

import numpy as np
import pytest

from contactspec.channels import boson_oracle_symbol, make_channel, rc_symbol
from contactspec.cli import main
from contactspec.epsilon_lab import (
    NLSPairState,
    RadialPotential,
    ScaledPotential,
    birman_schwinger_eigs,
    l1_norm,
    nls_pair_evolve,
    resonance_tune,
    scattering_length,
)
from contactspec.errors import PrecisionWarning
from contactspec.fourbody import TrialFunction, form_value, positivity_scan
from contactspec.spectra import (
    efimov_exponent_uncertainty,
    efimov_tower,
    geometric_ratio,
    rc_thresholds,
    thresholds,
    threshold_m_star_star,
)


class Gate:
    """Collects named checks and prints one verdict line for the criterion."""

    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.failures = []
        self.start = time.perf_counter()

    def check(self, ok, what):
        if not ok:
            self.failures.append(what)

    def finish(self):
        elapsed = time.perf_counter() - self.start
        self.check(elapsed < self.budget, f"runtime {elapsed:.1f}s over {self.budget}s")
        verdict = "PASS" if not self.failures else "FAIL"
        detail = "" if not self.failures else " | " + "; ".join(self.failures)
        print(f"\n[{verdict}] criterion {self.number}: {self.title} ({elapsed:.1f}s){detail}")
        assert not self.failures, "; ".join(self.failures)


def _cli_json(capsys, *argv):
    assert main(list(argv)) == 0
    return json.loads(capsys.readouterr().out)


def test_criterion_1_fermionic_efimov_threshold(capsys):
    g = Gate(1, "fermionic m* = 1/13.607 within 0.5%", 60)
    env = _cli_json(capsys, "thresholds", "--stat", "fermion", "--l", "1")
    m_star = env["results"]["m_star"]
    g.check(abs(m_star * 13.607 - 1) < 0.005, f"m* = 1/{1 / m_star:.4f}")
    with capsys.disabled():
        g.finish()


def test_criterion_2_fermionic_uniqueness_threshold(capsys):
    g = Gate(2, "fermionic m** = 1/8.62 within 2% with frozen t_adm", 60)
    env = _cli_json(capsys, "thresholds", "--stat", "fermion", "--l", "1")
    res = env["results"]
    g.check(abs(res["m_star_star"] * 8.62 - 1) < 0.02, f"m** = 1/{1 / res['m_star_star']:.4f}")
    g.check(res["t_adm"] is not None, "t_adm not reported")
    g.check(threshold_m_star_star(1, "fermion", t_adm=res["t_adm"]) == pytest.approx(res["m_star_star"], rel=1e-12),
            "reported t_adm does not reproduce m**")
    with capsys.disabled():
        g.finish()


def test_criterion_3_bosonic_calibration_oracle(capsys):
    g = Gate(3, "boson channel vs closed form, s0 and ratio", 30)
    cf = make_channel(1.0, 0, "boson", 2)
    s = np.linspace(0.0, 10.0, 201)
    dev = float(np.max(np.abs(cf(s) - boson_oracle_symbol(s))))
    g.check(dev < 1e-6, f"max deviation {dev:.2e}")
    s0, err = efimov_exponent_uncertainty(cf)
    g.check(abs(s0 - 1.00624) < 1e-4, f"s0 = {s0:.6f}")
    ratio = geometric_ratio(s0)
    g.check(abs(ratio - 515.0) < 0.5, f"ratio = {ratio:.3f}")
    with capsys.disabled():
        g.finish()


def test_criterion_4_relativistic_coulomb(capsys):
    g = Gate(4, "relativistic Coulomb closed form and C* = 2/pi", 10)
    C = 0.5
    s = np.linspace(0.0, 10.0, 101)
    exact = 1 - C * np.tanh(np.pi * s / 2) / np.where(s == 0, 1.0, s)
    exact[0] = 1 - C * np.pi / 2
    dev = float(np.max(np.abs(1 - C * rc_symbol(s) - exact)))
    g.check(dev < 1e-10, f"max deviation {dev:.2e}")
    c_star, _ = rc_thresholds(0)
    g.check(abs(c_star - 2 / math.pi) < 1e-8, f"C* = {c_star!r}")
    with capsys.disabled():
        g.finish()


def test_criterion_5_sign_claims(capsys):
    g = Gate(5, "equal-mass positivity, m**_l < 1, bosonic m*_0 > 1", 300)
    s = np.linspace(0.0, 20.0, 81)
    for l in (1, 3, 5, 7):
        lo = float(np.min(make_channel(1.0, l, "fermion")(s)))
        g.check(lo > 0, f"fermion m=1 l={l} min Lambda {lo:.3g}")
    for l in (1, 3, 5):
        mss = thresholds(l, "fermion").m_star_star
        g.check(mss is not None and mss < 1, f"m**_{l} = {mss}")
    rep = thresholds(0, "boson")
    bound = rep.m_star if rep.m_star is not None else rep.diagnostics.get("m_star_lower_bound")
    g.check(bound is not None and bound > 1, f"bosonic m*_0 bound {bound}")
    with capsys.disabled():
        g.finish()


def test_criterion_6_efimov_thomas_tower(capsys):
    g = Gate(6, "tower ratios within 5% of exp(-2 pi/s0), both directions", 60)
    s0 = efimov_exponent_uncertainty(make_channel(1.0, 0, "boson", 2))[0]
    expected = math.exp(-2 * math.pi / s0)
    for r0, R, direction in ((1.0, 1e6, "zero"), (1e-6, 1.0, "minus_infinity")):
        res = efimov_tower(s0, r0, R)
        qs = res.last_ratios(direction)
        g.check(len(qs) == 3, f"{direction}: only {len(qs)} pairs resolved")
        for q in qs:
            g.check(abs(q / expected - 1) < 0.05, f"{direction}: ratio {q:.5g} vs {expected:.5g}")
    with capsys.disabled():
        g.finish()


def test_criterion_7_fourbody_positivity(capsys):
    g = Gate(7, "four-body positivity scan, C1 = C2, bosonic C3 < 0", 600)
    rep = positivity_scan(n_samples=10**6, seed=0)
    g.check(rep.passed, f"minimum {rep.minimum:.4g} ({rep.minimum_sigma:.3g} sigma)")
    g.check(not rep.inconclusive, f"inconclusive trials {rep.inconclusive}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        for phi in (TrialFunction("gaussian", 1.0, 2.0, 0.5, 1, 1), TrialFunction("gaussian_times_odd", 0.5, 2.0, 0.4, -1, 1)):
            c1 = form_value("C1", phi, 10**6, seed=1)
            c2 = form_value("C2", phi, 10**6, seed=1)
            g.check(c1.agrees_with(c2), f"C1 {c1.value:.4g} vs C2 {c2.value:.4g}")
    c3 = form_value("C3", TrialFunction("gaussian", 1.0, 1.0, 0.0, 1, 1), 10**6, seed=1)
    g.check(c3.value + 3 * c3.std_error < 0, f"bosonic C3 {c3.value:.4g} +- {c3.std_error:.2g}")
    with capsys.disabled():
        print(f"\n  minimum quotient {rep.minimum:.4f}, {rep.minimum_sigma:.0f} sigma above zero")
        g.finish()


def test_criterion_8_epsilon_lab_identities(capsys):
    g = Gate(8, "point scaling, resonance depth, BS at resonance, L1 invariance", 60)
    V = RadialPotential("gaussian", 1.7)
    a = scattering_length(V)
    for eps in (1.0, 0.5, 0.25):
        d = abs(scattering_length(ScaledPotential(V, eps, "point_2")) - eps * a)
        g.check(d < 1e-8, f"point_2 eps={eps}: deviation {d:.2e}")
    depth = resonance_tune("square_well")
    g.check(abs(depth - math.pi**2 / 4) < 1e-6, f"resonance depth {depth!r}")
    bs = birman_schwinger_eigs(RadialPotential("square_well", math.pi**2 / 4), 1e-6)[0]
    g.check(abs(bs - 1) < 1e-3, f"BS eigenvalue {bs!r}")
    for profile in ("square_well", "gaussian", "exponential"):
        W = RadialPotential(profile, 2.0, 1.3)
        for eps in (0.5, 0.1, 0.01):
            d = abs(l1_norm(ScaledPotential(W, eps, "contact_3")) / l1_norm(W) - 1)
            g.check(d < 1e-10, f"L1 {profile} eps={eps}: {d:.2e}")
    with capsys.disabled():
        g.finish()


def test_criterion_9_nls_pair(capsys):
    g = Gate(9, "NLS norm drift, pair symmetry, free dispersion", 30)
    s = NLSPairState.gaussian(1.0, c=1.0, n_grid=200)
    n0 = np.array(s.norms())
    sym = 0.0
    for _ in range(10):
        s = nls_pair_evolve(s, 4e-4, 100)
        sym = max(sym, float(np.max(np.abs(s.phi1 - s.phi2))))
    drift = float(np.max(np.abs(np.array(s.norms()) / n0 - 1)))
    g.check(drift < 1e-8, f"norm drift {drift:.2e}")
    g.check(sym < 1e-12, f"symmetry {sym:.2e}")
    free = nls_pair_evolve(NLSPairState.gaussian(1.0, c=0.0, n_grid=200, extent=30.0), 1e-3, 1000)
    expected = 1.5 * (1 + 4 * 1.0**2)
    dev = abs(free.second_moments()[0] / expected - 1)
    g.check(dev < 1e-6, f"free dispersion relative deviation {dev:.2e}")
    with capsys.disabled():
        g.finish()
