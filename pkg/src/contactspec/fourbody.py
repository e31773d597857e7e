"""Quadratic forms of the 2+2 contact system.

Two pairs of identical particles of mass 1, with contact interactions
between particles of different pairs.  After the Krein map the charge
density ``phi(k, s)`` lives on two relative momenta and the quadratic form
splits into a kinetic part ``C0`` minus three exchange forms:

* ``C1`` and ``C2`` are the three-body forms of one interacting triple with
  the fourth particle as a spectator;
* ``C3`` couples the barycenters of the two pairs and exists only in the
  four-particle sector.

The forms are 6- and 9-dimensional integrals.  They are estimated by
importance sampling with a counter-based generator, so a fixed seed gives
bit-identical numbers regardless of how the blocks are scheduled.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channels import DEFAULT_QUADRATURE, ChannelFunction, Statistics, make_channel
from .errors import InvalidArgument, PrecisionWarning

__all__ = [
    "TrialKind",
    "TrialFunction",
    "FormEstimate",
    "PositivityReport",
    "c1_denominator",
    "c3_denominator",
    "kinetic_term",
    "form_value",
    "rayleigh_quotient",
    "default_trial_grid",
    "positivity_scan",
    "quadrimer_channel",
]

BLOCK = 1 << 15
# proposal width relative to the narrowest direction of phi^2
PROPOSAL_THETA = 0.6
PRECISION_LIMIT = 0.1
# below this the delta-method error bar itself is unreliable
MIN_SAMPLES = 10**4


class TrialKind(str, Enum):
    GAUSSIAN = "gaussian"
    GAUSSIAN_TIMES_ODD = "gaussian_times_odd"


def _vec3(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise InvalidArgument(f"expected 3-vectors, got shape {x.shape}")
    return x


def _dot(x, y):
    return np.einsum("...i,...i->...", x, y)


def c1_denominator(k, s, w):
    """``k^2 + s^2 + w^2 + k.s + k.w + s.w``; positive off the origin.

    Raises
    ------
    InvalidArgument
        If the three vectors all vanish.
    """
    k, s, w = _vec3(k), _vec3(s), _vec3(w)
    d = _dot(k, k) + _dot(s, s) + _dot(w, w) + _dot(k, s) + _dot(k, w) + _dot(s, w)
    if np.any(d <= 0):
        raise InvalidArgument("c1_denominator is singular at k = s = w = 0")
    return d


def c3_denominator(k, s, w):
    """``w^2 + 3/4 (k^2 + s^2) + 1/2 k.s``; positive off the origin."""
    k, s, w = _vec3(k), _vec3(s), _vec3(w)
    d = _dot(w, w) + 0.75 * (_dot(k, k) + _dot(s, s)) + 0.5 * _dot(k, s)
    if np.any(d <= 0):
        raise InvalidArgument("c3_denominator is singular at k = s = w = 0")
    return d


def kinetic_term(k, s):
    """Diagonal multiplier ``2 pi^2 sqrt(3/4 (k^2 + s^2) + 1/2 k.s)`` of ``C0``."""
    k, s = _vec3(k), _vec3(s)
    return 2.0 * math.pi**2 * np.sqrt(0.75 * (_dot(k, k) + _dot(s, s)) + 0.5 * _dot(k, s))


@dataclass(frozen=True)
class TrialFunction:
    """Symmetrized Gaussian trial density ``phi(k, s)``.

    The seed ``exp(-(a k^2 + b s^2 + 2 gamma k.s) / 2)``, times ``k_z s_z`` for
    the odd kind, is projected onto the representation fixed by two signs:
    ``exchange`` under ``k -> -k`` and ``s -> -s`` separately (particle
    interchange within a pair; -1 for fermions) and ``swap`` under
    ``phi(k, s) -> phi(s, k)`` (interchange of the two pairs).
    """

    kind: TrialKind
    a: float
    b: float
    gamma: float = 0.0
    exchange: int = -1
    swap: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", TrialKind(self.kind))
        if not (self.a > 0 and self.b > 0):
            raise InvalidArgument("widths a and b must be positive")
        if not abs(self.gamma) < math.sqrt(self.a * self.b):
            raise InvalidArgument("need |gamma| < sqrt(a b) for integrability")
        if self.exchange not in (1, -1) or self.swap not in (1, -1):
            raise InvalidArgument("symmetry tags must be +1 or -1")
        if self.kind is TrialKind.GAUSSIAN and self.exchange == -1 and self.gamma == 0:
            raise InvalidArgument("an even Gaussian with gamma = 0 has no exchange-odd part")
        if self.a == self.b and self.swap == -1:
            raise InvalidArgument("equal widths leave no part odd under interchange of the pairs")
        if self.kind is TrialKind.GAUSSIAN_TIMES_ODD and self.exchange == 1 and self.gamma == 0:
            raise InvalidArgument("k_z s_z times a Gaussian with gamma = 0 has no exchange-even part")

    @property
    def statistics(self):
        return Statistics.FERMION if self.exchange == -1 else Statistics.BOSON

    @property
    def min_width(self):
        """Smallest eigenvalue of the Gaussian's quadratic form."""
        half = 0.5 * (self.a - self.b)
        return 0.5 * (self.a + self.b) - math.hypot(half, self.gamma)

    def mirrored(self):
        """The trial with the two pairs interchanged."""
        return TrialFunction(self.kind, self.b, self.a, self.gamma, self.exchange, self.swap)

    def _seed(self, k, s):
        g = np.exp(-0.5 * (self.a * _dot(k, k) + self.b * _dot(s, s) + 2.0 * self.gamma * _dot(k, s)))
        if self.kind is TrialKind.GAUSSIAN_TIMES_ODD:
            g = g * k[..., 2] * s[..., 2]
        return g

    def __call__(self, k, s):
        k, s = _vec3(k), _vec3(s)
        out = 0.0
        for sk in (1, -1):
            for ss in (1, -1):
                sign = (self.exchange if sk < 0 else 1) * (self.exchange if ss < 0 else 1)
                out = out + sign * (self._seed(sk * k, ss * s) + self.swap * self._seed(ss * s, sk * k))
        return out / 8.0


@dataclass(frozen=True)
class FormEstimate:
    """Monte-Carlo estimate of a form divided by ``||phi||^2``."""

    value: float
    std_error: float
    n_samples: int
    seed: int
    imprecise: bool = False

    def agrees_with(self, other, n_sigma=3.0):
        return abs(self.value - other.value) <= n_sigma * math.hypot(self.std_error, other.std_error)


_FORMS = ("C0", "C1", "C2", "C3")


def _generator(seed, stream, block):
    key = (int(seed) & (2**64 - 1)) | (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, block, 0]))


def _proposal_sigma(phi):
    return math.sqrt(1.0 / (2.0 * PROPOSAL_THETA * phi.min_width))


def _block_sums(phi, forms, seed, stream, block, size):
    """Per-block sums of the integrands and of their products with the norm."""
    sigma = _proposal_sigma(phi)
    x = _generator(seed, stream, block).standard_normal((size, 9)) * sigma
    k, s, w = x[:, 0:3], x[:, 3:6], x[:, 6:9]
    r2 = np.einsum("ij,ij->i", x, x)
    r2_ks = r2 - _dot(w, w)
    norm6 = (2.0 * math.pi * sigma**2) ** 3
    # 1 / q for the 6- and 9-dimensional Gaussian proposals
    inv_q6 = norm6 * np.exp(0.5 * r2_ks / sigma**2)
    inv_q9 = norm6 * (2.0 * math.pi * sigma**2) ** 1.5 * np.exp(0.5 * r2 / sigma**2)
    phi_ks = phi(k, s)
    cols = [phi_ks**2 * inv_q6]
    for form in forms:
        if form == "C0":
            y = kinetic_term(k, s) * phi_ks**2 * inv_q6
        elif form in ("C1", "C2"):
            f = phi if form == "C1" else phi.mirrored()
            fks = phi_ks if form == "C1" else f(k, s)
            y = f(k, w) * (f(s, w) + fks) / c1_denominator(k, s, w) * inv_q9
        else:
            p = 0.5 * (k + s)
            y = -phi_ks * phi(w - p, -w - p) / c3_denominator(k, s, w) * inv_q9
        cols.append(y)
    cols = np.stack(cols)
    return cols.sum(axis=1), cols @ cols.T


def _accumulate(phi, forms, n_samples, seed, stream, workers):
    if n_samples < 2:
        raise InvalidArgument("need at least two samples")
    sizes = [BLOCK] * (n_samples // BLOCK)
    if n_samples % BLOCK:
        sizes.append(n_samples % BLOCK)

    def run(i):
        return _block_sums(phi, forms, seed, stream, i, sizes[i])

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    # merge in block order so the result does not depend on the scheduling
    total = parts[0][0].copy()
    cross = parts[0][1].copy()
    for s1, s2 in parts[1:]:
        total += s1
        cross += s2
    mean = total / n_samples
    cov = (cross / n_samples - np.outer(mean, mean)) * n_samples / (n_samples - 1)
    return mean, cov


def _ratio(mean, cov, weights, n_samples):
    """``(w . mean[1:]) / mean[0]`` and its delta-method standard error."""
    g = np.concatenate([[0.0], weights])
    num = g @ mean
    r = num / mean[0]
    grad = (g - r * np.eye(len(mean))[0]) / mean[0]
    return r, math.sqrt(max(grad @ cov @ grad, 0.0) / n_samples)


def _check(estimate, label):
    rel = estimate.std_error / abs(estimate.value) if estimate.value else math.inf
    if rel > PRECISION_LIMIT:
        warnings.warn(f"{label}: relative standard error {rel:.2g}", PrecisionWarning, stacklevel=3)
        return FormEstimate(estimate.value, estimate.std_error, estimate.n_samples, estimate.seed, True)
    return estimate


def form_value(form, phi: TrialFunction, n_samples=10**6, seed=0, stream=None, workers=1):
    """Importance-sampled ``(phi, C phi) / (phi, phi)`` for one form.

    ``form`` is one of ``"C0"``, ``"C1"``, ``"C2"`` (``C1`` of the mirrored
    trial) and ``"C3"`` (with the overall minus sign of its definition
    included).  Each form draws from its own stream unless ``stream`` is
    given, so the ``C1``/``C2`` comparison uses independent samples.

    A relative standard error above 10% emits a ``PrecisionWarning`` and
    sets ``imprecise`` on the result.
    """
    if form not in _FORMS:
        raise InvalidArgument(f"unknown form {form!r}; expected one of {_FORMS}")
    if stream is None:
        stream = _FORMS.index(form) + 1
    mean, cov = _accumulate(phi, (form,), n_samples, seed, stream, workers)
    value, err = _ratio(mean, cov, np.array([1.0]), n_samples)
    return _check(FormEstimate(float(value), float(err), n_samples, seed), form)


def rayleigh_quotient(phi: TrialFunction, n_samples=10**6, seed=0, workers=1):
    """``(C0 - C1 - C2 - C3)`` over ``||phi||^2`` from one shared sample set.

    Sharing the samples correlates the four estimates, which cancels most of
    the variance of the normalization.
    """
    mean, cov = _accumulate(phi, _FORMS, n_samples, seed, 0, workers)
    value, err = _ratio(mean, cov, np.array([1.0, -1.0, -1.0, -1.0]), n_samples)
    return _check(FormEstimate(float(value), float(err), n_samples, seed), "quotient")


def default_trial_grid():
    """Twenty fermionic trials: ten width pairs per pair-swap parity, two skews each.

    Equal widths are used only for the swap-even sector, where the
    swap-odd projection would vanish identically.
    """
    even = ((0.5, 0.5), (1.0, 1.0), (2.0, 2.0), (0.5, 2.0), (1.0, 3.0))
    odd = ((0.5, 1.0), (0.5, 2.0), (1.0, 2.0), (1.0, 3.0), (0.25, 1.0))
    grid = []
    for swap, pairs in ((1, even), (-1, odd)):
        for a, b in pairs:
            for gamma in (0.0, 0.4 * math.sqrt(a * b)):
                grid.append(TrialFunction(TrialKind.GAUSSIAN_TIMES_ODD, a, b, gamma, -1, swap))
    return grid


@dataclass(frozen=True)
class PositivityReport:
    trials: tuple
    quotients: tuple
    minimum: float
    minimum_sigma: float
    passed: bool
    inconclusive: tuple = ()

    def as_dict(self):
        return {
            "passed": self.passed,
            "minimum": self.minimum,
            "minimum_sigma": self.minimum_sigma,
            "inconclusive": list(self.inconclusive),
            "trials": [
                {
                    "kind": t.kind.value, "a": t.a, "b": t.b, "gamma": t.gamma,
                    "exchange": t.exchange, "swap": t.swap,
                    "quotient": q.value, "std_error": q.std_error,
                }
                for t, q in zip(self.trials, self.quotients)
            ],
        }


def positivity_scan(trial_grid=None, n_samples=10**6, seed=0, statistics=Statistics.FERMION, workers=1):
    """Minimum Rayleigh quotient of the fermionic 2+2 form over a trial family.

    Passes when every quotient is at least ``-3`` standard errors.  Trials
    whose estimate is imprecise, or every trial when ``n_samples`` is below
    ``MIN_SAMPLES``, are listed as inconclusive.

    Raises
    ------
    InvalidArgument
        For non-fermionic statistics or a trial without the fermionic
        exchange parity.
    """
    if Statistics(statistics) is not Statistics.FERMION:
        raise InvalidArgument("positivity is asserted only for fermionic pairs")
    trials = tuple(default_trial_grid() if trial_grid is None else trial_grid)
    if not trials:
        raise InvalidArgument("empty trial grid")
    bad = [i for i, t in enumerate(trials) if t.statistics is not Statistics.FERMION]
    if bad:
        raise InvalidArgument(f"trials {bad} are not odd under exchange within a pair")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PrecisionWarning)
        quotients = tuple(rayleigh_quotient(t, n_samples, seed, workers) for t in trials)
    i = int(np.argmin([q.value for q in quotients]))
    worst = quotients[i]
    passed = all(q.value >= -3.0 * q.std_error for q in quotients)
    inconclusive = tuple(j for j, q in enumerate(quotients) if q.imprecise or n_samples < MIN_SAMPLES)
    return PositivityReport(trials, quotients, worst.value, worst.value / worst.std_error, passed, inconclusive)


def quadrimer_channel(m_eff=1.0, quadrature=DEFAULT_QUADRATURE) -> ChannelFunction:
    """Bosonic barycenter channel (l = 0, one pair) with third mass ``m_eff``.

    Its Efimov exponent, if any, sets the geometric ratio of the quadrimer
    tower.
    """
    if not m_eff > 0:
        raise InvalidArgument(f"m_eff must be positive, got {m_eff}")
    return make_channel(m_eff, 0, Statistics.BOSON, 1, quadrature)
