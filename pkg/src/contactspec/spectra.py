"""Thresholds, Efimov exponents and geometric towers.

``m*`` is where the channel function at ``s = 0`` changes sign: below it the
two real zeros of ``Lambda_l`` have collided and moved onto the imaginary
axis, and the channel carries an Efimov/Thomas tower with exponent ``s0``.
``m**`` is the analogous sign change of ``Lambda_l(i t_adm)``, the edge of
the window where the extension is not unique.

The towers themselves are realized by the inverse-square model operator
``-d^2/dx^2 - (s0^2 + 1/4)/x^2`` between two Dirichlet cutoffs.  With the
inner cutoff fixed and the outer one removed its levels accumulate at zero;
with the outer cutoff fixed and the inner one removed they run off to minus
infinity.  Either way consecutive levels have ratio ``exp(-2 pi / s0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    DEFAULT_QUADRATURE,
    ChannelFunction,
    Statistics,
    make_channel,
    rc_symbol,
    rc_symbol_imag,
)
from .errors import InvalidArgument, ResolutionFailure, SearchFailure
from .numerics import RootBracket, find_root, sturm_count, tridiagonal_eigenvalues

__all__ = [
    "T_ADM_DEFAULT",
    "T_ADM_FROZEN",
    "UNIQUENESS_TARGET",
    "ThresholdReport",
    "EfimovResult",
    "efimov_exponent",
    "efimov_exponent_uncertainty",
    "threshold_m_star",
    "threshold_m_star_star",
    "calibrate_t_adm",
    "thresholds",
    "rc_thresholds",
    "geometric_ratio",
    "model_operator_levels",
    "efimov_tower",
]

M_WINDOW = (1e-4, 1e3)

# admissibility exponent: 1/2 is the untuned default; it misses the fermionic
# l = 1 uniqueness edge m** = 1/8.62 by ~30%, so the exponent is calibrated
# against that value once (calibrate_t_adm) and frozen here
T_ADM_DEFAULT = 0.5
T_ADM_FROZEN = 0.9998486821471396
UNIQUENESS_TARGET = 1.0 / 8.62


def _log_scan_root(fn, lo, hi, points=60, tol=1e-13):
    """First sign change of ``fn`` on a log-spaced grid over ``[lo, hi]``, refined."""
    grid = np.geomspace(lo, hi, points)
    values = [fn(float(m)) for m in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if fa == 0:
            return float(a)
        if fa * fb < 0:
            g = lambda lm: fn(math.exp(lm))
            lm = find_root(RootBracket(math.log(a), math.log(b), fa, fb), g, tol)
            return math.exp(lm)
    signs = {int(np.sign(v)) for v in values}
    sign = signs.pop() if len(signs) == 1 else None
    raise SearchFailure(f"no sign change for m in [{lo:g}, {hi:g}]", lo=lo, hi=hi, sign=sign)


def threshold_m_star(l, statistics, multiplicity=1, quadrature=DEFAULT_QUADRATURE, window=M_WINDOW):
    """Efimov/Thomas onset: the mass ``m`` where ``Lambda_l(0; m) = 0``.

    Raises
    ------
    SearchFailure
        When ``Lambda_l(0; m)`` keeps one sign over the whole window.  The
        exception's ``sign`` says which: ``-1`` means the channel is
        unstable for every mass in the window, i.e. ``m* > window[1]``.
    """
    cf = make_channel(1.0, l, statistics, multiplicity, quadrature)
    return _log_scan_root(lambda m: cf.with_mass(m)(0.0), *window)


def threshold_m_star_star(l, statistics, multiplicity=1, t_adm=None, quadrature=DEFAULT_QUADRATURE,
                          window=M_WINDOW):
    """Uniqueness edge: the mass where ``Lambda_l(i t_adm; m) = 0``.

    ``t_adm`` defaults to the frozen calibrated exponent.
    """
    t = T_ADM_FROZEN if t_adm is None else float(t_adm)
    if not 0 < t < l + 1:
        raise InvalidArgument(f"t_adm must lie in (0, l + 1), got {t}")
    cf = make_channel(1.0, l, statistics, multiplicity, quadrature)
    return _log_scan_root(lambda m: cf.with_mass(m).at_imaginary(t), *window)


def calibrate_t_adm(target=UNIQUENESS_TARGET, tolerance=0.02, start=T_ADM_DEFAULT):
    """Admissibility exponent reproducing the fermionic l = 1 edge ``target``.

    Returns ``start`` unchanged if it already lands within ``tolerance``
    (relative); otherwise solves ``m**(t) = target`` for ``t`` in ``(0, 1]``.
    """
    m_start = threshold_m_star_star(1, Statistics.FERMION, 1, start)
    if abs(m_start / target - 1.0) <= tolerance:
        return start

    def f(t):
        return 1.0 / threshold_m_star_star(1, Statistics.FERMION, 1, t) - 1.0 / target

    return find_root(RootBracket.of(f, 0.05, 1.0), f, 1e-13)


@dataclass(frozen=True)
class ThresholdReport:
    l: int
    statistics: Statistics
    multiplicity: int
    m_star: float | None
    m_star_star: float | None
    t_adm: float
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "l": self.l,
            "statistics": self.statistics.value,
            "multiplicity": self.multiplicity,
            "m_star": self.m_star,
            "m_star_star": self.m_star_star,
            "t_adm": self.t_adm,
            "diagnostics": self.diagnostics,
        }


def thresholds(l, statistics, multiplicity=1, t_adm=None, quadrature=DEFAULT_QUADRATURE):
    """Both thresholds of one channel with residual diagnostics.

    A threshold whose defining function keeps one sign over the search
    window is reported as ``None``; the diagnostics then say which way.
    """
    statistics = Statistics(statistics)
    t = T_ADM_FROZEN if t_adm is None else float(t_adm)
    cf = make_channel(1.0, l, statistics, multiplicity, quadrature)
    diag = {"window": list(M_WINDOW), "calibration_gamma": cf.gamma}
    found = {}
    for name, finder, at in (
        ("m_star", threshold_m_star, lambda c: c(0.0)),
        ("m_star_star", lambda *a, **k: threshold_m_star_star(*a, t_adm=t, **k), lambda c: c.at_imaginary(t)),
    ):
        try:
            m = finder(l, statistics, multiplicity, quadrature=quadrature)
        except SearchFailure as exc:
            found[name] = None
            where = "above" if exc.sign == -1 else "below"
            diag[f"{name}_note"] = f"defining function has sign {exc.sign} on the whole window; threshold lies {where} it"
            diag[f"{name}_sign"] = exc.sign
            if exc.sign == -1:
                diag[f"{name}_lower_bound"] = exc.hi
            elif exc.sign == 1:
                diag[f"{name}_upper_bound"] = exc.lo
        else:
            found[name] = m
            diag[f"{name}_residual"] = abs(at(cf.with_mass(m)))
    return ThresholdReport(l, statistics, multiplicity, found["m_star"], found["m_star_star"], t, diag)


def rc_thresholds(l=0, t_adm=T_ADM_DEFAULT):
    """Critical couplings of ``sqrt(-Delta) - C/|x|`` in partial wave ``l``.

    ``C*`` zeroes the symbol at ``s = 0``; ``C**`` at ``s = i t_adm``.  The
    symbol is linear in ``C``, so both follow by division.  For l = 0 these
    are ``2/pi`` and ``t/tan(pi t/2)``.  The position-space comparison model
    keeps its own admissibility exponent, 1/2 by default.
    """
    return 1.0 / rc_symbol(0.0, l), 1.0 / rc_symbol_imag(t_adm, l)


def efimov_exponent(cf: ChannelFunction, s_max=50.0):
    """Positive zero ``s0`` of the channel function, or ``None`` if ``Lambda(0) >= 0``."""
    if cf(0.0) >= 0:
        return None
    grid = np.concatenate([np.linspace(1e-3, 2.0, 81)[1:], np.geomspace(2.0, s_max, 40)[1:]])
    values = cf(grid)
    change = np.nonzero(values > 0)[0]
    if change.size == 0:
        raise SearchFailure(f"channel function has no zero in (0, {s_max}]", lo=0.0, hi=s_max, sign=-1)
    i = change[0]
    lo = grid[i - 1] if i > 0 else 0.0
    bracket = RootBracket(float(lo), float(grid[i]), float(cf(lo)), float(values[i]))
    return find_root(bracket, lambda s: float(cf(s)), 1e-13)


def efimov_exponent_uncertainty(cf: ChannelFunction):
    """``(s0, error)`` with the error from one quadrature refinement; ``None`` if absent."""
    s0 = efimov_exponent(cf)
    if s0 is None:
        return None
    fine = efimov_exponent(cf.refined())
    return s0, abs(fine - s0)


def geometric_ratio(s0):
    """Energy ratio ``exp(2 pi / s0)`` between consecutive tower levels."""
    if not s0 > 0:
        raise InvalidArgument(f"s0 must be positive, got {s0}")
    return math.exp(2.0 * math.pi / s0)


def _log_grid_operator(strength, r0, R, n_grid):
    # x = r0 e^y, psi = x^{1/2} chi:  -chi'' - (strength - 1/4) chi = E x^2 chi
    length = math.log(R / r0)
    h = length / (n_grid + 1)
    y = h * np.arange(1, n_grid + 1)
    diag = np.full(n_grid, 2.0 / h**2 - (strength - 0.25))
    off = np.full(n_grid - 1, -1.0 / h**2)
    mass = (r0 * np.exp(y)) ** 2
    return diag, off, mass


def _uniform_grid_operator(strength, r0, R, n_grid):
    h = (R - r0) / (n_grid + 1)
    x = r0 + h * np.arange(1, n_grid + 1)
    diag = 2.0 / h**2 - strength / x**2
    off = np.full(n_grid - 1, -1.0 / h**2)
    return diag, off, np.ones(n_grid)


def model_operator_levels(strength, r0, R, n_grid, grid="log", count=None):
    """Dirichlet eigenvalues of ``-d^2/dx^2 - strength/x^2`` on ``(r0, R)``.

    ``grid="log"`` discretizes uniformly in ``ln x`` (a generalized
    tridiagonal problem, needs ``r0 > 0``); ``grid="uniform"`` uniformly in
    ``x``.  Returns all negative eigenvalues, or the lowest ``count``
    eigenvalues when ``count`` is given.
    """
    if not 0 <= r0 < R:
        raise InvalidArgument("need 0 <= r0 < R")
    if grid == "log":
        if r0 <= 0:
            raise InvalidArgument("the logarithmic grid needs r0 > 0")
        diag, off, mass = _log_grid_operator(strength, r0, R, n_grid)
    elif grid == "uniform":
        diag, off, mass = _uniform_grid_operator(strength, r0, R, n_grid)
    else:
        raise InvalidArgument(f"unknown grid {grid!r}")
    if count is None:
        n_neg = int(sturm_count(diag, off, 0.0, mass)[0])
        if n_neg == 0:
            return np.array([])
        return tridiagonal_eigenvalues(diag, off, mass, np.arange(n_neg), hi=0.0)
    return tridiagonal_eigenvalues(diag, off, mass, np.arange(count))


@dataclass(frozen=True)
class EfimovResult:
    """Tower levels ``E_1 < E_2 < ... < 0`` resolved between the cutoffs."""

    s0: float
    ratio: float
    tower: tuple
    ratios: tuple = ()
    all_levels: tuple = ()

    def last_ratios(self, accumulation="zero", count=3):
        """Consecutive ``E_{n+1}/E_n`` nearest the accumulation point.

        ``"zero"`` (Efimov) takes the shallowest pairs, ``"minus_infinity"``
        (Thomas) the deepest.
        """
        if accumulation == "zero":
            return self.ratios[-count:]
        if accumulation == "minus_infinity":
            return self.ratios[:count]
        raise InvalidArgument(f"unknown accumulation point {accumulation!r}")

    def as_dict(self):
        return {
            "s0": self.s0,
            "ratio": self.ratio,
            "tower": list(self.tower),
            "pair_ratios": list(self.ratios),
            "expected_pair_ratio": 1.0 / self.ratio,
        }


def efimov_tower(s0, r0, R, n_grid=4000, outer_margin=4.0, inner_margin=0.25):
    """Negative levels of the inverse-square model with exponent ``s0``.

    A level ``E = -kappa^2`` counts as resolved when its bound-state tail
    fits inside the box (``kappa R >= outer_margin``) and it is shallow
    against the inner cutoff (``kappa r0 <= inner_margin``); only those
    enter the tower and its ratio diagnostics.

    Raises
    ------
    ResolutionFailure
        Fewer than three resolved levels.
    """
    if not s0 > 0:
        raise InvalidArgument(f"s0 must be positive, got {s0}")
    if not 0 < r0 < R:
        raise InvalidArgument("need 0 < r0 < R")
    if n_grid < 500:
        raise InvalidArgument("n_grid must be at least 500")
    levels = model_operator_levels(s0 * s0 + 0.25, r0, R, n_grid)
    kappa = np.sqrt(-levels)
    keep = (kappa * R >= outer_margin) & (kappa * r0 <= inner_margin)
    tower = np.sort(levels[keep])
    if tower.size < 3:
        raise ResolutionFailure(
            f"only {tower.size} resolved levels between r0={r0:g} and R={R:g}; "
            "widen the cutoff ratio R/r0 (each level needs a factor "
            f"{math.exp(math.pi / s0):.3g}) or refine n_grid"
        )
    ratios = tuple(float(b / a) for a, b in zip(tower[:-1], tower[1:]))
    return EfimovResult(float(s0), geometric_ratio(s0), tuple(float(e) for e in tower), ratios,
                        tuple(float(e) for e in levels))
