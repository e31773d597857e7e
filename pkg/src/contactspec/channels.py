"""Reduced angular-momentum channels of the 2+1 contact problem.

A pair of identical particles of mass 1 interacts with a third particle of
mass ``m``.  After fixing the total momentum and separating the charge
density of one pair, the potential part of the quadratic form is a kernel
``K(p, q, c)`` homogeneous of degree -2 in the momenta.  Projected onto a
partial wave it is diagonalized by the Mellin transform, which turns the
full form into the multiplication operator

    Lambda_l(s) = 1 + nu * beta_hat_l(s)

on each channel.  Sign and zeros of ``Lambda_l`` classify positivity,
uniqueness of the extension and the onset of the Efimov/Thomas tower.

The relativistic-Coulomb operator ``sqrt(-Delta) - C/|x|`` is provided as
the comparison model; its l = 0 symbol is known in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import CalibrationFailure, InvalidArgument, SingularEvaluation
from .numerics import (
    QuadratureRule,
    composite_gauss_legendre,
    halfline_rule,
    legendre_p,
    legendre_q_cosh,
)

__all__ = [
    "Statistics",
    "ChannelSpec",
    "ChannelQuadrature",
    "ChannelFunction",
    "RCChannel",
    "kinetic_multiplier",
    "pair_kernel",
    "partial_wave_kernel",
    "mellin_symbol",
    "mellin_symbol_imag",
    "boson_oracle_symbol",
    "channel_function",
    "calibrate",
    "make_channel",
    "rc_symbol",
    "rc_symbol_imag",
    "rc_channel_function",
]


class Statistics(str, Enum):
    FERMION = "fermion"
    BOSON = "boson"


@dataclass(frozen=True)
class ChannelSpec:
    """One reduced channel: third-particle mass, angular momentum, statistics.

    ``multiplicity`` is the number of exchange diagrams coupling to one
    charge: 1 for the 2+1 system whose identical pair does not interact,
    2 for three identical bosons (``m = 1``).
    """

    m: float
    l: int
    statistics: Statistics
    multiplicity: int = 1

    def __post_init__(self):
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        object.__setattr__(self, "m", float(self.m))
        if not self.m > 0 or not math.isfinite(self.m):
            raise InvalidArgument(f"mass must be positive and finite, got {self.m}")
        if int(self.l) != self.l or self.l < 0:
            raise InvalidArgument(f"angular momentum must be a non-negative integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))
        if self.multiplicity not in (1, 2):
            raise InvalidArgument(f"multiplicity must be 1 or 2, got {self.multiplicity}")
        if self.statistics is Statistics.FERMION and self.l % 2 == 0:
            raise InvalidArgument(
                f"fermionic channels need odd l (got l={self.l}): the even projection vanishes identically"
            )
        if self.statistics is Statistics.BOSON and self.l % 2 == 1:
            raise InvalidArgument(
                f"bosonic channels need even l (got l={self.l}): the odd projection vanishes identically"
            )

    @property
    def skew(self):
        """``sin(phi) = 1/(1+m)``: half the coefficient of ``p.q`` in the kinetic energy."""
        return 1.0 / (1.0 + self.m)

    def with_mass(self, m):
        return replace(self, m=m)


@dataclass(frozen=True)
class ChannelQuadrature:
    """Node configuration for the angular (c) and radial (u = ln r) integrals.

    The angular rule uses panels graded towards ``c = +-1``; the radial rule
    panels of width ``2**-radial_level`` graded towards ``r = 1``.
    """

    angular_nodes: int = 8
    angular_depth: int = 18
    radial_nodes: int = 16
    radial_level: int = 2
    u_max: float = 40.0

    def refined(self):
        return ChannelQuadrature(
            self.angular_nodes + 4,
            self.angular_depth + 4,
            self.radial_nodes,
            self.radial_level + 1,
            self.u_max + 8.0,
        )


DEFAULT_QUADRATURE = ChannelQuadrature()


def kinetic_multiplier(m):
    """``c_kin(m) = 2 pi^2 sqrt(m (m + 2)) / (m + 1)``."""
    return 2.0 * math.pi**2 * math.sqrt(m * (m + 2.0)) / (m + 1.0)


def pair_kernel(p, q, c, spec):
    """Kernel of the potential form at momenta ``p``, ``q`` and cosine ``c``.

    With ``X = p^2 + q^2`` and ``Y = 2 p q c / (1 + m)`` the fermionic kernel
    is ``-Y / (X^2 - Y^2)`` and the bosonic one ``-X / (X^2 - Y^2)``.
    """
    p, q, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (p, q, c)))
    x = p * p + q * q
    y = 2.0 * spec.skew * p * q * c
    denom = (x - y) * (x + y)
    num = y if spec.statistics is Statistics.FERMION else x
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -num / denom
    if not np.all(np.isfinite(out)):
        raise SingularEvaluation("pair kernel evaluated on its singular set p = q, |c| = 1")
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _angular_rule(nodes, depth):
    # panels on [-1, 1] graded geometrically towards both endpoints
    steps = [1.0 - 2.0**-k for k in range(1, depth + 1)]
    edges = sorted({-1.0, 1.0, 0.0, *steps, *(-t for t in steps)})
    return composite_gauss_legendre(edges, nodes)


def partial_wave_kernel(p, q, spec, quadrature=DEFAULT_QUADRATURE):
    """``k_l(p, q) = 2 pi int_{-1}^{1} P_l(c) K(p, q, c) dc``.

    Vectorized over broadcastable ``p`` and ``q``; homogeneous of degree -2.
    """
    rule = _angular_rule(quadrature.angular_nodes, quadrature.angular_depth)
    p = np.asarray(p, dtype=float)[..., None]
    q = np.asarray(q, dtype=float)[..., None]
    weights = rule.weights * legendre_p(spec.l, rule.nodes)
    k = pair_kernel(p, q, rule.nodes, spec)
    out = 2.0 * math.pi * np.sum(k * weights, axis=-1)
    return out if out.ndim else float(out)


@lru_cache(maxsize=256)
def _radial_rule(level, u_max, nodes):
    return halfline_rule(level, u_max, breakpoints=(1.0,), n=nodes, u_min=0.0)


@lru_cache(maxsize=4096)
def _radial_profile(spec, quadrature):
    """Nodes ``u >= 0`` and weights times ``k_l(1, e^u) e^u`` (even in ``u``).

    Also returns the amplitude ``A`` of the tail ``k_l(1, e^u) e^u ~ A e^{-(l+1) u}``
    beyond ``u_max``.
    """
    rule = _radial_rule(quadrature.radial_level, quadrature.u_max, quadrature.radial_nodes)
    u = rule.nodes
    r = np.exp(u)
    g = partial_wave_kernel(1.0, r, spec, quadrature) * r
    big = quadrature.u_max
    amp = partial_wave_kernel(1.0, math.exp(big), spec, quadrature) * math.exp((spec.l + 2) * big)
    return u, 2.0 * rule.weights * g, amp


def _beta_raw(s, spec, quadrature, kind="cos"):
    u, wg, amp = _radial_profile(spec, quadrature)
    s = np.asarray(s, dtype=float)
    a, big = spec.l + 1.0, quadrature.u_max
    if kind == "cos":
        out = np.cos(np.multiply.outer(s, u)) @ wg
        # 2 int_U^inf A e^{-a u} cos(s u) du
        tail = 2.0 * amp * np.exp(-a * big) * (a * np.cos(s * big) - s * np.sin(s * big)) / (a * a + s * s)
    else:
        out = np.cosh(np.multiply.outer(s, u)) @ wg
        # 2 int_U^inf A e^{-a u} cosh(t u) du, which is what limits |t| < l + 1
        tail = amp * (np.exp(-(a - s) * big) / (a - s) + np.exp(-(a + s) * big) / (a + s))
    return (out + tail) / kinetic_multiplier(spec.m)


def mellin_symbol(s, spec, quadrature=DEFAULT_QUADRATURE, gamma=1.0):
    """Normalized Mellin symbol ``beta_hat_l(s) = gamma * beta_l(s) / c_kin(m)``.

    ``beta_l(s) = int_0^inf k_l(1, r) r^{is} dr``; the imaginary part
    vanishes by the symmetry ``k_l(1, 1/r) = r^2 k_l(1, r)``, so the cosine
    transform in ``u = ln r`` is evaluated.  Vectorized over ``s``.
    """
    out = gamma * _beta_raw(s, spec, quadrature, "cos")
    return out if np.ndim(out) else float(out)


def mellin_symbol_imag(t, spec, quadrature=DEFAULT_QUADRATURE, gamma=1.0):
    """Symbol continued to imaginary argument ``s = i t`` (``cosh(t u)`` weight).

    Converges for ``|t| < l + 1``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= spec.l + 1):
        raise InvalidArgument(f"imaginary Mellin argument needs |t| < l + 1 = {spec.l + 1}")
    out = gamma * _beta_raw(t, spec, quadrature, "cosh")
    return out if np.ndim(out) else float(out)


def boson_oracle_symbol(s):
    """``1 - (8/sqrt 3) sinh(pi s / 6) / (s cosh(pi s / 2))`` with its ``s -> 0`` limit.

    The s-wave channel function of three identical bosons; used as the
    calibration standard.
    """
    s = np.asarray(s, dtype=float)
    a = np.abs(s)
    small = a < 1e-4
    safe = np.where(small, 1.0, a)
    ratio = np.where(
        small,
        # series of sinh(pi s/6)/(s cosh(pi s/2)) to O(s^4)
        (math.pi / 6) * (1 + a * a * ((math.pi / 6) ** 2 / 6 - (math.pi / 2) ** 2 / 2)),
        np.sinh(math.pi * safe / 6) / (safe * np.cosh(math.pi * safe / 2)),
    )
    out = 1.0 - 8.0 / math.sqrt(3.0) * ratio
    return out if out.ndim else float(out)


_CALIBRATION_POINTS = (0.25, 0.5, 1.0, 2.0)
_CALIBRATION_SPEC = ChannelSpec(1.0, 0, Statistics.BOSON, 2)


def calibrate(cf=None, symbol=None, allow_out_of_range=False):
    """Global normalization ``gamma`` of the quadrature symbol.

    Ratio of the three-boson oracle to the quadrature channel at
    ``s = 0.25, 0.5, 1, 2``.  The ratios must be ``s``-independent: a
    spread beyond 1e-3 means the kernel structure is wrong and raises
    ``CalibrationFailure``; beyond 1e-4 it only warns.  ``gamma`` outside
    ``[0.9, 1.1]`` is rejected unless ``allow_out_of_range``.

    Parameters
    ----------
    cf : ChannelFunction, optional
        Supplies the quadrature configuration.
    symbol : callable, optional
        Replacement for the uncalibrated ``beta_hat`` of the calibration
        channel, ``s -> value``; for testing the failure modes.
    """
    quadrature = cf.quadrature if cf is not None else DEFAULT_QUADRATURE
    if symbol is None:
        return _calibrate_cached(quadrature, allow_out_of_range)
    return _calibrate(symbol, allow_out_of_range)


@lru_cache(maxsize=None)
def _calibrate_cached(quadrature, allow_out_of_range):
    return _calibrate(lambda s: mellin_symbol(s, _CALIBRATION_SPEC, quadrature), allow_out_of_range)


def _calibrate(symbol, allow_out_of_range):
    s = np.array(_CALIBRATION_POINTS)
    nu = _CALIBRATION_SPEC.multiplicity
    ratios = (boson_oracle_symbol(s) - 1.0) / (nu * np.asarray(symbol(s), dtype=float))
    spread = float(np.max(ratios) - np.min(ratios))
    if spread > 1e-3:
        raise CalibrationFailure(f"calibration ratios depend on s (spread {spread:.2e})", ratios=ratios)
    if spread > 1e-4:
        warnings.warn(f"calibration ratio spread {spread:.2e} exceeds 1e-4", RuntimeWarning, stacklevel=3)
    gamma = float(np.mean(ratios))
    if not allow_out_of_range and not 0.9 <= gamma <= 1.1:
        raise CalibrationFailure(f"calibration factor {gamma:.6f} outside [0.9, 1.1]", ratios=ratios)
    return gamma


@dataclass(frozen=True)
class ChannelFunction:
    """Calibrated channel function ``Lambda_l(s) = 1 + nu * beta_hat_l(s)``.

    Immutable; build with :func:`make_channel`, which calibrates once.
    Calling the instance evaluates the channel at real ``s``.
    """

    spec: ChannelSpec
    quadrature: ChannelQuadrature = DEFAULT_QUADRATURE
    gamma: float = 1.0

    @property
    def c_kin(self):
        return kinetic_multiplier(self.spec.m)

    def __call__(self, s):
        return channel_function(s, self)

    def symbol(self, s):
        return mellin_symbol(s, self.spec, self.quadrature, self.gamma)

    def at_imaginary(self, t):
        """``Lambda_l(i t)``: the channel continued to imaginary argument."""
        out = 1.0 + self.spec.multiplicity * mellin_symbol_imag(t, self.spec, self.quadrature, self.gamma)
        return out if np.ndim(out) else float(out)

    def with_mass(self, m):
        return replace(self, spec=self.spec.with_mass(m))

    def refined(self):
        """Same channel on the next finer quadrature (recalibrated)."""
        q = self.quadrature.refined()
        return ChannelFunction(self.spec, q, calibrate(ChannelFunction(self.spec, q)))


def make_channel(m, l, statistics, multiplicity=1, quadrature=DEFAULT_QUADRATURE):
    spec = ChannelSpec(m, l, statistics, multiplicity)
    cf = ChannelFunction(spec, quadrature)
    return replace(cf, gamma=calibrate(cf))


def channel_function(s, cf):
    """``Lambda_l(s; m, statistics, nu) = 1 + nu * beta_hat_l(s)``; even in ``s``."""
    out = 1.0 + cf.spec.multiplicity * cf.symbol(s)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class RCChannel:
    """Partial wave ``l`` of ``sqrt(-Delta) - C/|x|``."""

    C: float
    l: int = 0

    def __post_init__(self):
        if not self.C > 0:
            raise InvalidArgument(f"coupling must be positive, got {self.C}")
        if int(self.l) != self.l or self.l < 0:
            raise InvalidArgument(f"angular momentum must be a non-negative integer, got {self.l}")

    def __call__(self, s):
        return rc_channel_function(s, self)


@lru_cache(maxsize=64)
def _rc_profile(l, level=1, u_max=60.0):
    # Q_l(cosh u) has a log singularity at u = 0 and decays like e^{-(l+1)u}
    h = 1.0 / 2**level
    edges = [0.0, *sorted(h * 0.25**j for j in range(1, 26)), *np.arange(h, u_max + h / 2, h)]
    rule: QuadratureRule = composite_gauss_legendre(np.unique(edges), 16)
    u = rule.nodes
    return u, 2.0 * rule.weights * legendre_q_cosh(l, u) / math.pi


def rc_symbol(s, l=0):
    """``(1/pi) int_0^inf Q_l((1 + r^2)/(2 r)) r^{is - 1} dr`` as a cosine transform."""
    u, w = _rc_profile(int(l))
    out = np.cos(np.multiply.outer(np.asarray(s, dtype=float), u)) @ w
    return out if np.ndim(out) else float(out)


def rc_symbol_imag(t, l=0):
    """The RC symbol at ``s = i t``; finite for ``|t| < l + 1``."""
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) >= l + 1):
        raise InvalidArgument(f"imaginary argument needs |t| < l + 1 = {l + 1}")
    u, w = _rc_profile(int(l))
    out = np.cosh(np.multiply.outer(t, u)) @ w
    return out if np.ndim(out) else float(out)


def rc_channel_function(s, rc):
    """``Lambda^RC_l(s) = 1 - C * rc_symbol(s, l)``; equals ``1 - C tanh(pi s/2)/s`` at l = 0."""
    out = 1.0 - rc.C * rc_symbol(s, rc.l)
    return out if np.ndim(out) else float(out)
