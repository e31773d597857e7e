"""Two-body laboratory for shrinking potentials.

Units with ``H = -d^2/dr^2 + l(l+1)/r^2 + V(r)`` on the reduced radial
function ``u = r psi``.  A potential shrunk as ``eps^-3 V(r/eps)`` keeps its
L1 norm (the contact scaling); ``eps^-2 V(r/eps)`` keeps its dimensionless
strength and hence its zero-energy resonance (the point-interaction
scaling).  The tools here expose both:

* zero-energy Numerov integration for the scattering length,
* shooting with node counting for bound states,
* the Birman-Schwinger operator ``|V|^1/2 (H0 + lambda)^-1 |V|^1/2``,
* the coupled cubic pair equations on a radial grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import fft, special

from .errors import AccuracyFailure, InvalidArgument, ResolutionFailure, SearchFailure
from .numerics import RootBracket, composite_gauss_legendre, find_root, symmetric_eigen

__all__ = [
    "Profile",
    "Scaling",
    "RadialPotential",
    "ScaledPotential",
    "NLSPairState",
    "l1_norm",
    "scattering_length",
    "bound_states",
    "birman_schwinger_eigs",
    "shape_independence_probe",
    "resonance_tune",
    "nls_pair_evolve",
]

# profiles with infinite support are cut where they drop below this
TAIL = 1e-16


class Profile(str, Enum):
    SQUARE_WELL = "square_well"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"


class Scaling(str, Enum):
    CONTACT_3 = "contact_3"
    POINT_2 = "point_2"


@dataclass(frozen=True)
class RadialPotential:
    """``V(r) = -depth * f(r / range)`` for a non-negative profile ``f``.

    ``f`` is the indicator of ``[0, 1]``, ``exp(-x^2)`` or ``exp(-x)``.
    """

    profile: Profile
    depth: float
    range: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "profile", Profile(self.profile))
        if not self.depth > 0:
            raise InvalidArgument(f"depth must be positive, got {self.depth}")
        if not self.range > 0:
            raise InvalidArgument(f"range must be positive, got {self.range}")

    @property
    def cutoff(self):
        """Radius beyond which the potential is treated as zero."""
        if self.profile is Profile.SQUARE_WELL:
            return self.range
        if self.profile is Profile.GAUSSIAN:
            return self.range * math.sqrt(-math.log(TAIL))
        return self.range * -math.log(TAIL)

    @property
    def breakpoints(self):
        """Interior radii where quadrature panels should end."""
        if self.profile is Profile.SQUARE_WELL:
            return ()
        return tuple(self.range * x for x in (0.5, 1.0, 2.0, 4.0) if self.range * x < self.cutoff)

    def __call__(self, r):
        x = np.asarray(r, dtype=float) / self.range
        if self.profile is Profile.SQUARE_WELL:
            f = (x <= 1.0).astype(float)
        elif self.profile is Profile.GAUSSIAN:
            f = np.exp(-x * x)
        else:
            f = np.exp(-x)
        return -self.depth * f

    def with_depth(self, depth):
        return replace(self, depth=depth)


@dataclass(frozen=True)
class ScaledPotential:
    """``eps^-p V(r / eps)`` with ``p = 3`` (contact) or ``p = 2`` (point)."""

    base: RadialPotential
    eps: float
    power: Scaling = Scaling.CONTACT_3

    def __post_init__(self):
        object.__setattr__(self, "power", Scaling(self.power))
        if not self.eps > 0:
            raise InvalidArgument(f"eps must be positive, got {self.eps}")

    @property
    def exponent(self):
        return 3 if self.power is Scaling.CONTACT_3 else 2

    @property
    def cutoff(self):
        return self.eps * self.base.cutoff

    @property
    def breakpoints(self):
        return tuple(self.eps * b for b in self.base.breakpoints)

    def __call__(self, r):
        return self.eps ** (-self.exponent) * self.base(np.asarray(r, dtype=float) / self.eps)


def _panel_rule(V, n=32, panels_per_segment=4):
    edges = [0.0, *V.breakpoints, V.cutoff]
    fine = []
    for a, b in zip(edges[:-1], edges[1:]):
        fine.extend(np.linspace(a, b, panels_per_segment + 1)[:-1])
    fine.append(V.cutoff)
    return composite_gauss_legendre(np.array(fine), n)


def l1_norm(V):
    """``4 pi int r^2 |V(r)| dr`` up to the cutoff."""
    rule = _panel_rule(V)
    return float(4.0 * math.pi * rule.integrate(lambda r: r * r * np.abs(V(r))))


# ---------------------------------------------------------------- Numerov

def _numerov(f, h, u0, u1):
    """Solve ``u'' = f u`` on a uniform grid from two starting values.

    Summed form: with ``y = (1 - h^2 f / 12) u`` the second difference of
    ``y`` is accumulated as a running increment, which keeps rounding error
    growing linearly instead of quadratically in the number of steps.
    """
    n = f.size
    h2 = h * h
    w = (1.0 - h2 / 12.0 * f).tolist()
    g = (h2 * f).tolist()
    u = [0.0] * n
    u[0], u[1] = u0, u1
    y0, y1 = w[0] * u0, w[1] * u1
    d = y1 - y0
    for i in range(1, n - 1):
        d += g[i] * u[i]
        y1 += d
        u[i + 1] = y1 / w[i + 1]
        if abs(y1) > 1e200:
            for j in range(i + 2):
                u[j] *= 1e-200
            y1 *= 1e-200
            d *= 1e-200
    return np.array(u)


def _outward(V, l, energy, n_steps):
    """Regular solution on ``[0, cutoff]`` and its end derivative (fourth order)."""
    R = V.cutoff
    h = R / n_steps
    r = h * np.arange(n_steps + 1)
    f = np.empty(n_steps + 1)
    f[1:] = V(r[1:]) + l * (l + 1) / r[1:] ** 2 - energy
    # u(0) = 0 makes f(0) irrelevant in the recurrence
    f[0] = 0.0
    # regular series r^(l+1) (1 + g r^2 / (4l + 6)) with g = V(0) - E
    g0 = float(V(0.0)) - energy
    u1 = h ** (l + 1) * (1.0 + g0 * h * h / (4 * l + 6))
    u = _numerov(f, h, 0.0, u1)
    upp = f * u
    du = (u[-1] - u[-2]) / h + h * (7.0 * upp[-1] + 6.0 * upp[-2] - upp[-3]) / 24.0
    return r, u, du


def _zero_energy_end(V, n_steps):
    _, u, du = _outward(V, 0, 0.0, n_steps)
    return u[-1], du


def scattering_length(V, n_steps=None, tol=1e-10, max_steps=2**18):
    """s-wave scattering length ``a = R - u(R) / u'(R)`` from the zero-energy solution.

    With ``n_steps`` given the Numerov grid is fixed; otherwise the step is
    halved until two successive values agree to ``tol`` (relative to
    ``max(1, |a|)``).  At an exact zero-energy resonance, ``u'(R)`` is zero
    within its discretization error and a signed infinity is returned.
    """
    R = V.cutoff
    if n_steps is not None:
        u, du = _zero_energy_end(V, int(n_steps))
        return R - u / du if du != 0 else math.inf
    n = 2000
    u, du = _zero_energy_end(V, n)
    while True:
        n *= 2
        u2, du2 = _zero_energy_end(V, n)
        err_du = abs(du2 - du)
        if abs(du2) <= 10.0 * err_du + 1e-14 * abs(u2) / R:
            return math.copysign(math.inf, -u2 * du2) if du2 != 0 else math.inf
        a, a2 = R - u / du, R - u2 / du2
        # near a resonance the end derivative reaches its rounding floor first
        floor = 1e-12 * max(abs(u2) / R, abs(du2))
        if abs(a2 - a) <= tol * max(1.0, abs(a2)) or err_du <= floor:
            return a2
        if n >= max_steps:
            raise AccuracyFailure("scattering length did not converge", estimate=a2, error=abs(a2 - a))
        u, du = u2, du2


# ---------------------------------------------------------------- bound states

def _exterior_log_derivative(l, kappa, R):
    """``u'/u`` at ``R`` of the decaying free solution ``r k_l(kappa r)``."""
    if kappa == 0:
        return -l / R
    z = kappa * R
    if l == 0:
        return -kappa
    # (r k_l(kr))' / (r k_l(kr)) = 1/R + kappa k_l'(z) / k_l(z)
    return 1.0 / R + kappa * special.spherical_kn(l, z, derivative=True) / special.spherical_kn(l, z)


def _count_below(V, l, energy, n_steps):
    """Number of bound states below ``energy`` (Sturm oscillation count)."""
    _, u, du = _outward(V, l, energy, n_steps)
    inner = u[1:]
    nodes = int(np.count_nonzero(np.signbit(inner[1:]) != np.signbit(inner[:-1])))
    kappa = math.sqrt(max(-energy, 0.0))
    d = _exterior_log_derivative(l, kappa, V.cutoff)
    return nodes + int(u[-1] * (du - d * u[-1]) < 0)


def bound_states(V, l=0, max_count=None, n_steps=4000, tol=1e-12):
    """Bound-state energies in partial wave ``l``, ascending.

    Each level is bisected on the oscillation count until its bracket is
    below ``tol`` relative to the well depth.

    Raises
    ------
    AccuracyFailure
        When the shallowest level sits too close to threshold to separate
        from zero; the bracket is carried on the exception.
    """
    if l < 0:
        raise InvalidArgument("l must be non-negative")
    rule = _panel_rule(V)
    floor = float(np.min(V(rule.nodes)))
    scale = abs(floor)
    total = _count_below(V, l, 0.0, n_steps)
    if max_count is not None:
        total = min(total, int(max_count))
    energies = []
    for n in range(total):
        lo, hi = floor * 1.0001 - 1e-300, 0.0
        while hi - lo > tol * scale:
            mid = 0.5 * (lo + hi)
            if _count_below(V, l, mid, n_steps) > n:
                hi = mid
            else:
                lo = mid
        if hi >= -tol * scale:
            raise AccuracyFailure(
                f"level {n} is unresolved near threshold, bracket [{lo:.3g}, {hi:.3g}]",
                estimate=0.5 * (lo + hi), error=hi - lo,
            )
        energies.append(0.5 * (lo + hi))
    return energies


# ---------------------------------------------------------------- Birman-Schwinger

def _green(r1, r2, lam, l):
    lo, hi = np.minimum(r1, r2), np.maximum(r1, r2)
    kappa = math.sqrt(lam)
    if l == 0:
        # sinh(k lo) exp(-k hi) / k without overflow
        return -np.expm1(-2.0 * kappa * lo) * np.exp(-kappa * (hi - lo)) / (2.0 * kappa)
    nu = l + 0.5
    return (np.sqrt(lo * hi) * special.ive(nu, kappa * lo) * special.kve(nu, kappa * hi)
            * np.exp(-kappa * (hi - lo)))


def _bs_matrix(V, lam, l, n):
    segments = len(V.breakpoints) + 1
    rule = _panel_rule(V, n=n, panels_per_segment=max(2, 8 // segments))
    r, w = rule.nodes, rule.weights
    g = np.sqrt(np.abs(V(r)) * w)
    return g[:, None] * _green(r[:, None], r[None, :], lam, l) * g[None, :]


def birman_schwinger_eigs(V, lam, n_eigs=1, l=0, n_nodes=8, check=True):
    """Largest eigenvalues of ``|V|^1/2 G_lambda |V|^1/2`` in partial wave ``l``.

    ``G_lambda`` is the radial free Green function at energy ``-lam``.  An
    eigenvalue equal to 1 means a bound state at ``-lam``.  The kernel is
    discretized by Nystrom on Gauss-Legendre panels and checked against a
    doubled resolution.

    Raises
    ------
    ResolutionFailure
        When the leading eigenvalues move by more than 1% on refinement.
    """
    if not lam > 0:
        raise InvalidArgument(f"lambda must be positive, got {lam}")
    eig = np.sort(symmetric_eigen(_bs_matrix(V, lam, l, n_nodes)))[::-1][:n_eigs]
    if check:
        fine = np.sort(symmetric_eigen(_bs_matrix(V, lam, l, 2 * n_nodes)))[::-1][:n_eigs]
        drift = np.max(np.abs(fine - eig) / np.maximum(np.abs(fine), 1e-300))
        if drift > 0.01:
            raise ResolutionFailure(f"Birman-Schwinger eigenvalues drift by {drift:.2%}; raise n_nodes")
        eig = fine
    return [float(x) for x in eig]


# ---------------------------------------------------------------- probes

def shape_independence_probe(V_a, V_b, eps_list, power=Scaling.CONTACT_3, lam=1e-6):
    """Scattering length, leading BS eigenvalue and bound-state count per shape and eps.

    Both shapes must carry the same L1 norm.
    """
    na, nb = l1_norm(V_a), l1_norm(V_b)
    if abs(na - nb) > 1e-10 * max(na, nb):
        raise InvalidArgument(f"L1 norms differ: {na!r} vs {nb!r}")
    rows = []
    for eps in eps_list:
        for name, V in (("a", V_a), ("b", V_b)):
            W = ScaledPotential(V, eps, power)
            rows.append({
                "eps": float(eps),
                "shape": name,
                "profile": V.profile.value,
                "scattering_length": scattering_length(W),
                "bs_max": birman_schwinger_eigs(W, lam / eps**2)[0],
                "bound_states": _count_below(W, 0, 0.0, 4000),
            })
    return rows


def resonance_tune(profile, range=1.0, tol=1e-13, n_steps=8000):
    """Smallest depth at which the zero-energy s-wave solution is flat at the cutoff."""
    profile = Profile(profile)

    def slope(depth):
        V = RadialPotential(profile, depth, range)
        u, du = _zero_energy_end(V, n_steps)
        return du / math.hypot(u / V.cutoff, du)

    # the first resonance of any of the profiles sits below 40 / range^2
    grid = np.linspace(0.0, 40.0, 161)[1:] / range**2
    prev = 1.0
    for lo, hi in zip(np.concatenate([[grid[0] * 1e-3], grid[:-1]]), grid):
        val = slope(hi)
        if val < 0 < prev:
            return find_root(RootBracket(float(lo), float(hi), prev, val), slope, tol)
        prev = val
    raise SearchFailure("no resonance below depth 40 / range^2", lo=0.0, hi=float(grid[-1]), sign=1)


# ---------------------------------------------------------------- pair equations

@dataclass(frozen=True)
class NLSPairState:
    """Two radial fields on ``r_j = j h``, ``j = 1..n``, Dirichlet at both ends.

    ``phi1``/``phi2`` are the values of the fields themselves (not ``r phi``).
    """

    h: float
    phi1: np.ndarray
    phi2: np.ndarray
    c: float = 1.0
    m1: float = 1.0
    m2: float = 1.0
    time: float = 0.0

    def __post_init__(self):
        p1 = np.asarray(self.phi1, dtype=complex)
        p2 = np.asarray(self.phi2, dtype=complex)
        if p1.shape != p2.shape or p1.ndim != 1:
            raise InvalidArgument("phi1 and phi2 must be 1-d arrays of one length")
        if not (self.h > 0 and self.m1 > 0 and self.m2 > 0):
            raise InvalidArgument("h, m1 and m2 must be positive")
        object.__setattr__(self, "phi1", p1)
        object.__setattr__(self, "phi2", p2)

    @classmethod
    def gaussian(cls, sigma1=1.0, sigma2=None, c=1.0, m1=1.0, m2=1.0, n_grid=400, extent=20.0):
        """Gaussians ``exp(-r^2 / (2 sigma^2))`` in a ball of radius ``extent * max(sigma)``."""
        sigma2 = sigma1 if sigma2 is None else sigma2
        L = extent * max(sigma1, sigma2)
        h = L / (n_grid + 1)
        r = h * np.arange(1, n_grid + 1)
        return cls(h, np.exp(-r * r / (2 * sigma1**2)), np.exp(-r * r / (2 * sigma2**2)), c, m1, m2)

    @property
    def r(self):
        return self.h * np.arange(1, self.phi1.size + 1)

    def norms(self):
        """``||phi1||^2`` and ``||phi2||^2`` over R^3."""
        w = 4.0 * math.pi * self.h * self.r**2
        return float(w @ np.abs(self.phi1) ** 2), float(w @ np.abs(self.phi2) ** 2)

    def second_moments(self):
        """``<r^2>`` of each field."""
        w = 4.0 * math.pi * self.h * self.r**2
        out = []
        for p in (self.phi1, self.phi2):
            d = np.abs(p) ** 2
            out.append(float((w * self.r**2) @ d / (w @ d)))
        return tuple(out)


def max_kinetic_eigenvalue(state):
    n = state.phi1.size
    L = state.h * (n + 1)
    return (math.pi * n / L) ** 2 / min(state.m1, state.m2)


def nls_pair_evolve(state: NLSPairState, dt, steps):
    """Strang split-step evolution of the coupled cubic pair.

    ``i d phi1/dt = -(1/m1) Lap phi1 + c |phi2|^2 phi1`` and the mirror
    equation for ``phi2``.  The Laplacian acts exactly in the sine basis of
    ``u = r phi``; the nonlinear step is an exact phase rotation.  Every
    substep is unitary, so both norms are conserved to rounding, and a
    negative ``dt`` undoes a positive one.

    Raises
    ------
    InvalidArgument
        When ``|dt|`` times the largest kinetic eigenvalue reaches 0.5.
    """
    if steps < 0:
        raise InvalidArgument("steps must be non-negative")
    if abs(dt) * max_kinetic_eigenvalue(state) >= 0.5:
        raise InvalidArgument(
            f"dt = {dt:g} violates the stability bound |dt| * {max_kinetic_eigenvalue(state):.4g} < 0.5"
        )
    n = state.phi1.size
    L = state.h * (n + 1)
    r = state.r
    k2 = (math.pi * np.arange(1, n + 1) / L) ** 2
    kin1 = np.exp(-1j * dt * k2 / state.m1)
    kin2 = np.exp(-1j * dt * k2 / state.m2)
    u1 = r * state.phi1
    u2 = r * state.phi2
    half = 0.5 * dt * state.c / (r * r)

    def potential(u1, u2):
        # both phases use the moduli before the step, which a phase rotation leaves unchanged
        a1, a2 = np.abs(u1) ** 2, np.abs(u2) ** 2
        return u1 * np.exp(-1j * half * a2), u2 * np.exp(-1j * half * a1)

    for _ in range(steps):
        u1, u2 = potential(u1, u2)
        u1 = fft.idst(kin1 * fft.dst(u1, type=1, norm="ortho"), type=1, norm="ortho")
        u2 = fft.idst(kin2 * fft.dst(u2, type=1, norm="ortho"), type=1, norm="ortho")
        u1, u2 = potential(u1, u2)
    return replace(state, phi1=u1 / r, phi2=u2 / r, time=state.time + dt * steps)
