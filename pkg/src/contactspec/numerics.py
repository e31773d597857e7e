"""Numeric substrate: quadrature, Legendre functions, root finding, eigensolvers.

Everything here is a pure function of its arguments.  Integrals over the
half line are done in the logarithmic variable ``u = ln r``; for the
homogeneous kernels of this package the integrand then becomes smooth and
exponentially decaying in ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyFailure, InvalidArgument, NoSignChange

__all__ = [
    "QuadratureRule",
    "RootBracket",
    "gauss_legendre",
    "composite_gauss_legendre",
    "halfline_rule",
    "integrate_halfline",
    "legendre_p",
    "legendre_q",
    "legendre_q_cosh",
    "find_root",
    "symmetric_eigen",
    "sturm_count",
    "tridiagonal_eigenvalues",
]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights on an interval.

    ``domain`` is ``(a, b)`` in the integration variable; ``variable`` tags a
    change of variables (``"x"`` for none, ``"log"`` when the rule lives in
    ``u = ln r``).
    """

    nodes: np.ndarray
    weights: np.ndarray
    domain: tuple = (-1.0, 1.0)
    variable: str = "x"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise InvalidArgument("nodes and weights must be 1-d arrays of equal length")
        if nodes.size < 1:
            raise InvalidArgument("a quadrature rule needs at least one node")
        if np.any(weights <= 0):
            raise InvalidArgument("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def measure(self):
        return float(self.weights.sum())

    def integrate(self, f):
        return float(np.dot(self.weights, f(self.nodes)))

    def mapped(self, a, b):
        """Affine image of a rule on ``[-1, 1]`` onto ``[a, b]``."""
        lo, hi = self.domain
        scale = (b - a) / (hi - lo)
        return QuadratureRule(a + (self.nodes - lo) * scale, self.weights * scale, (a, b), self.variable)


def gauss_legendre(n):
    """n-point Gauss-Legendre rule on ``[-1, 1]``, exact to degree ``2n - 1``."""
    n = int(n)
    if n < 1:
        raise InvalidArgument(f"Gauss-Legendre rule needs n >= 1, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(x, w, (-1.0, 1.0))


def composite_gauss_legendre(edges, n=16, variable="x"):
    """Composite rule with an ``n``-point Gauss-Legendre rule on each panel."""
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidArgument("panel edges must be strictly increasing")
    base = gauss_legendre(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base.nodes[None, :]).ravel()
    weights = (half[:, None] * base.weights[None, :]).ravel()
    return QuadratureRule(nodes, weights, (float(edges[0]), float(edges[-1])), variable)


def _graded_edges(lo, hi, h, points, depth, ratio=0.25):
    """Panels of width about ``h`` on [lo, hi], graded geometrically towards ``points``."""
    n = max(1, int(math.ceil((hi - lo) / h)))
    edges = set(np.linspace(lo, hi, n + 1).tolist())
    for p in points:
        if not lo < p < hi:
            continue
        edges.add(p)
        for j in range(depth + 1):
            d = h * ratio**j
            for q in (p - d, p + d):
                if lo < q < hi:
                    edges.add(q)
    return np.array(sorted(edges))


def halfline_rule(level=0, u_max=40.0, breakpoints=(1.0,), n=16, u_min=None):
    """Composite Gauss-Legendre rule in ``u = ln r`` covering ``[-u_max, u_max]``.

    ``level`` halves the panel width per step and deepens the geometric
    grading towards the breakpoints (given in ``r``).  The returned rule
    integrates ``g(u) du``; integrate ``f(r) dr`` as ``g(u) = f(e^u) e^u``.
    """
    if u_min is None:
        u_min = -u_max
    h = 1.0 / 2**level
    points = [math.log(b) for b in breakpoints]
    edges = _graded_edges(u_min, u_max, h, points, depth=8 + 3 * level)
    return composite_gauss_legendre(edges, n, variable="log")


def integrate_halfline(f, tol=1e-10, breakpoints=(1.0,), max_refinements=8, n=16):
    """Integral of ``f`` over ``(0, inf)`` via ``r = e^u`` and composite panels.

    The panel set is refined until two successive estimates differ by less
    than ``tol``; the truncation of the ``u`` range is grown until the
    integrand at the ends is negligible.

    Parameters
    ----------
    f : callable
        Vectorized function of ``r > 0``.
    tol : float
        Absolute tolerance.
    breakpoints : sequence of float
        Points in ``r`` where ``f`` may be singular or kinked; panels are
        graded geometrically towards them.

    Returns
    -------
    float

    Raises
    ------
    AccuracyFailure
        If the refinements do not settle within ``max_refinements``.
    """

    def g(u):
        r = np.exp(u)
        return f(r) * r

    u_max = 8.0
    while u_max < 700.0:
        ends = np.abs(g(np.array([-u_max, u_max])))
        if np.all(ends < tol * 1e-3):
            break
        u_max += 8.0
    prev = None
    diff = math.inf
    for level in range(max_refinements + 1):
        rule = halfline_rule(level, u_max, breakpoints, n)
        value = float(np.dot(rule.weights, g(rule.nodes)))
        if prev is not None:
            diff = abs(value - prev)
            if diff < tol:
                return value
        prev = value
    raise AccuracyFailure("half-line integral did not converge", estimate=prev, error=diff)


def legendre_p(l, x):
    """Legendre polynomial ``P_l(x)`` by the three-term recurrence."""
    l = int(l)
    if l < 0:
        raise InvalidArgument("l must be >= 0")
    x = np.asarray(x, dtype=float)
    p_prev = np.ones_like(x)
    if l == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    p = x.copy()
    for k in range(1, l):
        p_prev, p = p, ((2 * k + 1) * x * p - k * p_prev) / (k + 1)
    return p if p.ndim else float(p)


_Q_BACKWARD_FROM = 8


def _legendre_q_backward(l, x, q0):
    # Miller's algorithm: Q_l is the minimal solution of the recurrence for x > 1.
    decay = np.arccosh(x)
    top = l + 20 + int(np.max(np.ceil(40.0 / decay)))
    q_next = np.zeros_like(x)
    q = np.full_like(x, 1e-300)
    out = None
    for k in range(top, 0, -1):
        # k Q_{k-1} = (2k+1) x Q_k - (k+1) Q_{k+1}
        q_prev = ((2 * k + 1) * x * q - (k + 1) * q_next) / k
        q_next, q = q, q_prev
        if k - 1 == l:
            out = q.copy()
        big = np.abs(q) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            q, q_next = q * scale, q_next * scale
            if out is not None:
                out = out * scale
    return out * (q0 / q)


def _legendre_q_upward(l, x, q0):
    q_prev, q = q0, x * q0 - 1.0
    for k in range(1, l):
        q_prev, q = q, ((2 * k + 1) * x * q - k * q_prev) / (k + 1)
    return q


def _legendre_q_recur(l, x, q0):
    if l == 0:
        return q0
    # backward wherever it converges quickly: always for l >= 8, and for
    # large x at any l, where Q_1 = x Q_0 - 1 already cancels
    backward = (np.arccosh(x) > 0.02) & ((l >= _Q_BACKWARD_FROM) | (x > 2.0))
    out = np.empty_like(x)
    if np.any(~backward):
        out[~backward] = _legendre_q_upward(l, x[~backward], q0[~backward])
    if np.any(backward):
        out[backward] = _legendre_q_backward(l, x[backward], q0[backward])
    return out


def legendre_q(l, x):
    """Legendre function of the second kind ``Q_l(x)`` for ``x > 1``.

    Upward recurrence from ``Q_0`` and ``Q_1``; for ``l >= 8`` the backward
    (Miller) recurrence takes over, since upward recurrence loses accuracy
    once ``Q_l`` has decayed far below ``P_l``.  Very close to ``x = 1``
    the two solutions stay comparable and the upward recurrence is kept.
    """
    l = int(l)
    if l < 0:
        raise InvalidArgument("l must be >= 0")
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 1.0):
        raise InvalidArgument("legendre_q requires x > 1")
    scalar = xa.ndim == 0
    xa = np.atleast_1d(xa)
    out = _legendre_q_recur(l, xa, np.arctanh(1.0 / xa))
    return float(out[0]) if scalar else out


def legendre_q_cosh(l, u):
    """``Q_l(cosh u)`` for ``u > 0``, accurate down to tiny ``u``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u <= 0):
        raise InvalidArgument("legendre_q_cosh requires u > 0")
    small = u < 1.0
    q0 = np.empty_like(u)
    q0[small] = -np.log(np.tanh(0.5 * u[small]))
    q0[~small] = 2.0 * np.arctanh(np.exp(-u[~small]))
    return _legendre_q_recur(int(l), np.cosh(u), q0)


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidArgument(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.f_lo * self.f_hi > 0:
            raise NoSignChange(
                f"no sign change on [{self.lo}, {self.hi}]: f = {self.f_lo:.3e}, {self.f_hi:.3e}"
            )

    @classmethod
    def of(cls, f, lo, hi):
        return cls(lo, hi, f(lo), f(hi))


def find_root(bracket, f, tol=1e-12, max_iter=200):
    """Root of ``f`` inside ``bracket``: bisection with secant (Illinois) steps.

    Returns a point whose bracket has width ``<= tol`` (or an exact zero).
    """
    lo, hi, flo, fhi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    side = 0
    for _ in range(max_iter):
        width = hi - lo
        if width <= tol:
            break
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not lo < x < hi or side in (-2, 2):
            x = 0.5 * (lo + hi)
            side = 0
        fx = f(x)
        if fx == 0:
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
            # Illinois: halve the retained endpoint's value after repeats
            if side == -1:
                fhi *= 0.5
            side = -1 if side >= 0 else side - 1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1 if side <= 0 else side + 1
    return 0.5 * (lo + hi)


def _round_robin(m):
    players = list(range(m))
    for _ in range(m - 1):
        yield [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        players = [players[0]] + [players[-1]] + players[1:-1]


def symmetric_eigen(matrix, tol=1e-12, max_sweeps=60):
    """All eigenvalues of a dense real symmetric matrix, ascending.

    Cyclic Jacobi rotations in round-robin order, so each round applies
    ``n/2`` disjoint rotations at once.  Iterates until the off-diagonal
    Frobenius norm is below ``tol * ||A||_F``.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument("symmetric_eigen needs a square matrix")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if n == 0:
        return np.array([])
    if np.linalg.norm(a - a.T) > 1e-12 * max(scale, 1e-300):
        raise InvalidArgument("matrix is not symmetric")
    if scale == 0 or n == 1:
        return np.sort(np.diag(a).copy())
    a = 0.5 * (a + a.T)
    m = n + (n % 2)
    rounds = []
    for pairs in _round_robin(m):
        pp = np.array([min(i, j) for i, j in pairs if max(i, j) < n], dtype=int)
        qq = np.array([max(i, j) for i, j in pairs if max(i, j) < n], dtype=int)
        rounds.append((pp, qq))
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p, q in rounds:
            apq = a[p, q]
            active = np.abs(apq) > 1e-18 * scale
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            safe = np.where(big, 1.0, theta)
            t = np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0))
            t[big] = 0.5 / theta[big]
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * rp - s[:, None] * rq
            a[q, :] = s[:, None] * rp + c[:, None] * rq
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * c[None, :] - cq * s[None, :]
            a[:, q] = cp * s[None, :] + cq * c[None, :]
    else:
        raise AccuracyFailure("Jacobi iteration did not converge")
    return np.sort(np.diag(a).copy())


def sturm_count(diag, off, x, mass=None):
    """Number of eigenvalues below each ``x`` of ``T v = E M v``.

    ``T`` is symmetric tridiagonal (``diag``, ``off``), ``M`` a positive
    diagonal (``mass``, identity if omitted).  Uses the inertia of
    ``T - x M`` from its LDL^T pivots; ``x`` may be an array.
    """
    diag = np.asarray(diag, dtype=float)
    off2 = np.asarray(off, dtype=float) ** 2
    mass = np.ones_like(diag) if mass is None else np.asarray(mass, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tiny = 1e-300
    count = np.zeros(x.shape, dtype=int)
    d = diag[0] - x * mass[0]
    d = np.where(d == 0, -tiny, d)
    count += d < 0
    # a pivot hitting -tiny overflows the next quotient to -inf, which is harmless
    with np.errstate(over="ignore"):
        for i in range(1, diag.size):
            d = diag[i] - x * mass[i] - off2[i - 1] / d
            d = np.where(d == 0, -tiny, d)
            count += d < 0
    return count


def tridiagonal_eigenvalues(diag, off, mass=None, indices=None, lo=None, hi=None, rtol=1e-13):
    """Selected eigenvalues of a symmetric tridiagonal (generalized) problem.

    Sturm-sequence bisection, so tiny eigenvalues keep their relative
    accuracy even when the matrix norm is large.  ``indices`` are
    zero-based positions in the ascending spectrum; all indices between the
    given bounds are found simultaneously.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    mass = np.ones_like(diag) if mass is None else np.asarray(mass, dtype=float)
    if lo is None or hi is None:
        rad = np.zeros_like(diag)
        rad[:-1] += np.abs(off)
        rad[1:] += np.abs(off)
        g_lo = np.min((diag - rad) / mass)
        g_hi = np.max((diag + rad) / mass)
        span = g_hi - g_lo
        lo = g_lo - 1e-3 * span - 1e-300 if lo is None else lo
        hi = g_hi + 1e-3 * span + 1e-300 if hi is None else hi
    if indices is None:
        indices = np.arange(diag.size)
    k = np.asarray(indices, dtype=int)
    a = np.full(k.shape, float(lo))
    b = np.full(k.shape, float(hi))
    for _ in range(2000):
        mid = 0.5 * (a + b)
        below = sturm_count(diag, off, mid, mass) > k
        b = np.where(below, mid, b)
        a = np.where(below, a, mid)
        if np.all(b - a <= rtol * np.maximum(np.abs(a), np.abs(b)) + 1e-300):
            break
    return 0.5 * (a + b)
