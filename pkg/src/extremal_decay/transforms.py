"""Variational transforms of rate functions.

Grid-based Fenchel-Legendre conjugates, quadrant infima (full rate ->
restricted rate), support functions of zero level sets with the associated
closure identity, the cone-avoidance admissibility check for quadrants, and
linear contractions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._search import pattern_search
from .core import INF, ExtReal, Grid, RateFn, RestrictedRate

_CHUNK = 2_000_000  # entries per (x, alpha) block in conjugate evaluation


@dataclass(frozen=True)
class ZeroLevelSet:
    """Finite sample of a zero level set ``{y : I(y) = 0}``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise ValueError("zero level set sample must be nonempty")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @classmethod
    def from_grid(cls, f: RateFn, probe: Grid, level: float = 0.0) -> "ZeroLevelSet":
        """Grid points where ``f <= level``."""
        pts = probe.points()
        return cls(pts[f.evaluate(pts) <= level])


def fenchel_legendre(f: RateFn, probe: Grid) -> RateFn:
    """Conjugate ``x -> max_{alpha in probe} <alpha, x> - f(alpha)``.

    The result is a maximum of finitely many affine functions, hence exactly
    convex; it underestimates the true conjugate by the grid error.
    """
    alphas = probe.points()
    vals = f.evaluate(alphas)
    finite = np.isfinite(vals)
    if not finite.any():
        raise ValueError("empty effective domain: f is +inf on every probe point")
    alphas, vals = alphas[finite], vals[finite]
    rows = max(1, _CHUNK // len(alphas))

    def conj(x):
        out = np.empty(len(x))
        for s in range(0, len(x), rows):
            block = x[s:s + rows] @ alphas.T - vals
            out[s:s + rows] = block.max(axis=1)
        return out

    return RateFn(f.dim, conj, convex=True, continuous_on_domain=True,
                  name=f"conj({f.name})" if f.name else "conj")


def _quadrant_points(q, probe: Grid):
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.size != probe.dim:
        raise ValueError("q and probe grid dimensions differ")
    pts = probe.points()
    mask = np.all(pts >= q, axis=1)
    if not mask.any():
        raise ValueError("probe grid has no points in the quadrant {x >= q}")
    return q, pts[mask]


def quadrant_inf(I: RateFn, q, probe: Grid, refine: bool = True) -> ExtReal:
    """Infimum of ``I`` over ``{x >= q}``.

    Scans the probe points inside the quadrant, then polishes by
    shrinking-step coordinate descent kept inside ``[q, probe.upper]``:
    once from the best point (lexicographically first on ties) and once
    per face ``{x_i = q_i}`` from the best point of the grid layer nearest
    that face, with ``x_i`` held at ``q_i``. The face passes catch minimisers
    that sit on the quadrant boundary at a kink of ``I`` between grid lines.
    """
    q, pts = _quadrant_points(q, probe)
    vals = I.evaluate(pts)
    j = int(np.argmin(vals))
    best = float(vals[j])
    if not np.isfinite(best):
        return ExtReal(INF)
    if refine:
        upper = np.maximum(np.array(probe.upper), q)
        _, polished = pattern_search(I.evaluate, pts[j], probe.spacing, q, upper)
        best = min(best, polished)
        for i in range(q.size):
            layer = pts[:, i] == pts[:, i].min()
            k = int(np.argmin(np.where(layer, vals, INF)))
            start = pts[k].copy()
            start[i] = q[i]
            hi = upper.copy()
            hi[i] = q[i]
            _, polished = pattern_search(I.evaluate, start, probe.spacing, q, hi)
            best = min(best, polished)
    return ExtReal(best)


def restricted_from_full(I: RateFn, probe: Grid, refine: bool = True) -> RestrictedRate:
    """Restricted rate ``J(q) = inf_{x >= q} I(x)`` evaluated on demand."""

    def J(qs):
        return np.array([quadrant_inf(I, q, probe, refine) for q in qs], dtype=float)

    return RestrictedRate(I.dim, J, name=f"inf_quadrant({I.name})")


def support_function(L: ZeroLevelSet, x) -> float:
    """``max_{alpha in L} <alpha, x>``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return float(np.max(L.points @ x))


@dataclass(frozen=True)
class ClosureReport:
    probe_x: np.ndarray
    support: np.ndarray
    scaled_inf: np.ndarray
    gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.tol


def closure_identity_check(I: RateFn, L: ZeroLevelSet, probe: Grid, tol: float,
                           tau_grid=None) -> ClosureReport:
    """Compare the support function of ``L`` with ``inf_tau I(tau x) / tau``.

    For convex ``I`` with ``L`` the zero set of its conjugate the two agree
    (up to closure). ``tau_grid`` defaults to 2001 log-spaced points on
    ``[1e-3, 1e3]``; the infimum is a plain grid minimum so that nested grid
    refinements shrink the gap monotonically.
    """
    if not I.convex:
        raise ValueError("closure identity needs a convex rate function")
    if tau_grid is None:
        tau_grid = np.logspace(-3, 3, 2001)
    tau = np.asarray(tau_grid, dtype=float)
    xs = probe.points()
    support = np.max(xs @ L.points.T, axis=1)
    scaled = np.empty(len(xs))
    for i, x in enumerate(xs):
        vals = I.evaluate(tau[:, None] * x[None, :]) / tau
        scaled[i] = vals.min()
    gap = float(np.max(np.abs(support - scaled)))
    return ClosureReport(xs, support, scaled, gap, tol)


def h2_check(q, zero_points: ZeroLevelSet, delta: float) -> bool:
    """Cone-avoidance condition for the quadrant ``{x > q}``.

    A ray through ``y + e`` enters ``{x > q}`` (``q > 0``) exactly when
    ``y + e`` is strictly positive, so the condition holds iff every ``y`` in
    the zero set is at Euclidean distance ``>= delta`` from the open positive
    orthant, i.e. ``||min(y, 0)|| >= delta``.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q <= 0):
        raise ValueError("q must be strictly positive")
    dist = np.linalg.norm(np.minimum(zero_points.points, 0.0), axis=1)
    return bool(np.all(dist >= delta))


def contract_linear(I: RateFn, T) -> RateFn:
    """Rate function of ``T X`` when ``X`` has rate ``I``: ``x -> I(T^{-1} x)``."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape != (I.dim, I.dim):
        raise ValueError(f"T must be {I.dim}x{I.dim}")
    if np.linalg.matrix_rank(T) < I.dim:
        raise ValueError("contraction map T is singular")
    T_inv = np.linalg.inv(T)

    def contracted(x):
        return I.func(x @ T_inv.T)

    return RateFn(I.dim, contracted, convex=I.convex,
                  continuous_on_domain=I.continuous_on_domain, name=I.name)
