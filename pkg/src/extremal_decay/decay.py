"""Decay constants of sup-probabilities and the hypothesis checkers around them.

The central quantity is

    k = inf_{c > 0} c**(-V/A) * J(c q),

the logarithmic decay rate (in the speed ``h(u) = u**(V/A)``) of
``P(exists n : W_n > u q)``. For ``d = 1`` and general interval unions the
tilted rate ``x -> k x**(V/A)`` governs ``P(exists n : W_n in u A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._search import golden_section
from .core import INF, ExtReal, Grid, RestrictedRate, Scaling

TOL_ZERO = 1e-9


@dataclass(frozen=True)
class DecayResult:
    k: ExtReal
    c_star: Optional[float]
    bracket: tuple
    iterations: int
    flat: bool

    def as_dict(self) -> dict:
        k = float(self.k)
        return {
            "k": k if math.isfinite(k) else "inf",
            "c_star": self.c_star,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "flat": self.flat,
        }


def _positive_vector(q, what="q") -> np.ndarray:
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(~(q > 0)):
        raise ValueError(f"{what} must be strictly positive coordinatewise, got {q}")
    return q


def decay_rate(J: RestrictedRate, q, s: Scaling, c_min: float = 1e-4,
               c_max: float = 1e4, n_scan: int = 2000, polish: int = 4) -> DecayResult:
    """Minimise ``g(c) = c**(-V/A) J(c q)`` over ``c > 0``.

    A log-uniform scan of ``n_scan`` points on ``[c_min, c_max]`` locates the
    basins; golden-section search (80 iterations, in ``log c``) then polishes
    the ``polish`` best local minima of the scan and the overall best point
    wins. Points where ``J = inf`` are simply never minimal.
    """
    q = _positive_vector(q)
    if q.size != J.dim:
        raise ValueError("q and J dimensions differ")
    if not 0 < c_min < c_max:
        raise ValueError("need 0 < c_min < c_max")
    r = s.ratio
    logc = np.linspace(math.log(c_min), math.log(c_max), n_scan)
    cs = np.exp(logc)
    g = J.evaluate(cs[:, None] * q[None, :]) * cs ** (-r)
    if not np.isfinite(g).any():
        return DecayResult(ExtReal(INF), None, (c_min, c_max), 0, False)

    gmin = float(g.min())
    near = cs[g <= gmin + 1e-6 * max(gmin, TOL_ZERO)]
    flat = bool(near.size >= 2 and near.max() / near.min() > 1.01)

    # local minima of the scan (plateaus count once, at their first point)
    interior = (g[1:-1] <= g[:-2]) & (g[1:-1] < g[2:])
    cand = list(np.flatnonzero(interior) + 1)
    if g[0] < g[1]:
        cand.append(0)
    if g[-1] <= g[-2]:
        cand.append(n_scan - 1)
    cand = [i for i in cand if np.isfinite(g[i])]
    cand.sort(key=lambda i: (g[i], i))
    cand = cand[:max(1, polish)] or [int(np.argmin(g))]

    def g_log(lc):
        c = math.exp(lc)
        return float(J.evaluate((c * q)[None, :])[0]) * c ** (-r)

    best = (float(g[cand[0]]), float(logc[cand[0]]))
    bracket = (float(cs[max(cand[0] - 1, 0)]), float(cs[min(cand[0] + 1, n_scan - 1)]))
    iterations = 0
    for i in cand:
        lo, hi = logc[max(i - 1, 0)], logc[min(i + 1, n_scan - 1)]
        x, fx, it = golden_section(g_log, lo, hi)
        iterations += it
        if fx < best[0]:
            best = (fx, x)
            bracket = (math.exp(lo), math.exp(hi))
        elif g[i] < best[0]:
            best = (float(g[i]), float(logc[i]))
    k, lc = best
    return DecayResult(ExtReal(k), math.exp(lc), bracket, iterations, flat)


def tilde_rate(x: float, k, s: Scaling) -> ExtReal:
    """Rate function of the sup-measures: ``inf`` on ``x < 0``, ``k x**(V/A)`` otherwise."""
    if x < 0:
        return ExtReal(INF)
    if x == 0:
        return ExtReal(0.0)
    k = ExtReal(k)
    return ExtReal(INF) if k == INF else ExtReal(float(k) * x ** s.ratio)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"bad interval [{self.lo}, {self.hi}]")

    @property
    def empty(self) -> bool:
        return self.lo == self.hi and (self.lo_open or self.hi_open)

    def contains(self, x: float) -> bool:
        left = x > self.lo if self.lo_open else x >= self.lo
        right = x < self.hi if self.hi_open else x <= self.hi
        return left and right


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of real intervals, kept sorted and disjoint."""

    intervals: tuple = field(default_factory=tuple)

    def __post_init__(self):
        ivs = [iv if isinstance(iv, Interval) else Interval(*iv) for iv in self.intervals]
        object.__setattr__(self, "intervals", tuple(_normalize(ivs)))

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.intervals + other.intervals)

    @property
    def empty(self) -> bool:
        return not self.intervals


def _normalize(ivs: list) -> list:
    ivs = sorted((iv for iv in ivs if not iv.empty), key=lambda iv: (iv.lo, iv.lo_open))
    out: list = []
    for iv in ivs:
        if out:
            last = out[-1]
            touches = iv.lo < last.hi or (iv.lo == last.hi and not (iv.lo_open and last.hi_open))
            if touches:
                if iv.hi > last.hi or (iv.hi == last.hi and not iv.hi_open):
                    out[-1] = Interval(last.lo, iv.hi, last.lo_open, iv.hi_open)
                continue
        out.append(iv)
    return out


def set_decay(A: IntervalUnion, k, s: Scaling) -> ExtReal:
    """``inf_{x in A} tilde_rate(x)``.

    The tilted rate is nondecreasing on ``[0, inf)``, so only the left end of
    ``A`` intersected with the half line matters; an open left end at ``x0``
    still gives the infimum ``k x0**(V/A)``.
    """
    k = ExtReal(k)
    best = ExtReal(INF)
    for iv in A.intervals:
        if iv.hi < 0 or (iv.hi == 0 and iv.hi_open):
            continue
        x0 = max(iv.lo, 0.0)
        if x0 == 0.0:
            # A reaches 0 itself or accumulates at 0 from above
            if iv.contains(0.0) or k != INF:
                return ExtReal(0.0)
            continue
        best = min(best, tilde_rate(x0, k, s))
    return best


def reduce_min(w, q) -> float:
    """``min_i w_i / q_i``; ``w > u q`` coordinatewise iff the result exceeds ``u``."""
    q = _positive_vector(q)
    w = np.asarray(w, dtype=float)
    return np.min(w / q, axis=-1) if w.ndim > 1 else float(np.min(w / q))


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    witness_y: Optional[np.ndarray]
    J0: float
    superexponential: bool = False


def stability_verdict(J: RestrictedRate, probe: Grid) -> StabilityVerdict:
    """``J(0) > 0`` and some ``y > 0`` on the probe grid with ``J(y) < inf``."""
    J0 = float(J(np.zeros(J.dim)))
    pts = probe.points()
    pts = pts[np.all(pts > 0, axis=1)]
    witness = None
    if len(pts):
        vals = J.evaluate(pts)
        finite = np.flatnonzero(np.isfinite(vals))
        if finite.size:
            witness = pts[finite[0]]
    stable = J0 > TOL_ZERO and witness is not None
    return StabilityVerdict(stable, witness, J0, superexponential=witness is None)


@dataclass(frozen=True)
class UniformDecayVerdict:
    F: Optional[float]
    K: Optional[float]
    passed: bool


def uniform_decay_verdict(log_tail: Callable[[int, float], float], s: Scaling, q,
                          n_probe: Sequence[int], c_probe: Sequence[float],
                          F_step: float = 0.5) -> UniformDecayVerdict:
    """Look for ``F > V/A`` and ``K`` with ``log_tail(n, c) <= -c**F`` whenever ``c > K``.

    This can only falsify: the hypothesis quantifies over all ``n`` and ``c``.
    ``F`` runs over ``V/A + F_step, V/A + 2 F_step, ..., V/A + 4`` and ``K``
    over the sorted ``c_probe`` values except the largest (so that at least
    one probe is tested). The first feasible pair, smallest ``F`` then
    smallest ``K``, is reported. ``q`` is accepted for symmetry with the
    hypothesis; ``log_tail`` already encodes the direction.
    """
    _positive_vector(q)
    cs = np.sort(np.asarray(c_probe, dtype=float))
    table = np.array([[log_tail(n, c) for c in cs] for n in n_probe], dtype=float)
    worst = table.max(axis=0)
    n_F = int(round(4.0 / F_step))
    for j in range(1, n_F + 1):
        F = s.ratio + j * F_step
        ok = worst <= -(cs ** F)
        for i, K in enumerate(cs[:-1]):
            if ok[i + 1:].all():
                return UniformDecayVerdict(F, float(K), True)
    return UniformDecayVerdict(None, None, False)
