"""Monte Carlo harness: path simulators, sup-probability estimates, slope fits.

Random streams come from ``SeedSequence(seed, spawn_key=(stream, ...))`` so a
``(seed, stream)`` pair fixes every draw, including the per-chunk substreams
used when paths are generated in blocks.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .core import NumericalError, Scaling
from .gauss import GaussParams, gauss_decay
from .onoff import OnOffParams, onoff_decay_closed

MAX_GAUSS_STEPS = 4096
CSV_COLUMNS = ("u", "p_hat", "half_width_95", "n_paths", "N", "seed")


@dataclass(frozen=True)
class RngSpec:
    """A reproducible random stream: ``seed`` plus a substream index."""

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise ValueError("stream must be nonnegative")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))))

    def substream(self, j: int) -> np.random.Generator:
        """Independent generator for block ``j`` of this stream."""
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), int(j)))))


RngLike = Union[RngSpec, np.random.Generator]


def _generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngSpec or a numpy Generator")


# --- heavy-tailed sojourns ---------------------------------------------------

def heavy_from_uniform(V: float, u):
    """Inverse transform ``(-ln U)**(1/V)`` for ``P(H >= x) = exp(-x**V)``."""
    return (-np.log(u)) ** (1.0 / V)


def _check_V(V):
    if not 0.0 < V < 1.0:
        raise ValueError(f"V must lie in (0, 1), got {V}")


def sample_heavy(V: float, rng: RngLike) -> float:
    """One sojourn with tail ``exp(-x**V)``."""
    _check_V(V)
    return float(heavy_from_uniform(V, _generator(rng).random()))


def sample_heavy_array(V: float, size, rng: RngLike) -> np.ndarray:
    _check_V(V)
    return heavy_from_uniform(V, _generator(rng).random(size))


# --- paths -------------------------------------------------------------------

@dataclass(frozen=True)
class PathSample:
    """``W`` observed at increasing times starting from 0; ``values`` has shape ``(n, d)``."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or len(t) != len(v) or len(t) == 0:
            raise ValueError("times and values must have matching lengths")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def _source_breakpoints(rand, c: float, V: float, horizon: float, force_on: bool):
    """Breakpoints ``(t, Z_t)`` of one integrated source up to ``horizon``."""
    if force_on:
        return np.array([0.0, horizon]), np.array([0.0, (1.0 - c) * horizon])
    state = 1.0 if rand() < 0.5 else 0.0
    inv_V = 1.0 / V
    ts, zs = [0.0], [0.0]
    t = ontime = 0.0
    while t < horizon:
        u = rand()
        end = t + ((-math.log(u)) ** inv_V if u > 0 else math.inf)
        stop = min(end, horizon)
        ontime += state * (stop - t)
        if stop > ts[-1]:
            ts.append(stop)
            zs.append(ontime - c * stop)
        t = end
        state = 1.0 - state
    return np.array(ts), np.array(zs)


def simulate_onoff(p: OnOffParams, horizon: float, rng: RngLike, *, force_on: bool = False,
                   events: bool = False) -> PathSample:
    """``W = (Z1, Z1 + Z2)`` for two independent on-off sources.

    Sources start on or off with probability 1/2 and alternate sojourns
    drawn by :func:`sample_heavy`. ``Z`` is integrated exactly, so sampling
    is exact at any time. The path is reported at integer times
    ``0..floor(horizon)``, plus every sojourn end when ``events`` is set.
    ``force_on`` keeps both sources on (``Y = 1``) and draws nothing.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    rand = _generator(rng).random
    t1, z1 = _source_breakpoints(rand, p.c1, p.V, horizon, force_on)
    t2, z2 = _source_breakpoints(rand, p.c2, p.V, horizon, force_on)
    times = np.arange(math.floor(horizon) + 1, dtype=float)
    if events:
        times = np.unique(np.concatenate([times, t1, t2]))
    Z1 = np.interp(times, t1, z1)
    Z2 = np.interp(times, t2, z2)
    return PathSample(times, np.column_stack([Z1, Z1 + Z2]))


def onoff_path_within_bounds(p: OnOffParams, path: PathSample, tol: float = 1e-9) -> bool:
    """``-c1 t <= W1_t <= (1-c1) t`` and ``-(c1+c2) t <= W2_t <= (2-c1-c2) t``."""
    t, W = path.times, path.values
    s = p.c1 + p.c2
    slack = tol * (1.0 + t)
    return bool(np.all(W[:, 0] >= -p.c1 * t - slack) and np.all(W[:, 0] <= (1 - p.c1) * t + slack)
                and np.all(W[:, 1] >= -s * t - slack) and np.all(W[:, 1] <= (2 - s) * t + slack))


def onoff_increment_bound(p: OnOffParams) -> float:
    s = p.c1 + p.c2
    return max(p.c1, 1 - p.c1) + max(s, 2 - s)


def onoff_increments_bounded(p: OnOffParams, path: PathSample, tol: float = 1e-9) -> bool:
    """``|W_t - W_n| <= onoff_increment_bound(p)`` for every sampled ``t`` in ``(n, n+1]``."""
    t, W = path.times, path.values
    base = np.ceil(t) - 1.0
    base[t == 0] = 0.0
    idx = np.searchsorted(t, base)
    if not np.all(t[idx] == base):
        raise ValueError("path must contain every integer time")
    jump = np.linalg.norm(W - W[idx], axis=1)
    return bool(np.all(jump <= onoff_increment_bound(p) + tol))


@lru_cache(maxsize=8)
def _fbm_cholesky(n_steps: int, step: float, gamma: float) -> np.ndarray:
    t = step * np.arange(1, n_steps + 1)
    tg = t ** gamma
    K = 0.5 * (tg[:, None] + tg[None, :] - np.abs(t[:, None] - t[None, :]) ** gamma)
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"fBm covariance with n_steps={n_steps} is not numerically positive definite; "
            "use a smaller n_steps") from exc
    L.setflags(write=False)
    return L


def _check_grid(n_steps: int, step: float):
    if not 1 <= n_steps <= MAX_GAUSS_STEPS:
        raise ValueError(f"n_steps must lie in [1, {MAX_GAUSS_STEPS}]")
    if not step > 0:
        raise ValueError("step must be positive")


def simulate_gaussian_batch(g: GaussParams, n_steps: int, step: float, n_paths: int,
                            rng: RngLike) -> np.ndarray:
    """``(n_paths, n_steps + 1, d)`` array of ``W = S Y - t 1`` on the grid ``j * step``.

    Each ``Y_i`` is fBm with Hurst ``gamma/2`` scaled by ``sqrt(c_i)``, drawn
    through the Cholesky factor of the exact covariance.
    """
    _check_grid(n_steps, step)
    L = _fbm_cholesky(int(n_steps), float(step), float(g.gamma))
    z = _generator(rng).standard_normal((n_paths, g.d, n_steps))
    Y = (z @ L.T) * np.sqrt(g.c)[None, :, None]
    t = step * np.arange(1, n_steps + 1)
    W = np.einsum("ij,mjn->mni", g.S, Y) - t[None, :, None]
    return np.concatenate([np.zeros((n_paths, 1, g.d)), W], axis=1)


def simulate_gaussian(g: GaussParams, n_steps: int, step: float, rng: RngLike) -> PathSample:
    W = simulate_gaussian_batch(g, n_steps, step, 1, rng)[0]
    return PathSample(step * np.arange(n_steps + 1), W)


# --- path generators for the sup statistic ----------------------------------

def _sup_stat(W: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Per-path ``max_n min_i W_n[i] / q[i]`` for ``W`` of shape ``(m, n, d)``."""
    return np.min(W / q, axis=2).max(axis=1)


class GaussianWalk:
    """``W`` of the Gaussian example observed every ``step`` time units.

    For ``gamma = 1`` the increments are independent and the compiled random
    walk kernel is used; otherwise paths come from the Cholesky factor.
    """

    def __init__(self, g: GaussParams, step: float):
        if not step > 0:
            raise ValueError("step must be positive")
        self.g = g
        self.step = float(step)

    @property
    def scaling(self) -> Scaling:
        return self.g.scaling

    def n_steps(self, N: float) -> int:
        n = N / self.step
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError("N must be a multiple of step")
        return int(round(n))

    def sup_statistics(self, q, N: float, n_paths: int, gen: np.random.Generator) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        n = self.n_steps(N)
        g = self.g
        if g.gamma == 1.0:
            load = np.ascontiguousarray(g.S * np.sqrt(g.c)[None, :] * math.sqrt(self.step))
            drift = np.full(g.d, self.step)
            return kernels.gauss_walk_sup(gen, n_paths, n, load, drift, q)
        W = simulate_gaussian_batch(g, n, self.step, n_paths, gen)
        return _sup_stat(W, q)

    def theoretical_k(self, q) -> float:
        return gauss_decay(self.g, q).k

    def most_likely_epoch(self, q, u: float) -> float:
        return u * gauss_decay(self.g, q).t_star


class OnOffWalk:
    """``W`` of the on-off example observed at integer times."""

    def __init__(self, p: OnOffParams):
        self.p = p

    @property
    def scaling(self) -> Scaling:
        return self.p.scaling

    def sup_statistics(self, q, N: int, n_paths: int, gen: np.random.Generator) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        N = int(N)
        out = np.empty(n_paths)
        rows = max(1, (1 << 21) // (N + 1))
        for s in range(0, n_paths, rows):
            m = min(rows, n_paths - s)
            Z = kernels.onoff_sources(gen, m, N, self.p.c1, self.p.c2, self.p.V)
            Z[..., 1] += Z[..., 0]
            out[s:s + m] = _sup_stat(Z, q)
        return out

    def theoretical_k(self, q) -> float:
        return onoff_decay_closed(self.p, q).k

    def most_likely_epoch(self, q, u: float) -> float:
        return u / onoff_decay_closed(self.p, q).t_star


# --- estimates -----------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    u: float
    p_hat: float
    n_paths: int
    half_width_95: float

    def __post_init__(self):
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError("p_hat must lie in [0, 1]")
        if not self.half_width_95 >= 0:
            raise ValueError("half_width_95 must be nonnegative")

    @classmethod
    def from_count(cls, u: float, hits: int, n_paths: int) -> "McEstimate":
        p = hits / n_paths
        return cls(float(u), p, int(n_paths), 1.96 * math.sqrt(p * (1.0 - p) / n_paths))


def sup_statistics(generator, q, N, n_paths: int, rng: RngSpec, chunk_size: int = 50_000,
                   workers: Optional[int] = None) -> np.ndarray:
    """Sup statistics for ``n_paths`` paths; block ``j`` uses ``rng.substream(j)``.

    The result does not depend on ``workers``.
    """
    if not isinstance(rng, RngSpec):
        raise TypeError("rng must be an RngSpec")
    starts = list(range(0, n_paths, chunk_size))
    out = np.empty(n_paths)

    def run(j):
        s = starts[j]
        m = min(chunk_size, n_paths - s)
        out[s:s + m] = generator.sup_statistics(q, N, m, rng.substream(j))

    if workers and workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(run, range(len(starts))))
    else:
        for j in range(len(starts)):
            run(j)
    return out


def mc_sweep(generator, us: Sequence[float], q, N, n_paths: int, rng: RngSpec,
             chunk_size: int = 50_000, workers: Optional[int] = None) -> list:
    """``P(exists n <= N: W_n > u q)`` for every ``u``, all on one set of paths.

    Refuses ``N`` below ten times the most likely epoch of the largest ``u``.
    """
    if n_paths < 100:
        raise ValueError("n_paths must be at least 100")
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q <= 0):
        raise ValueError("q must be strictly positive")
    us = [float(u) for u in us]
    if not us or min(us) < 0:
        raise ValueError("u levels must be nonnegative")
    epoch = generator.most_likely_epoch(q, max(us))
    if N < 10.0 * epoch:
        raise ValueError(f"truncation below most-likely epoch: N={N} < 10 * t* = {10.0 * epoch:.6g}")
    stats = sup_statistics(generator, q, N, n_paths, rng, chunk_size, workers)
    return [McEstimate.from_count(u, int(np.count_nonzero(stats > u)), n_paths) for u in us]


def mc_sup_prob(generator, u: float, q, N, n_paths: int, rng: RngSpec, **kw) -> McEstimate:
    return mc_sweep(generator, [u], q, N, n_paths, rng, **kw)[0]


@dataclass(frozen=True)
class SlopeFit:
    k_hat: float
    stderr: float

    def as_dict(self) -> dict:
        return asdict(self)


def slope_fit(estimates: Sequence[McEstimate], s: Scaling) -> SlopeFit:
    """Weighted least squares of ``-log p_hat`` on ``u**(V/A)`` through the origin.

    Weights are inverse delta-method variances ``n p / (1 - p)``; estimates
    with ``p_hat`` in ``{0, 1}`` are dropped.
    """
    usable = [e for e in estimates if 0.0 < e.p_hat < 1.0]
    if not usable:
        raise ValueError("degenerate estimates: every p_hat is 0 or 1")
    if len(usable) < 3:
        raise ValueError("need at least 3 estimates with 0 < p_hat < 1")
    p = np.array([e.p_hat for e in usable])
    n = np.array([e.n_paths for e in usable], dtype=float)
    x = np.array([e.u for e in usable]) ** s.ratio
    y = -np.log(p)
    w = n * p / (1.0 - p)
    sxx = float(np.sum(w * x * x))
    return SlopeFit(float(np.sum(w * x * y)) / sxx, math.sqrt(1.0 / sxx))


def write_csv(fh, estimates: Sequence[McEstimate], N, seed: int) -> None:
    """Rows ``u,p_hat,half_width_95,n_paths,N,seed`` to an open text file."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for e in estimates:
        w.writerow([repr(e.u), repr(e.p_hat), repr(e.half_width_95), e.n_paths, N, seed])
