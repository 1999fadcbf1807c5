"""Pure-Python/numpy versions of the compiled kernels (same draws, same arithmetic)."""

from __future__ import annotations

import math

import numpy as np

_BLOCK = 1 << 22  # doubles per normal block


def gauss_walk_sup(generator, n_paths, n_steps, load, drift, q):
    load = np.ascontiguousarray(load, dtype=float)
    drift = np.asarray(drift, dtype=float)
    q = np.asarray(q, dtype=float)
    d = load.shape[0]
    out = np.empty(n_paths)
    rows = max(1, _BLOCK // (n_steps * d))
    for s in range(0, n_paths, rows):
        m = min(rows, n_paths - s)
        z = generator.standard_normal((m, n_steps, d))
        # accumulate the product term by term, matching the compiled loop order
        acc = load[None, None, :, 0] * z[:, :, :1]
        for j in range(1, d):
            acc = acc + load[None, None, :, j] * z[:, :, j:j + 1]
        inc = acc - drift
        w = np.cumsum(inc, axis=1)
        stat = np.min(w / q, axis=2).max(axis=1)
        out[s:s + m] = np.maximum(stat, 0.0)
    return out


def _fill_source(generator, Z, p, col, n_int, c, inv_V):
    rand = generator.random
    state = 1.0 if rand() < 0.5 else 0.0
    t = ontime = 0.0
    k = 0
    sojourns = 0
    while k <= n_int:
        u = rand()
        h = (-math.log(u)) ** inv_V if u > 0 else math.inf
        end = t + h
        while k <= n_int and k <= end:
            Z[p, k, col] = (ontime + state * (k - t)) - c * k
            k += 1
        ontime = ontime + state * h
        t = end
        state = 1.0 - state
        sojourns += 1
    return sojourns


def onoff_sources(generator, n_paths, n_int, c1, c2, V):
    Z = np.empty((n_paths, n_int + 1, 2))
    inv_V = 1.0 / V
    for p in range(n_paths):
        _fill_source(generator, Z, p, 0, n_int, c1, inv_V)
        _fill_source(generator, Z, p, 1, n_int, c2, inv_V)
    return Z
