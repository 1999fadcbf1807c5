"""Derivative-free local polishers shared by the grid-scan routines."""

from __future__ import annotations

import math

import numpy as np

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo: float, hi: float, iterations: int = 80):
    """Minimise a unimodal-on-bracket ``f`` over ``[lo, hi]``.

    ``f`` may return ``inf``; ties keep the left part of the bracket.
    Returns ``(x_best, f_best, iterations_used)`` where ``x_best`` is the best
    point actually evaluated, so ``f(x_best) == f_best`` exactly.
    """
    a, b = float(lo), float(hi)
    x1 = b - INVPHI * (b - a)
    x2 = a + INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    best_x, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    it = 0
    for it in range(1, iterations + 1):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INVPHI * (b - a)
            f1 = f(x1)
            if f1 < best_f:
                best_x, best_f = x1, f1
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INVPHI * (b - a)
            f2 = f(x2)
            if f2 < best_f:
                best_x, best_f = x2, f2
        if b - a <= 4 * np.finfo(float).eps * max(1.0, abs(a), abs(b)):
            break
    return best_x, best_f, it


def pattern_search(f, x0, step, lower, upper, shrinks: int = 40):
    """Coordinate descent with a shrinking step, confined to the box ``[lower, upper]``.

    ``f`` maps an ``(m, d)`` array of candidates to ``(m,)`` values. Each round
    tries ``x +/- step_i e_i`` for every coordinate at once and moves to the
    best strict improvement; without one, the step halves. ``shrinks`` bounds
    the number of halvings.
    """
    x = np.array(x0, dtype=float)
    step = np.array(step, dtype=float)
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = x.size
    fx = float(f(x[None, :])[0])
    halvings = 0
    moves = 0
    while halvings < shrinks and moves < 50 * (shrinks + 1):
        cand = np.repeat(x[None, :], 2 * d, axis=0)
        idx = np.arange(d)
        cand[idx, idx] += step
        cand[d + idx, idx] -= step
        np.clip(cand, lower, upper, out=cand)
        vals = f(cand)
        j = int(np.argmin(vals))
        if vals[j] < fx:
            x, fx = cand[j], float(vals[j])
            moves += 1
        else:
            step = step / 2.0
            halvings += 1
    return x, fx
