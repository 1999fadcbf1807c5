"""Closed forms for integrated heavy-tailed on-off sources.

A single source ``Z_t = int_0^t (Y_s - c) ds`` with heavy-tailed sojourns has
the nonconvex rate

    I_c(x) = (1 - 2(x + c))**V  on [-c, 1/2 - c],
             (2(x + c) - 1)**V  on [1/2 - c, 1 - c],
             inf                otherwise,

and the pair ``W = (Z1, Z1 + Z2)`` has ``I_W(x) = I_c1(x1) + I_c2(x2 - x1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import INF, ExtReal, RateFn, RestrictedRate, Scaling

LOW, HIGH = "LOW", "HIGH"


@dataclass(frozen=True)
class OnOffParams:
    c1: float
    c2: float
    V: float

    def __post_init__(self):
        for name in ("c1", "c2"):
            c = getattr(self, name)
            if not 0.5 < c < 1.0:
                raise ValueError(f"{name} must lie in (1/2, 1), got {c}")
        if not 0.0 < self.V < 1.0:
            raise ValueError(f"V must lie in (0, 1), got {self.V}")

    @property
    def regime(self) -> str:
        return HIGH if self.c1 + self.c2 >= 1.5 else LOW

    @property
    def scaling(self) -> Scaling:
        return Scaling(A=1.0, V=self.V)


@dataclass(frozen=True)
class QHat:
    q1_hat: float
    q2_hat: float

    @classmethod
    def of(cls, p: OnOffParams, q) -> "QHat":
        return cls(q[0] + p.c1, q[1] + p.c1 + p.c2)


_EDGE_TOL = 1e-12  # rounding slack at the closed ends of the domain


def _rate_array(c: float, V: float, x) -> np.ndarray:
    y = np.asarray(x, dtype=float) + c
    out = np.full(y.shape, INF)
    dom = (y >= -_EDGE_TOL) & (y <= 1.0 + _EDGE_TOL)
    out[dom] = np.abs(1.0 - 2.0 * np.clip(y[dom], 0.0, 1.0)) ** V
    return out


def onoff_rate(c: float, V: float, x: float) -> ExtReal:
    """Single-source rate ``I_c(x)``."""
    return ExtReal(_rate_array(c, V, x)[()])


def _rate_2d_array(p: OnOffParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return _rate_array(p.c1, p.V, x[..., 0]) + _rate_array(p.c2, p.V, x[..., 1] - x[..., 0])


def onoff_rate_2d(p: OnOffParams, x) -> ExtReal:
    """``I_W(x) = I_c1(x1) + I_c2(x2 - x1)``."""
    return ExtReal(_rate_2d_array(p, x)[()])


def onoff_rate_fn(p: OnOffParams) -> RateFn:
    return RateFn(2, lambda pts: _rate_2d_array(p, pts), convex=False,
                  continuous_on_domain=True, name="onoff I_W")


def _J_array(p: OnOffParams, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    h1 = q[..., 0] + p.c1
    h2 = q[..., 1] + p.c1 + p.c2
    I0 = lambda y: _rate_array(0.0, p.V, y)  # noqa: E731
    # first listed branch wins on shared boundaries
    b1 = h2 <= 0.5 + h1
    b2 = ~b1 & (h2 <= 1.5)
    b3 = ~b1 & ~b2 & (h2 <= 2.0)
    out = np.full(h1.shape, INF)
    with np.errstate(invalid="ignore"):
        out = np.where(b1, I0(h1), out)
        out = np.where(b2, I0(h2 - 0.5), out)
        out = np.where(b3, 1.0 + I0(h2 - 1.0), out)
    return np.where((h1 > 1.0) | (h2 > 2.0), INF, out)


def onoff_J(p: OnOffParams, q) -> ExtReal:
    """Restricted rate ``J_W(q) = inf_{x >= q} I_W(x)`` in closed form.

    With ``qh1 = q1 + c1`` and ``qh2 = q2 + c1 + c2`` and ``I = I_0``::

        I(qh1)          if qh2 <= 1/2 + qh1
        I(qh2 - 1/2)    if 1/2 + qh1 <= qh2 <= 3/2
        1 + I(qh2 - 1)  if 3/2 <= qh2 <= 2
        inf             if qh1 > 1 or qh2 > 2

    ``q >= 0`` puts ``qh1 >= c1`` and ``qh2 >= c1 + c2``, so the lower ends of
    the first two cases are closed here (the formula is continuous there).
    """
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")
    return ExtReal(_J_array(p, q)[()])


def onoff_restricted(p: OnOffParams) -> RestrictedRate:
    return RestrictedRate(2, lambda qs: _J_array(p, qs), name="onoff J_W")


@dataclass(frozen=True)
class OnOffDecay:
    k: float
    t_star: float
    branch: str


def onoff_decay_closed(p: OnOffParams, q) -> OnOffDecay:
    """``inf_t J_W(t q) / t**V`` from the closed-form branch candidates.

    Along the ray ``t q`` the ratio decreases on the first two pieces of
    ``J_W``; on the third piece ``(1 + I(qh2 - 1)) / t**V`` has a single
    stationary point, a maximum, so its minimum sits at the far end of the
    finite region (``qh1 = 1`` or ``qh2 = 2``). Candidates:

    * ``HIGH-1`` / ``LOW-3``: ``t = (1 - c1)/q1``, value
      ``(q1/(1-c1))**V * (1 + [2 (q2/q1)(1-c1) + 2(c1+c2) - 3]**V)``
    * ``HIGH-2`` / ``LOW-4``: ``t = (2 - c1 - c2)/q2``, value ``2 (q2/(2-c1-c2))**V``
    * ``LOW-1``: ``t = (1 - c1)/q1``, value ``(q1/(1-c1))**V``
    * ``LOW-2``: ``t = (3/2 - c1 - c2)/q2``, value ``(q2/(3/2-c1-c2))**V``

    When ``c1 + c2 >= 3/2`` only the third piece exists. Otherwise ``LOW-1``
    applies if the ray leaves the finite region through ``qh1 = 1`` before
    reaching ``qh2 = 3/2``; if not, ``LOW-2`` competes with the third-piece
    endpoint (``LOW-3``/``LOW-4``) and the smaller value wins, ties going
    to ``LOW-2``.
    """
    q1, q2 = (float(v) for v in q)
    if not (q1 > 0 and q2 > 0):
        raise ValueError("q must be strictly positive")
    c1, s, V = p.c1, p.c1 + p.c2, p.V
    t1 = (1.0 - c1) / q1
    t_half = (1.5 - s) / q2
    t_two = (2.0 - s) / q2

    def third_piece_end(labels):
        if t1 <= t_two:
            k = (q1 / (1.0 - c1)) ** V * (1.0 + (2.0 * q2 / q1 * (1.0 - c1) + 2.0 * s - 3.0) ** V)
            return OnOffDecay(k, t1, labels[0])
        return OnOffDecay(2.0 * (q2 / (2.0 - s)) ** V, t_two, labels[1])

    if p.regime == HIGH:
        return third_piece_end(("HIGH-1", "HIGH-2"))
    if t1 <= t_half:
        return OnOffDecay((q1 / (1.0 - c1)) ** V, t1, "LOW-1")
    low2 = OnOffDecay((q2 / (1.5 - s)) ** V, t_half, "LOW-2")
    end = third_piece_end(("LOW-3", "LOW-4"))
    return end if end.k < low2.k else low2


def stationary_point_third_piece(p: OnOffParams, q) -> float:
    """Location ``t`` of the interior maximum of the third-piece ratio (LOW regime)."""
    b = 3.0 - 2.0 * (p.c1 + p.c2)
    if b <= 0:
        return math.nan
    y = b ** (1.0 / (1.0 - p.V))
    return (y + b) / (2.0 * q[1])
