"""Closed forms for ``W(t) = S Y(t) - t 1`` with independent fBm-type coordinates.

``Var Y_i(t) = c_i t**gamma``; with ``a(t) = t`` and ``v(t) = t**(2 - gamma)``
the scaled CGF is exactly quadratic and the quadrant rate is a small
bound-constrained QP.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._search import golden_section
from .core import RateFn, RestrictedRate, Scaling


@dataclass(frozen=True)
class GaussParams:
    S: np.ndarray
    c: np.ndarray
    gamma: float

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        d = S.shape[0]
        if S.shape != (d, d) or c.shape != (d,):
            raise ValueError("S must be d x d and c a length-d vector")
        if np.any(c <= 0):
            raise ValueError("diagonal entries c_i must be positive")
        if not 0.0 < self.gamma < 2.0:
            raise ValueError(f"gamma must lie in (0, 2), got {self.gamma}")
        if np.linalg.matrix_rank(S) < d:
            raise np.linalg.LinAlgError("S is singular")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "c", c)

    @property
    def d(self) -> int:
        return self.S.shape[0]

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.S))

    @property
    def scaling(self) -> Scaling:
        return Scaling(A=1.0, V=2.0 - self.gamma)

    @property
    def covariance(self) -> np.ndarray:
        """``S C S^T``."""
        return (self.S * self.c) @ self.S.T

    @property
    def precision(self) -> np.ndarray:
        """``S^{-T} C^{-1} S^{-1}``, the Hessian of the conjugate."""
        S_inv = np.linalg.inv(self.S)
        return (S_inv.T / self.c) @ S_inv

    @classmethod
    def identity(cls, d: int, gamma: float) -> "GaussParams":
        return cls(np.eye(d), np.ones(d), gamma)


def gauss_cgf(g: GaussParams, alpha) -> float:
    """``1/2 <alpha, S C S^T alpha> - <alpha, 1>``."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    return float(0.5 * a @ g.covariance @ a - a.sum())


def gauss_cgf_fn(g: GaussParams) -> RateFn:
    cov = g.covariance
    return RateFn(g.d, lambda A: 0.5 * np.einsum("ij,jk,ik->i", A, cov, A) - A.sum(axis=1),
                  convex=True, name="gauss cgf")


def gauss_conjugate(g: GaussParams, x) -> float:
    """``1/2 <S^{-1}(x + 1), C^{-1} S^{-1}(x + 1)>``."""
    y = np.linalg.solve(g.S, np.atleast_1d(np.asarray(x, dtype=float)) + 1.0)
    return float(0.5 * np.sum(y * y / g.c))


def gauss_conjugate_fn(g: GaussParams) -> RateFn:
    S_inv = np.linalg.inv(g.S)

    def conj(X):
        Y = (X + 1.0) @ S_inv.T
        return 0.5 * np.sum(Y * Y / g.c, axis=1)

    return RateFn(g.d, conj, convex=True, name="gauss conjugate")


def box_qp(P: np.ndarray, lower: np.ndarray, tol: float = 1e-10, max_sweeps: int = 500):
    """Batched ``min_z 1/2 z^T P z`` subject to ``z >= lower`` (rows of ``lower``).

    Projected Gauss-Seidel: each coordinate is minimised exactly and clipped,
    i.e. a diagonally scaled projected gradient step. Stops once the KKT
    residual ``max |min(z - lower, P z)|`` (relative to ``||P||``) is below
    ``tol``. Returns ``(z, values, residual)``.
    """
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    z = np.maximum(lower, 0.0)
    diag = np.diag(P)
    scale = max(1.0, float(np.abs(P).max()))
    res = np.inf
    for _ in range(max_sweeps):
        for i in range(P.shape[0]):
            off = z @ P[:, i] - diag[i] * z[:, i]
            z[:, i] = np.maximum(lower[:, i], -off / diag[i])
        grad = z @ P
        res = float(np.abs(np.minimum(z - lower, grad)).max()) / scale
        if res <= tol:
            break
    else:
        warnings.warn(f"box QP stopped after {max_sweeps} sweeps, KKT residual {res:.2e}",
                      RuntimeWarning, stacklevel=2)
    vals = 0.5 * np.einsum("ij,jk,ik->i", z, P, z)
    return z, vals, res


def _J_array(g: GaussParams, qs) -> np.ndarray:
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    _, vals, _ = box_qp(g.precision, qs + 1.0)
    return vals


def gauss_J(g: GaussParams, q) -> float:
    """``inf_{x >= q} Lambda*(x)``, a strictly convex bound-constrained QP."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")
    return float(_J_array(g, q[None, :])[0])


def gauss_restricted(g: GaussParams) -> RestrictedRate:
    return RestrictedRate(g.d, lambda qs: _J_array(g, qs), name="gauss J_W")


@dataclass(frozen=True)
class GaussDecay:
    k: float
    t_star: float


def gauss_decay(g: GaussParams, q, t_min: float = 1e-4, t_max: float = 1e4,
                n_scan: int = 2000) -> GaussDecay:
    """``k = inf_t 1/2 inf_{x >= q} <S^{-1}(x + t1), C^{-1} S^{-1}(x + t1)> / t**gamma``.

    The inner infimum is the box QP with lower bound ``q + t 1``; the outer
    one a log-uniform scan of ``t`` followed by golden-section search.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if q.shape != (g.d,) or np.any(q <= 0):
        raise ValueError("q must be a strictly positive d-vector")
    P = g.precision
    logt = np.linspace(math.log(t_min), math.log(t_max), n_scan)
    ts = np.exp(logt)
    _, quad, _ = box_qp(P, q[None, :] + ts[:, None])
    ratio = quad / ts ** g.gamma
    i = int(np.argmin(ratio))

    def f(lt):
        t = math.exp(lt)
        _, v, _ = box_qp(P, (q + t)[None, :])
        return float(v[0]) / t ** g.gamma

    lt, val, _ = golden_section(f, logt[max(i - 1, 0)], logt[min(i + 1, n_scan - 1)])
    if ratio[i] < val:
        lt, val = logt[i], float(ratio[i])
    return GaussDecay(val, math.exp(lt))
