"""Cumulant-generating-function route to the hypotheses.

With ``Lambda_n(alpha) = log E exp <alpha, W_n / a_n>`` the scaled limit
``Lambda(alpha) = lim (1/v_n) Lambda_n(v_n alpha)`` yields the LDP through its
conjugate; stability follows from a negative value of ``Lambda`` in the open
orthant and uniform decay from a power bound on the scaled CGFs via a
Chernoff estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .core import Grid, Scaling

_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class CgfFamily:
    """Pre-limit CGFs ``(n, alpha) -> Lambda_n(alpha)`` with their scaling."""

    dim: int
    func: Callable[[int, np.ndarray], float]
    scaling: Scaling

    def scaled(self, n: int, alpha) -> float:
        """``(1/v_n) Lambda_n(v_n alpha)``."""
        v = float(self.scaling.v(n))
        with np.errstate(over="raise", invalid="raise"):
            try:
                val = float(self.func(n, v * np.atleast_1d(np.asarray(alpha, dtype=float))))
            except FloatingPointError as exc:
                raise OverflowError(f"CGF evaluation overflowed at n={n}") from exc
        if not math.isfinite(val):
            raise OverflowError(f"CGF evaluation overflowed at n={n}")
        return val / v


@dataclass(frozen=True)
class ChernoffConstants:
    M: float
    F_prime: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if not self.F_prime > 1:
            raise ValueError("F' must exceed 1")

    def check_scaling(self, s: Scaling) -> None:
        if not self.F_prime > max(s.ratio, 1.0):
            raise ValueError(f"F' must exceed max(V/A, 1) = {max(s.ratio, 1.0)}")


@dataclass(frozen=True)
class LimitReport:
    value: float
    ns: tuple
    tail: tuple
    max_step: float


def limiting_cgf(fam: CgfFamily, alpha, n_max: int) -> LimitReport:
    """Scaled CGF at ``n_max`` with the tail over ``n_max / 2**j``, ``j = 4..0``."""
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    ns = tuple(sorted({max(1, n_max >> j) for j in range(4, -1, -1)}))
    tail = tuple(fam.scaled(n, alpha) for n in ns)
    steps = np.abs(np.diff(tail)) if len(tail) > 1 else np.zeros(1)
    return LimitReport(tail[-1], ns, tail, float(steps.max()))


def gaussian_family(g) -> CgfFamily:
    """Exact pre-limit CGFs of ``W(t) = S Y(t) - t 1`` with ``sigma^2(t) = t**gamma``."""
    cov = g.covariance

    def lam(n, alpha):
        a = np.atleast_1d(alpha)
        return 0.5 * a @ cov @ a * n ** (g.gamma - 2.0) - a.sum()

    return CgfFamily(g.d, lam, g.scaling)


def iid_normal_family() -> CgfFamily:
    """Partial sums of i.i.d. standard normals with ``a_n = v_n = n``."""
    return CgfFamily(1, lambda n, a: float(a[0] ** 2 / (2.0 * n)), Scaling(1.0, 1.0))


@dataclass(frozen=True)
class EmpiricalCgf:
    """``alpha -> log mean exp <alpha, X_k>`` over a sample, evaluated stably."""

    samples: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.samples, dtype=float)
        X = X.reshape(len(X), -1)
        if len(X) < 10_000:
            raise ValueError("empirical CGF needs at least 1e4 samples")
        object.__setattr__(self, "samples", X)

    @property
    def overflow_threshold(self) -> float:
        """Largest ``||alpha||`` for which a naive ``exp`` of the sample cannot overflow."""
        radius = float(np.linalg.norm(self.samples, axis=1).max())
        return math.inf if radius == 0 else _LOG_MAX / radius

    def __call__(self, alpha) -> float:
        a = np.atleast_1d(np.asarray(alpha, dtype=float))
        return float(logsumexp(self.samples @ a) - math.log(len(self.samples)))


@dataclass(frozen=True)
class CgfStability:
    ok: bool
    alpha_star: Optional[np.ndarray]
    bound: float


def cgf_stability(lam: Callable[[np.ndarray], float], probe: Grid) -> CgfStability:
    """Find ``alpha > 0`` on the probe grid with ``Lambda(alpha) < 0``.

    ``bound = -min Lambda`` certifies ``J_W(0) >= bound``.
    """
    pts = probe.points()
    pts = pts[np.all(pts > 0, axis=1)]
    if not len(pts):
        return CgfStability(False, None, -math.inf)
    vals = np.array([lam(p) for p in pts], dtype=float)
    j = int(np.argmin(vals))
    ok = bool(vals[j] < 0)
    return CgfStability(ok, pts[j] if ok else None, float(-vals[j]))


def chernoff_alpha(c: float, q, k: ChernoffConstants) -> np.ndarray:
    """The tilt ``(c (F'-1) ||q|| / (M F'))**(F'-1) q``."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    F = k.F_prime
    return (c * (F - 1.0) * np.linalg.norm(q) / (k.M * F)) ** (F - 1.0) * q


def chernoff_bound(c: float, q, k: ChernoffConstants, v_n: float) -> float:
    """Upper bound on ``log P(W_n > c a_n q)`` from the power bound on the scaled CGF.

    Equals ``-v_n sup_{alpha > 0} (c <alpha, q> - M ||alpha||**(F'/(F'-1)))``,
    i.e. ``-v_n (c ||q||)**F' M**(1-F') F'**(-F') (F'-1)**(F'-1)``.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if not c > 0 or np.any(q <= 0):
        raise ValueError("need c > 0 and q > 0")
    F = k.F_prime
    const = k.M ** (1.0 - F) * F ** (-F) * (F - 1.0) ** (F - 1.0)
    return -v_n * (c * float(np.linalg.norm(q))) ** F * const


def cgf_uniform_decay_verdict(fam: CgfFamily, k: ChernoffConstants,
                              probes: Sequence[tuple]) -> bool:
    """``(1/v_n) Lambda_n(v_n alpha) <= M ||alpha||**(F'/(F'-1))`` at every probe ``(n, alpha)``."""
    if not probes:
        raise ValueError("need at least one probe")
    p = k.F_prime / (k.F_prime - 1.0)
    for n, alpha in probes:
        a = np.atleast_1d(np.asarray(alpha, dtype=float))
        try:
            lhs = fam.scaled(n, a)
        except OverflowError:
            return False
        if lhs > k.M * float(np.linalg.norm(a)) ** p + 1e-12 * max(1.0, abs(lhs)):
            return False
    return True


def default_probes(dim: int, ns=(1, 10, 100, 1000), lo: float = 1e-2, hi: float = 1e2,
                   per_axis: int = 16) -> list:
    """``(n, alpha)`` pairs on a log grid along each axis and the diagonal."""
    radii = np.logspace(math.log10(lo), math.log10(hi), per_axis)
    dirs = list(np.eye(dim)) + [np.ones(dim) / math.sqrt(dim)]
    return [(n, r * u) for n in ns for u in dirs for r in radii]
