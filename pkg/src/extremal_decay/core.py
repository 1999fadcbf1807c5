"""Foundational types: extended reals, power-law scalings, rate functions, grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

INF = math.inf


class NumericalError(ArithmeticError):
    """A computation failed for numerical rather than input-validation reasons."""


class ExtReal(float):
    """Nonnegative extended real: a finite value ``>= 0`` or ``+inf``.

    Subclasses ``float`` so the usual total order and ``inf`` handling come
    for free; construction rejects NaN and negative values.
    """

    def __new__(cls, value=0.0):
        v = float(value)
        if math.isnan(v):
            raise ValueError("ExtReal cannot be NaN")
        if v < 0.0:
            raise ValueError(f"ExtReal must be nonnegative, got {v!r}")
        return super().__new__(cls, v)

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self)

    def __add__(self, other):
        if isinstance(other, ExtReal):
            return ext_add(self, other)
        return float(self) + other

    __radd__ = __add__

    def __repr__(self):
        return "ExtReal(inf)" if self == INF else f"ExtReal({float(self)!r})"


def ext_add(a, b) -> ExtReal:
    """Sum in ``[0, inf]``; anything plus ``inf`` is ``inf``."""
    a, b = ExtReal(a), ExtReal(b)
    if a == INF or b == INF:
        return ExtReal(INF)
    return ExtReal(float(a) + float(b))


def check_values(values, *, nonnegative: bool = False) -> np.ndarray:
    """Validate an array of evaluator outputs: NaN is a hard error."""
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("evaluator returned NaN")
    if nonnegative and (arr < 0).any():
        raise ValueError("rate function returned a negative value")
    return arr


@dataclass(frozen=True)
class Scaling:
    """Power-law scalings ``a(t) = t**A``, ``v(t) = t**V`` and ``h = v o a^{-1}``."""

    A: float
    V: float

    def __post_init__(self):
        if not (self.A > 0 and self.V > 0):
            raise ValueError(f"scaling indices must be positive, got A={self.A}, V={self.V}")

    @property
    def ratio(self) -> float:
        """Index of ``h``, i.e. ``V/A``."""
        return self.V / self.A

    def a(self, t):
        return np.power(t, self.A)

    def a_inv(self, x):
        return np.power(x, 1.0 / self.A)

    def v(self, t):
        return np.power(t, self.V)

    def h(self, u):
        return scaling_h(self, u)


def scaling_h(s: Scaling, u: float) -> float:
    """Speed ``h(u) = u**(V/A)`` of the sup-probability decay."""
    if not u > 0:
        raise ValueError(f"h is defined for u > 0 only, got {u!r}")
    return float(u) ** s.ratio


def _as_points(x, dim: int) -> tuple[np.ndarray, bool]:
    # scalar or a single d-vector -> one point; 1-D input with dim == 1 -> batch
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or (arr.ndim == 1 and (dim > 1 or arr.size == 1)):
        pts, single = arr.reshape(1, -1), True
    elif arr.ndim == 1:
        pts, single = arr.reshape(-1, 1), False
    else:
        pts, single = arr, False
    if pts.shape[-1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {np.shape(x)}")
    return pts, single


@dataclass(frozen=True)
class RateFn:
    """A function on ``R^d`` with values in ``(-inf, inf]``, usually a rate function.

    ``func`` is vectorised: it maps an ``(m, d)`` array to an ``(m,)`` array.
    Calling the object on a single point returns a float; :meth:`evaluate`
    works on batches. NaN outputs raise. Values are not forced to be
    nonnegative because the same wrapper carries CGFs (dual functions).
    """

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    convex: bool = False
    continuous_on_domain: bool = True
    name: str = field(default="", compare=False)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return check_values(self.func(pts)).reshape(pts.shape[0])

    def __call__(self, x) -> float:
        pts, single = _as_points(x, self.dim)
        vals = self.evaluate(pts)
        return float(vals[0]) if single else vals

    @classmethod
    def from_scalar(cls, f: Callable[[np.ndarray], float], dim: int, **kw) -> "RateFn":
        """Wrap a pointwise evaluator ``f(x) -> float``."""

        def func(pts):
            return np.fromiter((f(p if dim > 1 else p[0]) for p in pts), float, len(pts))

        return cls(dim, func, **kw)


@dataclass(frozen=True)
class RestrictedRate:
    """Quadrant rate ``J`` on the nonnegative orthant, vectorised like :class:`RateFn`."""

    dim: int
    func: Callable[[np.ndarray], np.ndarray]
    name: str = field(default="", compare=False)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        return check_values(self.func(pts), nonnegative=True).reshape(pts.shape[0])

    def __call__(self, q) -> float:
        pts, single = _as_points(q, self.dim)
        vals = self.evaluate(pts)
        return ExtReal(vals[0]) if single else vals


@dataclass(frozen=True)
class Grid:
    """Rectangular grid, inclusive of both endpoints, uniform along each axis."""

    lower: tuple
    upper: tuple
    points_per_axis: int

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ValueError("lower and upper must have the same dimension")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("grid requires lower < upper coordinatewise")
        if self.points_per_axis < 2:
            raise ValueError("points_per_axis must be at least 2")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def spacing(self) -> np.ndarray:
        return (np.array(self.upper) - np.array(self.lower)) / (self.points_per_axis - 1)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, self.points_per_axis) for a, b in zip(self.lower, self.upper)]

    def points(self) -> np.ndarray:
        """All grid points, shape ``(n**d, d)``, in lexicographic order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def refined(self, factor: int = 2) -> "Grid":
        """Nested refinement: every old point stays a grid point."""
        return Grid(self.lower, self.upper, (self.points_per_axis - 1) * factor + 1)
