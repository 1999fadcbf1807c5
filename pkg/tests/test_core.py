import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from extremal_decay.core import (INF, ExtReal, Grid, RateFn, RestrictedRate, Scaling, ext_add,
                                 scaling_h)

ext_values = st.one_of(st.just(INF), st.floats(0, 1e6, allow_nan=False))
positive = st.floats(1e-3, 1e3)


@pytest.mark.parametrize("A, V, u, expected", [(1, 1, 7, 7), (2, 1, 4, 2), (1, 2 - 1.0, 3, 3)])
def test_scaling_h_examples(A, V, u, expected):
    assert scaling_h(Scaling(A, V), u) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("u", [0.0, -1.0])
def test_scaling_h_rejects_nonpositive(u):
    with pytest.raises(ValueError):
        scaling_h(Scaling(1, 1), u)


@pytest.mark.parametrize("A, V", [(0, 1), (1, 0), (-1, 2)])
def test_scaling_rejects_nonpositive_indices(A, V):
    with pytest.raises(ValueError):
        Scaling(A, V)


@given(st.floats(0.1, 5), st.floats(0.1, 5), positive, positive)
def test_h_is_multiplicative(A, V, u, w):
    s = Scaling(A, V)
    assert scaling_h(s, u * w) == pytest.approx(scaling_h(s, u) * scaling_h(s, w), rel=1e-12)


def test_scaling_functions_increase():
    s = Scaling(0.7, 1.3)
    t = np.linspace(0.01, 10, 200)
    for f in (s.a, s.v, s.h):
        assert np.all(np.diff([f(x) for x in t]) > 0)
    assert s.ratio == 1.3 / 0.7
    assert s.a_inv(s.a(2.5)) == pytest.approx(2.5)


@pytest.mark.parametrize("a, b, expected", [(1.5, 2.5, 4.0), (0, INF, INF), (INF, INF, INF)])
def test_ext_add_examples(a, b, expected):
    assert ext_add(a, b) == expected


@pytest.mark.parametrize("bad", [math.nan, -1e-12, -INF])
def test_extreal_rejects(bad):
    with pytest.raises(ValueError):
        ExtReal(bad)


def test_extreal_order_and_flags():
    assert ExtReal(1e300) < ExtReal(INF)
    assert ExtReal(3).is_finite and not ExtReal(INF).is_finite
    assert ExtReal(1) + ExtReal(INF) == INF
    assert repr(ExtReal(INF)) == "ExtReal(inf)"


@given(ext_values, ext_values, ext_values)
def test_ext_add_algebra(a, b, c):
    assert ext_add(a, b) == ext_add(b, a)
    assert ext_add(ext_add(a, b), c) == pytest.approx(ext_add(a, ext_add(b, c)), rel=1e-12)


@given(ext_values, ext_values, ext_values)
def test_ext_add_monotone(a, a2, b):
    lo, hi = sorted([a, a2])
    assert ext_add(lo, b) <= ext_add(hi, b)


def test_ext_add_small_case_enumeration():
    vals = [0.0, 0.5, 1.0, INF]
    for a in vals:
        for b in vals:
            s = ext_add(a, b)
            assert s == (INF if INF in (a, b) else a + b)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid((0, 1), (1, 1), 5)
    with pytest.raises(ValueError):
        Grid(0, 1, 1)
    with pytest.raises(ValueError):
        Grid((0, 0), (1,), 3)


def test_grid_points_inclusive_and_lexicographic():
    g = Grid((0, 10), (1, 12), 3)
    pts = g.points()
    assert pts.shape == (9, 2)
    assert pts[0].tolist() == [0, 10] and pts[-1].tolist() == [1, 12]
    assert pts[1].tolist() == [0, 11]
    np.testing.assert_allclose(g.spacing, [0.5, 1.0])


def test_grid_refinement_is_nested():
    g = Grid(-1.0, 2.0, 7)
    fine = g.refined(4)
    assert fine.points_per_axis == 25
    assert np.all(np.isin(g.points()[:, 0], fine.points()[:, 0]))


def test_ratefn_single_and_batch():
    f = RateFn(1, lambda x: x[:, 0] ** 2, convex=True)
    assert f(3.0) == 9.0
    np.testing.assert_array_equal(f(np.array([1.0, 2.0])), [1.0, 4.0])
    g = RateFn(2, lambda x: x.sum(axis=1))
    assert g([1.0, 2.0]) == 3.0
    with pytest.raises(ValueError):
        g([1.0, 2.0, 3.0])


def test_ratefn_rejects_nan():
    f = RateFn(1, lambda x: np.full(len(x), np.nan))
    with pytest.raises(ValueError, match="NaN"):
        f(0.0)


def test_ratefn_from_scalar():
    f = RateFn.from_scalar(lambda x: abs(x), 1)
    np.testing.assert_array_equal(f.evaluate([[-2.0], [3.0]]), [2.0, 3.0])


def test_convex_flag_midpoint_sampling():
    f = RateFn(2, lambda x: np.logaddexp(x[:, 0], x[:, 1]) + x[:, 0] ** 2, convex=True)
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(500, 2)), rng.normal(size=(500, 2))
    assert np.all(f.evaluate((a + b) / 2) <= (f.evaluate(a) + f.evaluate(b)) / 2 + 1e-12)


def test_restricted_rate_checks_sign():
    J = RestrictedRate(1, lambda q: q[:, 0] - 1.0)
    assert isinstance(J(2.0), ExtReal)
    with pytest.raises(ValueError, match="negative"):
        J(0.0)
