import os
import subprocess
import sys

import numpy as np
import pytest

from extremal_decay import _fallback, kernels

try:
    from extremal_decay import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

needs_compiled = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def gen(seed=0):
    return np.random.Generator(np.random.PCG64(seed))


@needs_compiled
@pytest.mark.parametrize("d", [1, 2, 3])
def test_gauss_backends_identical(d):
    rng = np.random.default_rng(d)
    load = np.ascontiguousarray(np.eye(d) + 0.2 * rng.normal(size=(d, d)))
    drift = np.full(d, 0.1)
    q = rng.uniform(0.5, 2, d)
    a = _kernels.gauss_walk_sup(gen(d), 300, 50, load, drift, q)
    b = _fallback.gauss_walk_sup(gen(d), 300, 50, load, drift, q)
    np.testing.assert_array_equal(a, b)


@needs_compiled
def test_onoff_backends_identical():
    a = _kernels.onoff_sources(gen(5), 50, 200, 0.6, 0.7, 0.4)
    b = _fallback.onoff_sources(gen(5), 50, 200, 0.6, 0.7, 0.4)
    np.testing.assert_array_equal(a, b)


@needs_compiled
def test_generator_state_advances_equally():
    g1, g2 = gen(9), gen(9)
    _kernels.onoff_sources(g1, 10, 30, 0.5, 0.5, 0.5)
    _fallback.onoff_sources(g2, 10, 30, 0.5, 0.5, 0.5)
    assert g1.random() == g2.random()


def test_gauss_sup_is_nonnegative_and_matches_brute_force():
    load = np.array([[1.0]])
    out = kernels.gauss_walk_sup(gen(1), 20, 10, load, np.array([0.3]), np.array([2.0]))
    z = gen(1).standard_normal((20, 10, 1))
    W = np.cumsum(z - 0.3, axis=1)[:, :, 0]
    np.testing.assert_allclose(out, np.maximum((W / 2.0).max(axis=1), 0.0), rtol=1e-15)


def test_onoff_values_within_rate_bounds():
    Z = kernels.onoff_sources(gen(2), 30, 100, 0.6, 0.7, 0.5)
    k = np.arange(101.0)
    assert np.all(Z[:, 0] == 0)
    assert np.all(Z[..., 0] >= -0.6 * k - 1e-12) and np.all(Z[..., 0] <= 0.4 * k + 1e-12)
    assert np.all(np.abs(np.diff(Z, axis=1)) <= 0.7 + 1e-12)


def test_pure_backend_forced_by_environment():
    env = dict(os.environ, EXTREMAL_DECAY_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import extremal_decay; print(extremal_decay.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backend_name():
    assert kernels.BACKEND == ("compiled" if _kernels is not None else "python")
