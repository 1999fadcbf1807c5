import io
import math

import numpy as np
import pytest

from extremal_decay import sim
from extremal_decay.core import NumericalError, Scaling
from extremal_decay.gauss import GaussParams
from extremal_decay.onoff import OnOffParams
from extremal_decay.sim import (GaussianWalk, McEstimate, OnOffWalk, PathSample, RngSpec,
                                heavy_from_uniform, mc_sup_prob, mc_sweep, onoff_increments_bounded,
                                onoff_path_within_bounds, sample_heavy, sample_heavy_array,
                                simulate_gaussian, simulate_gaussian_batch, simulate_onoff,
                                slope_fit, sup_statistics, write_csv)

P = OnOffParams(0.6, 0.7, 0.5)
BM = GaussParams.identity(1, 1.0)


class TestRng:
    def test_reproducible(self):
        a = RngSpec(5, 2).generator().random(5)
        b = RngSpec(5, 2).generator().random(5)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        assert RngSpec(5, 0).generator().random() != RngSpec(5, 1).generator().random()
        assert RngSpec(5, 0).substream(0).random() != RngSpec(5, 0).substream(1).random()

    def test_validation(self):
        with pytest.raises(ValueError):
            RngSpec(-1)
        with pytest.raises(ValueError):
            RngSpec(1, -1)
        with pytest.raises(TypeError):
            sample_heavy(0.5, 3)


class TestHeavy:
    def test_inverse_transform_examples(self):
        assert heavy_from_uniform(0.5, math.exp(-1)) == pytest.approx(1.0, abs=1e-15)
        assert heavy_from_uniform(0.5, 0.5) == pytest.approx(math.log(2) ** 2, rel=1e-15)

    def test_tail(self):
        x = sample_heavy_array(0.5, 1_000_000, RngSpec(11))
        p = math.exp(-math.sqrt(2.0))
        se = math.sqrt(p * (1 - p) / x.size)
        assert abs(np.mean(x >= 2.0) - p) <= 3 * se

    def test_median(self):
        x = sample_heavy_array(0.5, 200_000, RngSpec(12))
        assert np.median(x) == pytest.approx(math.log(2) ** 2, rel=0.02)

    def test_rejects_V(self):
        for V in (0.0, 1.0, 1.5):
            with pytest.raises(ValueError):
                sample_heavy(V, RngSpec(1))
            with pytest.raises(ValueError):
                sample_heavy_array(V, 3, RngSpec(1))

    def test_positive(self):
        assert sample_heavy(0.3, RngSpec(13)) > 0


class TestPathSample:
    def test_validation(self):
        with pytest.raises(ValueError):
            PathSample([1.0, 2.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            PathSample([0.0, 0.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            PathSample([0.0, 1.0], [0.0])

    def test_promotes_1d(self):
        assert PathSample([0.0, 1.0], [0.0, 1.0]).values.shape == (2, 1)


class TestOnOffPaths:
    def test_force_on(self):
        path = simulate_onoff(P, 50, RngSpec(1), force_on=True)
        np.testing.assert_array_equal(path.values[:, 0], (1 - P.c1) * path.times)
        np.testing.assert_allclose(path.values[:, 1], (2 - P.c1 - P.c2) * path.times, rtol=1e-15)

    def test_integer_times(self):
        path = simulate_onoff(P, 20.5, RngSpec(2))
        np.testing.assert_array_equal(path.times, np.arange(21.0))
        assert np.all(path.values[0] == 0)

    def test_invariants(self):
        spec = RngSpec(3)
        for j in range(50):
            path = simulate_onoff(P, 200, spec.substream(j), events=True)
            assert onoff_path_within_bounds(P, path)
            assert onoff_increments_bounded(P, path)

    def test_bound_check_detects_violation(self):
        bad = PathSample([0.0, 1.0], [[0.0, 0.0], [0.5, 0.0]])
        assert not onoff_path_within_bounds(P, bad)

    def test_increment_check_needs_integers(self):
        with pytest.raises(ValueError):
            onoff_increments_bounded(P, PathSample([0.0, 0.5, 2.0], np.zeros((3, 2))))

    def test_reproducible(self):
        a = simulate_onoff(P, 100, RngSpec(4, 1), events=True)
        b = simulate_onoff(P, 100, RngSpec(4, 1), events=True)
        np.testing.assert_array_equal(a.times, b.times)
        np.testing.assert_array_equal(a.values, b.values)

    def test_mean_drift(self):
        spec = RngSpec(5)
        T = 100
        end = np.array([simulate_onoff(P, T, spec.substream(j)).values[-1] for j in range(1000)])
        mean = np.array([0.5 - P.c1, 1 - P.c1 - P.c2]) * T
        z = (end.mean(axis=0) - mean) / (end.std(axis=0, ddof=1) / math.sqrt(len(end)))
        assert np.all(np.abs(z) <= 4)

    def test_rejects_horizon(self):
        with pytest.raises(ValueError):
            simulate_onoff(P, 0, RngSpec(1))


class TestGaussianPaths:
    def test_starts_at_zero(self):
        path = simulate_gaussian(GaussParams.identity(2, 0.7), 30, 0.1, RngSpec(1))
        assert np.all(path.values[0] == 0)
        assert path.values.shape == (31, 2)

    def test_iid_increments_at_gamma_one(self):
        W = simulate_gaussian_batch(BM, 20, 0.5, 20_000, RngSpec(2))[:, :, 0]
        inc = np.diff(W, axis=1) + 0.5
        assert inc.var() == pytest.approx(0.5, rel=0.02)
        assert abs(np.corrcoef(inc[:, 3], inc[:, 4])[0, 1]) < 0.03

    def test_variance_and_covariance(self):
        g = GaussParams([[1.0]], [2.0], 0.6)
        step, n, m = 0.2, 40, 20_000
        W = simulate_gaussian_batch(g, n, step, m, RngSpec(3))[:, :, 0]
        t = step * np.arange(n + 1)
        Y = W + t
        for j in (5, 20, 40):
            var = 2.0 * t[j] ** 0.6
            assert abs(Y[:, j].var() - var) <= 4 * var * math.sqrt(2 / m)
        s, u = t[10], t[30]
        cov = 0.5 * 2.0 * (s ** 0.6 + u ** 0.6 - (u - s) ** 0.6)
        emp = np.mean(Y[:, 10] * Y[:, 30])
        sd = np.std(Y[:, 10] * Y[:, 30]) / math.sqrt(m)
        assert abs(emp - cov) <= 4 * sd

    def test_grid_limits(self):
        with pytest.raises(ValueError):
            simulate_gaussian(BM, sim.MAX_GAUSS_STEPS + 1, 0.1, RngSpec(1))
        with pytest.raises(ValueError):
            simulate_gaussian(BM, 10, 0.0, RngSpec(1))

    def test_cholesky_failure(self, monkeypatch):
        def fail(_):
            raise np.linalg.LinAlgError("not positive definite")

        monkeypatch.setattr(np.linalg, "cholesky", fail)
        sim._fbm_cholesky.cache_clear()
        try:
            with pytest.raises(NumericalError, match="smaller n_steps"):
                simulate_gaussian(GaussParams.identity(1, 0.5), 17, 0.3, RngSpec(1))
        finally:
            sim._fbm_cholesky.cache_clear()

    def test_kernel_matches_cholesky_path(self):
        # gamma = 1 uses the random-walk kernel; compare its law with the generic path builder
        g = GaussParams([[1.0, 0.0], [0.4, 1.0]], [1.0, 0.5], 1.0)
        walk = GaussianWalk(g, 0.1)
        a = walk.sup_statistics([1.0, 1.0], 2.0, 40_000, RngSpec(4).generator())
        W = simulate_gaussian_batch(g, 20, 0.1, 40_000, RngSpec(5))
        b = sim._sup_stat(W, np.array([1.0, 1.0]))
        for u in (0.0, 0.2, 0.5):
            pa, pb = np.mean(a > u), np.mean(b > u)
            se = math.sqrt(pa * (1 - pa) / 40_000 + pb * (1 - pb) / 40_000)
            assert abs(pa - pb) <= 4 * se


class TestMonteCarlo:
    def test_brownian_u1(self):
        est = mc_sup_prob(GaussianWalk(BM, 0.01), 1.0, [1.0], 20, 100_000, RngSpec(1))
        assert abs(est.p_hat / math.exp(-2) - 1) <= 0.15

    def test_brownian_u0(self):
        est = mc_sup_prob(GaussianWalk(BM, 0.002), 0.0, [1.0], 10, 10_000, RngSpec(2))
        assert 0.9 < est.p_hat < 1.0

    def test_half_width_scaling(self):
        walk = GaussianWalk(BM, 0.05)
        a = mc_sup_prob(walk, 0.5, [1.0], 10, 4_000, RngSpec(3))
        b = mc_sup_prob(walk, 0.5, [1.0], 10, 16_000, RngSpec(3))
        assert b.half_width_95 / a.half_width_95 == pytest.approx(0.5, rel=0.2)

    def test_monotone_in_u(self):
        est = mc_sweep(GaussianWalk(BM, 0.05), [0.0, 0.5, 1.0, 1.5], [1.0], 20, 5_000, RngSpec(4))
        p = [e.p_hat for e in est]
        assert p == sorted(p, reverse=True)

    def test_refuses_short_horizon(self):
        with pytest.raises(ValueError, match="truncation below most-likely epoch"):
            mc_sup_prob(GaussianWalk(BM, 0.05), 1.0, [1.0], 5, 1_000, RngSpec(1))

    def test_input_checks(self):
        walk = GaussianWalk(BM, 0.05)
        with pytest.raises(ValueError):
            mc_sup_prob(walk, 1.0, [1.0], 20, 99, RngSpec(1))
        with pytest.raises(ValueError):
            mc_sup_prob(walk, -1.0, [1.0], 20, 100, RngSpec(1))
        with pytest.raises(ValueError):
            mc_sup_prob(walk, 1.0, [0.0], 20, 100, RngSpec(1))
        with pytest.raises(ValueError):
            walk.n_steps(1.03)
        with pytest.raises(TypeError):
            sup_statistics(walk, [1.0], 1.0, 100, np.random.default_rng(0))

    def test_chunking_and_workers(self):
        walk = GaussianWalk(BM, 0.1)
        a = sup_statistics(walk, [1.0], 2.0, 1_000, RngSpec(6), chunk_size=250)
        b = sup_statistics(walk, [1.0], 2.0, 1_000, RngSpec(6), chunk_size=250, workers=3)
        np.testing.assert_array_equal(a, b)

    def test_onoff_walk(self):
        walk = OnOffWalk(P)
        q = [0.5, 0.5]
        stats = sup_statistics(walk, q, 100, 2_000, RngSpec(7))
        assert np.all(stats >= 0)
        assert np.mean(stats > 0.0) > np.mean(stats > 2.0)
        assert walk.most_likely_epoch(q, 2.0) == pytest.approx(2.0 * walk.most_likely_epoch(q, 1.0))

    def test_onoff_walk_matches_exact_paths(self):
        # integer-time kernel values against the exact path simulator, in distribution
        walk = OnOffWalk(P)
        q = np.array([0.5, 0.5])
        a = walk.sup_statistics(q, 30, 4_000, RngSpec(8).generator())
        spec = RngSpec(9)
        b = np.array([sim._sup_stat(simulate_onoff(P, 30, spec.substream(j)).values[None], q)[0]
                      for j in range(4_000)])
        for u in (0.5, 1.0, 2.0):
            pa, pb = np.mean(a > u), np.mean(b > u)
            se = math.sqrt((pa * (1 - pa) + pb * (1 - pb)) / 4_000) + 1e-12
            assert abs(pa - pb) <= 4 * se


class TestEstimates:
    def test_from_count(self):
        e = McEstimate.from_count(1.0, 25, 100)
        assert e.p_hat == 0.25
        assert e.half_width_95 == pytest.approx(1.96 * math.sqrt(0.25 * 0.75 / 100))

    def test_validation(self):
        with pytest.raises(ValueError):
            McEstimate(1.0, 1.5, 10, 0.1)

    def test_slope_exact(self):
        s = Scaling(2.0, 1.0)
        est = [McEstimate(u, math.exp(-2.0 * u ** 0.5), 1000, 0.01) for u in (1.0, 2.0, 3.0)]
        fit = slope_fit(est, s)
        assert fit.k_hat == pytest.approx(2.0, rel=1e-12)
        assert fit.stderr > 0
        assert set(fit.as_dict()) == {"k_hat", "stderr"}

    def test_slope_degenerate(self):
        s = Scaling(1.0, 1.0)
        with pytest.raises(ValueError, match="degenerate"):
            slope_fit([McEstimate(u, 0.0, 100, 0.0) for u in (1, 2, 3)], s)
        with pytest.raises(ValueError, match="at least 3"):
            slope_fit([McEstimate(1, 0.5, 100, 0.1), McEstimate(2, 0.0, 100, 0.0),
                       McEstimate(3, 0.2, 100, 0.1)], s)

    def test_csv(self):
        buf = io.StringIO()
        write_csv(buf, [McEstimate.from_count(0.5, 3, 100)], 20, 7)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "u,p_hat,half_width_95,n_paths,N,seed"
        assert lines[1].startswith("0.5,0.03,") and lines[1].endswith(",100,20,7")
