import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import make_window
from oracles import dense_nll
from simcca.covariance import joint_covariance
from simcca.data import PairedWindow
from simcca.pcca import (
    IDENTITY,
    UNCONSTRAINED,
    ConstraintMode,
    EmConfig,
    ModelParams,
    em_fit,
    fit_covariance,
    negative_log_likelihood,
    objective,
    penalty,
    penalty_grad,
    posterior_latent,
)
from simcca.scan import dependency_score
from simcca.synth import GeneratorSpec, generate

SOFT = ConstraintMode.soft(0.5)
MODES = [UNCONSTRAINED, IDENTITY, SOFT, ConstraintMode.soft(0.5, squared=True)]


def eq2_window(seed, n=400, p=4, shared=True, signal=1.0):
    rng = np.random.default_rng(seed)
    wx = signal * rng.standard_normal((p, 1))
    wy = wx.copy() if shared else signal * rng.standard_normal((p, 1))
    eye = np.eye(p)
    paired, spec, z = generate(GeneratorSpec(n, p, 1, wx, wy, eye, eye, seed))
    return PairedWindow.from_arrays(paired.x_matched, paired.y_matched), spec, z


def random_params(seed, p=3, d=1, mode=UNCONSTRAINED):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, p, p))
    return ModelParams(
        rng.standard_normal((p, d)), rng.standard_normal((p, d)),
        a @ a.T + np.eye(p), b @ b.T + np.eye(p), mode,
    )


class TestLikelihood:
    def test_zero_loading(self):
        params = ModelParams(np.zeros((1, 1)), np.zeros((1, 1)), np.eye(1), np.eye(1))
        assert objective(params, np.eye(2)) == pytest.approx(2.0, abs=1e-14)

    def test_scalar_by_hand(self):
        one = np.ones((1, 1))
        params = ModelParams(one, one, one, one)
        # Sigma = [[2, 1], [1, 2]], det 3, trace(Sigma^-1) = 4/3
        assert objective(params, np.eye(2)) == pytest.approx(math.log(3) + 4 / 3, abs=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("mode", MODES, ids=str)
    def test_matches_dense(self, seed, mode):
        win = make_window(seed, p=3)
        params = random_params(seed, mode=mode)
        sigma = None if mode.kind != "soft" else mode.sigma_t
        # unsquared penalty is the norm, squared form the norm squared
        ref = dense_nll(params.wx, params.wy, params.psix, params.psiy,
                        joint_covariance(win), sigma, mode.squared)
        assert abs(negative_log_likelihood(params, win) - ref) < 1e-10

    def test_unpenalized(self):
        win = make_window(0, p=3)
        params = random_params(0, mode=SOFT)
        diff = negative_log_likelihood(params, win) - negative_log_likelihood(params, win, False)
        assert diff == pytest.approx(penalty(params.wx, params.wy, SOFT), rel=1e-12)

    def test_identity_loading_penalty_floor(self):
        w = np.array([[1.0], [2.0], [0.5]])
        # rank-one T = w w^+ leaves ||T - I||^2 = p - d
        assert penalty(w, w, SOFT) == pytest.approx(math.sqrt(2) / 0.25, rel=1e-12)
        assert penalty(w, w, IDENTITY) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            negative_log_likelihood(random_params(0, p=2), make_window(0, p=3))

    @pytest.mark.parametrize("squared", [False, True])
    @pytest.mark.parametrize("d", [1, 2])
    def test_penalty_gradient_finite_difference(self, squared, d):
        mode = ConstraintMode.soft(0.7, squared)
        params = random_params(3, p=4, d=d)
        gx, gy = penalty_grad(params.wx, params.wy, mode)
        h = 1e-6
        for which, g in ((0, gx), (1, gy)):
            num = np.zeros_like(g)
            for idx in np.ndindex(g.shape):
                mats = [params.wx.copy(), params.wy.copy()]
                mats[which][idx] += h
                up = penalty(*mats, mode)
                mats[which][idx] -= 2 * h
                num[idx] = (up - penalty(*mats, mode)) / (2 * h)
            np.testing.assert_allclose(g, num, rtol=1e-6, atol=1e-7)


class TestPosterior:
    def test_zero_loading_gives_prior(self):
        win = make_window(1, p=2)
        params = ModelParams(np.zeros((2, 1)), np.zeros((2, 1)), np.eye(2), np.eye(2))
        post = posterior_latent(params, win)
        np.testing.assert_array_equal(post.mean, 0)
        np.testing.assert_allclose(post.covariance, [[1.0]])

    def test_scalar_by_hand(self):
        x = np.array([[1.0], [-1.0], [2.0], [-2.0]])
        y = np.array([[0.5], [0.5], [-1.0], [0.0]])
        one = np.ones((1, 1))
        post = posterior_latent(ModelParams(one, one, one, one), PairedWindow.from_arrays(x, y))
        # C = 1/3, mean = (x + y) / 3 after centering
        np.testing.assert_allclose(post.covariance, [[1 / 3]], atol=1e-15)
        np.testing.assert_allclose(post.mean[:, 0], (x[:, 0] + y[:, 0]) / 3, atol=1e-15)

    def test_covariance_independent_of_data(self):
        params = random_params(2)
        a = posterior_latent(params, make_window(1, p=3)).covariance
        b = posterior_latent(params, make_window(2, p=3, n=80)).covariance
        np.testing.assert_array_equal(a, b)

    def test_tracks_latent(self):
        win, spec, z = eq2_window(4, n=2000, p=5)
        params, post, _ = em_fit(win, 1, IDENTITY)
        r = abs(np.corrcoef(post.mean[:, 0], z[:, 0])[0, 1])
        assert r >= 0.85


class TestEm:
    @pytest.mark.parametrize("mode", MODES, ids=str)
    @pytest.mark.parametrize("seed", range(3))
    def test_monotone(self, mode, seed):
        win = make_window(seed, p=4)
        _, _, trace = em_fit(win, 1, mode, EmConfig(n_restarts=1))
        obj = np.array(trace.objective_per_iteration)
        assert np.all(np.diff(obj) <= 1e-9 * np.maximum(1, np.abs(obj[:-1])))

    @pytest.mark.parametrize("mode", MODES, ids=str)
    def test_trace_ends_at_reported_params(self, mode):
        win = make_window(5, p=3)
        params, _, trace = em_fit(win, 1, mode)
        assert trace.objective_per_iteration[-1] == pytest.approx(
            negative_log_likelihood(params, win), rel=1e-12)

    @pytest.mark.parametrize("mode", MODES, ids=str)
    def test_trace_reproducible_by_truncation(self, mode):
        win = make_window(6, p=3)
        cfg = EmConfig(n_restarts=0, tolerance=0.0, max_iterations=12)
        _, _, full = em_fit(win, 1, mode, cfg)
        for k in (1, 5, 9):
            short, _, tr = em_fit(win, 1, mode, replace(cfg, max_iterations=k))
            assert tr.iterations == k
            assert negative_log_likelihood(short, win) == pytest.approx(
                full.objective_per_iteration[k], rel=1e-12)

    def test_identity_ties_loadings(self):
        params, _, _ = em_fit(make_window(7, p=4), 1, IDENTITY)
        np.testing.assert_array_equal(params.wx, params.wy)

    @pytest.mark.parametrize("noise", ["full", "diagonal", "isotropic"])
    def test_noise_structures(self, noise):
        params, _, trace = em_fit(make_window(8, p=3), 1, UNCONSTRAINED,
                                  EmConfig(noise=noise))
        for m in (params.psix, params.psiy):
            assert np.all(np.linalg.eigvalsh(m) > 0)
            if noise != "full":
                np.testing.assert_array_equal(m, np.diag(np.diag(m)))
            if noise == "isotropic":
                assert np.all(np.diag(m) == m[0, 0])

    def test_two_latent_dimensions(self):
        params, post, trace = em_fit(make_window(9, p=4, n=200), 2, UNCONSTRAINED)
        assert params.d == 2 and post.mean.shape == (200, 2)
        assert trace.converged

    @pytest.mark.parametrize("seed", range(3))
    def test_interpolation(self, seed):
        win, _, _ = eq2_window(seed, n=300, p=3, shared=False)
        cfg = EmConfig(tolerance=1e-12, max_iterations=5000)

        def final(mode):
            params, _, _ = em_fit(win, 1, mode, cfg)
            return negative_log_likelihood(params, win, penalized=False)

        assert abs(final(ConstraintMode.soft(1e6)) - final(UNCONSTRAINED)) < 1e-3
        assert abs(final(ConstraintMode.soft(1e-6)) - final(IDENTITY)) < 1e-3

    def test_soft_between_extremes(self):
        win, _, _ = eq2_window(11, n=300, p=3, shared=False)
        free = negative_log_likelihood(em_fit(win, 1, UNCONSTRAINED)[0], win)
        tied = negative_log_likelihood(em_fit(win, 1, IDENTITY)[0], win)
        mid = negative_log_likelihood(em_fit(win, 1, SOFT)[0], win, penalized=False)
        assert free - 1e-6 <= mid <= tied + 1e-6

    @pytest.mark.parametrize("seed", range(3))
    def test_recovery(self, seed):
        win, spec, _ = eq2_window(seed, n=10000, p=5)
        params, _, _ = em_fit(win, 1, IDENTITY)
        truth = spec.dependency_score
        assert abs(dependency_score(params) - truth) <= 0.1 * truth

    def test_null_scores_low(self):
        rng = np.random.default_rng(0)
        win = PairedWindow.from_arrays(rng.standard_normal((10000, 5)),
                                       rng.standard_normal((10000, 5)))
        params, _, _ = em_fit(win, 1, IDENTITY)
        assert dependency_score(params) < 0.05

    def test_argument_errors(self):
        s = np.eye(5)
        with pytest.raises(ValueError):
            fit_covariance(s, 2, 1, IDENTITY)
        with pytest.raises(ValueError):
            fit_covariance(np.eye(4), 2, 3)
        with pytest.raises(ValueError):
            ConstraintMode.soft(0.0)
        with pytest.raises(ValueError):
            ConstraintMode("banded")
