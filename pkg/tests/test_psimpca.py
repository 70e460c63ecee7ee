import numpy as np
import pytest

from simcca.covariance import joint_covariance
from simcca.data import PairedWindow
from simcca.pcca import EmConfig, UNCONSTRAINED, em_fit
from simcca.psimpca import PsimPcaParams, fit_psimpca_covariance, psimpca_fit
from simcca.scan import dependency_score
from simcca.synth import GeneratorSpec, generate

TIGHT = EmConfig(tolerance=1e-15, max_iterations=20000)


def angle(a, b):
    c = abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.arccos(min(c, 1.0)))


def isotropic_window(seed, n=500, p=4, noise_y=1.0):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal((p, 1))
    spec = GeneratorSpec(n, p, 1, w, w, np.eye(p), noise_y * np.eye(p), seed)
    paired, spec, _ = generate(spec)
    return PairedWindow.from_arrays(paired.x_matched, paired.y_matched), spec


def test_closed_form_diagonal():
    s = np.diag([4.0, 1.0, 1.0, 1.0])
    params, trace = fit_psimpca_covariance(s, 2, TIGHT, shared_sigma=True)
    # probabilistic PCA: w = sqrt(4 - 1) e1, sigma^2 = mean of the rest
    np.testing.assert_allclose(params.w, [np.sqrt(3), 0, 0, 0], atol=1e-6)
    assert params.sigma2_x == pytest.approx(1.0, abs=1e-6)
    assert params.sigma2_y == params.sigma2_x


@pytest.mark.parametrize("seed", range(4))
def test_shared_sigma_is_pca(seed):
    win, _ = isotropic_window(seed)
    params, post, trace = psimpca_fit(win, TIGHT, shared_sigma=True)
    vals, vecs = np.linalg.eigh(joint_covariance(win))
    assert angle(params.w, vecs[:, -1]) < 1e-6
    assert params.sigma2_x == pytest.approx(np.mean(vals[:-1]), rel=1e-6)
    assert post.mean.shape == (500, 1)


def test_separate_scales():
    win, _ = isotropic_window(3, n=5000, noise_y=4.0)
    params, _, _ = psimpca_fit(win)
    assert params.sigma2_x == pytest.approx(1.0, rel=0.1)
    assert params.sigma2_y == pytest.approx(4.0, rel=0.1)


def test_matches_isotropic_pcca():
    win, _ = isotropic_window(5)
    params, _, t1 = psimpca_fit(win, TIGHT)
    model, _, t2 = em_fit(win, 1, UNCONSTRAINED, EmConfig(
        tolerance=1e-15, max_iterations=20000, noise="isotropic"))
    assert t1.objective_per_iteration[-1] == pytest.approx(t2.objective_per_iteration[-1], rel=1e-10)
    assert dependency_score(params) == pytest.approx(dependency_score(model), rel=1e-6)


def test_sign_convention():
    win, _ = isotropic_window(6)
    w = psimpca_fit(win)[0].w
    assert w[np.argmax(np.abs(w))] > 0


@pytest.mark.parametrize("seed", range(3))
def test_recovery(seed):
    win, spec = isotropic_window(seed, n=10000, p=5)
    params, _, _ = psimpca_fit(win)
    truth = spec.dependency_score
    assert abs(dependency_score(params) - truth) <= 0.1 * truth


def test_null():
    rng = np.random.default_rng(1)
    win = PairedWindow.from_arrays(rng.standard_normal((10000, 5)),
                                   rng.standard_normal((10000, 5)))
    assert dependency_score(psimpca_fit(win)[0]) < 0.05


def test_as_model_shapes():
    p = PsimPcaParams(np.arange(6.0), 2.0, 3.0)
    m = p.as_model()
    assert m.wx.shape == (3, 1) and m.wy.shape == (3, 1)
    np.testing.assert_array_equal(m.psiy, 3.0 * np.eye(3))
