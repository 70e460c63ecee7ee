"""Isotropic one-factor model over the concatenated views.

``z`` is scalar and the noise is ``sigma2_x I`` for x and ``sigma2_y I`` for
y.  With a single shared scale this is probabilistic PCA of ``[x, y]``: the
fitted loading points along the leading eigenvector of the joint covariance.
"""

from dataclasses import dataclass, replace

import numpy as np

from .covariance import joint_covariance
from .pcca import UNCONSTRAINED, EmConfig, ModelParams, fit_covariance, posterior_latent


@dataclass(frozen=True)
class PsimPcaParams:
    w: np.ndarray
    sigma2_x: float
    sigma2_y: float

    @property
    def p(self):
        return len(self.w) // 2

    def as_model(self):
        """Equivalent :class:`ModelParams` with ``d = 1``."""
        p = self.p
        return ModelParams(
            self.w[:p, None].copy(), self.w[p:, None].copy(),
            self.sigma2_x * np.eye(p), self.sigma2_y * np.eye(len(self.w) - p),
        )


def fit_psimpca_covariance(s, px, config=EmConfig(), shared_sigma=False):
    config = replace(config, noise="isotropic", shared_noise=shared_sigma)
    params, trace = fit_covariance(s, px, 1, UNCONSTRAINED, config)
    w = params.w[:, 0]
    if w[np.argmax(np.abs(w))] < 0:
        w = -w
    out = PsimPcaParams(w, float(params.psix[0, 0]), float(params.psiy[0, 0]))
    return out, trace


def psimpca_fit(win, config=EmConfig(), shared_sigma=False):
    """Fit the isotropic model to a window by EM.

    ``shared_sigma=True`` forces ``sigma2_x == sigma2_y`` (plain probabilistic
    PCA on the concatenated data).

    Returns ``(PsimPcaParams, LatentPosterior, EmTrace)``.
    """
    s = joint_covariance(win)
    params, trace = fit_psimpca_covariance(s, np.shape(win.x)[1], config, shared_sigma)
    return params, posterior_latent(params.as_model(), win), trace
