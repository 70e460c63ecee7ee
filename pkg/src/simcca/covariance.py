"""Empirical covariance blocks of a paired window."""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, InsufficientSamplesError


@dataclass(frozen=True)
class CovarianceBlocks:
    sxx: np.ndarray
    syy: np.ndarray
    sxy: np.ndarray
    n: int
    regularization: float

    @property
    def p(self):
        return self.sxx.shape[0]

    def joint(self, regularized=True):
        """The full ``(px+py) x (px+py)`` covariance."""
        sxx, syy = self.sxx, self.syy
        if not regularized:
            sxx = sxx - self.regularization * np.eye(len(sxx))
            syy = syy - self.regularization * np.eye(len(syy))
        return np.block([[sxx, self.sxy], [self.sxy.T, syy]])

    def scaled(self, c):
        return CovarianceBlocks(
            c * self.sxx, c * self.syy, c * self.sxy, self.n, c * self.regularization
        )


def _sym(a):
    return (a + a.T) / 2


def default_epsilon(sxx, syy):
    return 1e-8 * float(np.mean(np.concatenate([np.diag(sxx), np.diag(syy)])))


def covariance_blocks(win, epsilon=None):
    """Covariance blocks with divisor n-1 and ``epsilon`` added to both diagonals.

    ``win`` is anything with ``x`` and ``y`` sample-by-feature arrays.  The
    columns are re-centered here regardless of preprocessing.  ``epsilon=None``
    picks ``1e-8`` times the mean diagonal entry.
    """
    x = np.asarray(win.x, dtype=np.float64)
    y = np.asarray(win.y, dtype=np.float64)
    n = x.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {n}")
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    sxx = _sym(x.T @ x / (n - 1))
    syy = _sym(y.T @ y / (n - 1))
    sxy = x.T @ y / (n - 1)
    if epsilon is None:
        epsilon = default_epsilon(sxx, syy)
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    sxx = sxx + epsilon * np.eye(len(sxx))
    syy = syy + epsilon * np.eye(len(syy))
    for name, m in (("sxx", sxx), ("syy", syy)):
        try:
            np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            raise ConditioningError(
                f"{name} is not positive definite with epsilon={epsilon:g}; "
                "use a larger epsilon"
            ) from None
    return CovarianceBlocks(sxx, syy, sxy, n, float(epsilon))


def joint_covariance(win):
    """Unregularized ``2p x 2p`` covariance of ``[x, y]`` with divisor n-1."""
    t = np.hstack([np.asarray(win.x, float), np.asarray(win.y, float)])
    n = t.shape[0]
    if n < 2:
        raise InsufficientSamplesError(f"need at least 2 samples, got {n}")
    t = t - t.mean(axis=0)
    return _sym(t.T @ t / (n - 1))
