"""Classical canonical correlation analysis by whitening and SVD."""

from dataclasses import dataclass
from typing import List

import numpy as np
import scipy.linalg as la

from .errors import ConditioningError


@dataclass(frozen=True)
class CcaSolution:
    vx: List[np.ndarray]
    vy: List[np.ndarray]
    correlations: List[float]

    @property
    def first(self):
        return self.correlations[0]


def _cholesky(m, name):
    try:
        return la.cholesky(m, lower=True)
    except la.LinAlgError:
        raise ConditioningError(f"Cholesky factorization of {name} failed") from None


def cca(blocks, k=1):
    """Top ``k`` canonical pairs of ``blocks``.

    With ``sxx = Lx Lx^T`` and ``syy = Ly Ly^T``, the singular values of
    ``Lx^-1 sxy Ly^-T`` are the canonical correlations and the back-transformed
    singular vectors are the projections, normalized so that
    ``vx^T sxx vx = vy^T syy vy = 1``.

    Each ``vx`` is signed so its largest-magnitude entry is positive; ``vy``
    follows so that the correlation stays non-negative.
    """
    px, py = blocks.sxx.shape[0], blocks.syy.shape[0]
    if not 1 <= k <= min(px, py):
        raise ValueError(f"k must be in [1, {min(px, py)}], got {k}")
    lx = _cholesky(blocks.sxx, "sxx")
    ly = _cholesky(blocks.syy, "syy")
    m = la.solve_triangular(lx, blocks.sxy, lower=True)
    m = la.solve_triangular(ly, m.T, lower=True).T
    u, s, vt = la.svd(m, full_matrices=False)
    vx_all = la.solve_triangular(lx.T, u[:, :k], lower=False)
    vy_all = la.solve_triangular(ly.T, vt[:k].T, lower=False)

    vx, vy = [], []
    for i in range(k):
        a, b = vx_all[:, i], vy_all[:, i]
        if a[np.argmax(np.abs(a))] < 0:
            a, b = -a, -b
        vx.append(a)
        vy.append(b)
    corr = [float(np.clip(c, 0.0, 1.0)) for c in s[:k]]
    return CcaSolution(vx, vy, corr)
