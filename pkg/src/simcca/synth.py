"""Synthetic paired data from the shared-latent Gaussian model.

Random numbers
--------------
All draws come from one ``numpy.random.PCG64(seed)`` stream consumed through
``Generator.random`` (53-bit uniforms on [0, 1)).  Standard normals are made
by Box-Muller in a fixed order: uniforms are taken in consecutive pairs
``(u1, u2)`` and yield ``r cos(2 pi u2)`` then ``r sin(2 pi u2)`` with
``r = sqrt(-2 log(1 - u1))``.  The stream fills, in row-major order, the
latent matrix ``z`` (n x d), then the x noise (n x p), then the y noise
(n x p).  Correlated noise is ``e @ chol(psi)'``.
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .data import FeatureMeta, PairedDataset, ViewMatrix
from .errors import ValidationError

CHROMOSOME = "chrS"
SPACING_BP = 10000


def box_muller(rng, size):
    """``size`` standard normals from ``rng.random`` (see module docstring)."""
    m = int(np.prod(size))
    u = rng.random(2 * ((m + 1) // 2)).reshape(-1, 2)
    r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    theta = 2.0 * np.pi * u[:, 1]
    out = np.column_stack([r * np.cos(theta), r * np.sin(theta)]).ravel()
    return out[:m].reshape(size)


@dataclass(frozen=True)
class GeneratorSpec:
    n: int
    p: int
    d: int
    wx: np.ndarray
    wy: np.ndarray
    psix: np.ndarray
    psiy: np.ndarray
    seed: int = 0
    planted_regions: Optional[List[Tuple[int, int]]] = field(default=None)

    def __post_init__(self):
        n, p, d = self.n, self.p, self.d
        if n < 1 or p < 1 or d < 1:
            raise ValidationError("n, p and d must be positive")
        for name, shape in (("wx", (p, d)), ("wy", (p, d)), ("psix", (p, p)), ("psiy", (p, p))):
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if value.shape != shape:
                raise ValidationError(f"{name} has shape {value.shape}, expected {shape}")
            object.__setattr__(self, name, value)
        for name in ("psix", "psiy"):
            m = getattr(self, name)
            if not np.allclose(m, m.T):
                raise ValidationError(f"{name} is not symmetric")
            try:
                np.linalg.cholesky(m)
            except np.linalg.LinAlgError:
                raise ValidationError(f"{name} is not positive definite") from None
        if self.planted_regions is not None:
            regions = [tuple(map(int, r)) for r in self.planted_regions]
            for a, b in regions:
                if not 0 <= a < b <= p:
                    raise ValidationError(f"planted region {a}:{b} outside [0, {p})")
            object.__setattr__(self, "planted_regions", regions)

    @property
    def w(self):
        return np.vstack([self.wx, self.wy])

    @property
    def psi(self):
        z = np.zeros((self.p, self.p))
        return np.block([[self.psix, z], [z, self.psiy]])

    @property
    def covariance(self):
        """Model covariance ``W W' + Psi`` of the stacked views."""
        return self.w @ self.w.T + self.psi

    @property
    def dependency_score(self):
        return float(np.trace(self.w @ self.w.T) / np.trace(self.psi))

    def to_dict(self):
        return {
            "n": self.n, "p": self.p, "d": self.d, "seed": self.seed,
            "wx": self.wx.tolist(), "wy": self.wy.tolist(),
            "psix": self.psix.tolist(), "psiy": self.psiy.tolist(),
            "planted_regions": self.planted_regions,
            "dependency_score": self.dependency_score,
        }


def planted_spec(n, p, regions, seed=0, loading=1.0, noise=1.0):
    """Loadings ``loading`` inside each region (one latent per region), 0 elsewhere.

    ``psi = noise * I`` in both views; regions are half-open index ranges.
    """
    regions = [tuple(r) for r in regions]
    d = max(len(regions), 1)
    w = np.zeros((p, d))
    for k, (a, b) in enumerate(regions):
        w[a:b, k] = loading
    eye = noise * np.eye(p)
    return GeneratorSpec(n, p, d, w, w.copy(), eye, eye.copy(), seed, regions)


def probe_ids(p):
    return [f"g{i:04d}" for i in range(p)]


def generate(spec):
    """Draw a :class:`PairedDataset` from ``spec``.

    Features sit on chromosome ``chrS`` at ``10000 * (index + 1)`` bp and
    carry the same probe id in both views, so they pair at distance 0.

    Returns ``(paired, spec, z)`` with ``z`` the drawn latent matrix.
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    z = box_muller(rng, (spec.n, spec.d))
    ex = box_muller(rng, (spec.n, spec.p)) @ np.linalg.cholesky(spec.psix).T
    ey = box_muller(rng, (spec.n, spec.p)) @ np.linalg.cholesky(spec.psiy).T
    x = z @ spec.wx.T + ex
    y = z @ spec.wy.T + ey
    feats = tuple(
        FeatureMeta(pid, CHROMOSOME, SPACING_BP * (i + 1))
        for i, pid in enumerate(probe_ids(spec.p))
    )
    samples = tuple(f"s{j:03d}" for j in range(spec.n))
    paired = PairedDataset(
        ViewMatrix(feats, x, samples),
        ViewMatrix(feats, y, samples),
        tuple((i, i, 0) for i in range(spec.p)),
    )
    return paired, spec, z


def planted_probe_ids(spec):
    ids = probe_ids(spec.p)
    return [ids[i] for a, b in (spec.planted_regions or []) for i in range(a, b)]


def truth_json(spec):
    data = spec.to_dict()
    data["planted_probe_ids"] = planted_probe_ids(spec)
    return json.dumps(data, indent=1) + "\n"
