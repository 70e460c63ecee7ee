"""Probabilistic CCA with similarity constraints, fitted by EM.

Model: ``z ~ N(0, I_d)``, ``x ~ N(Wx z, Psix)``, ``y ~ N(Wy z, Psiy)``.  The
two views are stacked into ``t = [x; y]`` with loading ``W = [Wx; Wy]`` and
block-diagonal noise ``Psi``, so that ``cov(t) = W W' + Psi``.

The projection relating the views is ``T = Wy (Wx' Wx)^-1 Wx'``.  Three
constraint modes are supported:

* unconstrained -- ordinary probabilistic CCA;
* identity -- ``Wx = Wy``;
* soft -- the objective gains ``||T - I||_F / sigma_t^2`` (or its square).

The objective tracked everywhere is

    log|Sigma| + tr(Sigma^-1 S) [+ penalty],

with ``S`` the joint sample covariance (divisor n-1) and constants dropped.
Everything below works on ``S`` alone.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as la

from .cca import cca
from .covariance import CovarianceBlocks, default_epsilon, joint_covariance
from .errors import ConditioningError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConstraintMode:
    kind: str
    sigma_t: Optional[float] = None
    squared: bool = False

    def __post_init__(self):
        if self.kind not in ("unconstrained", "identity", "soft"):
            raise ValueError(f"unknown constraint mode {self.kind!r}")
        if self.kind == "soft":
            s = self.sigma_t
            if s is None or not (math.isfinite(s) and s > 0):
                raise ValueError("soft mode needs a finite positive sigma_t")

    @classmethod
    def soft(cls, sigma_t, squared=False):
        return cls("soft", float(sigma_t), squared)

    def __str__(self):
        if self.kind == "soft":
            return f"soft({self.sigma_t:g}{', squared' if self.squared else ''})"
        return self.kind


UNCONSTRAINED = ConstraintMode("unconstrained")
IDENTITY = ConstraintMode("identity")


@dataclass(frozen=True)
class EmConfig:
    """EM settings.

    ``noise`` is the structure of each view's noise covariance: ``"full"``,
    ``"diagonal"`` or ``"isotropic"``; ``shared_noise`` ties the isotropic
    scale of both views.  ``psi_floor`` is relative to the mean diagonal of
    the matching data block.  ``soft_steps`` caps the gradient corrections per
    sweep in soft mode.
    """

    tolerance: float = 1e-8
    max_iterations: int = 500
    n_restarts: int = 1
    seed: int = 0
    psi_floor: float = 1e-6
    noise: str = "full"
    shared_noise: bool = False
    soft_steps: int = 5


@dataclass(frozen=True)
class ModelParams:
    wx: np.ndarray
    wy: np.ndarray
    psix: np.ndarray
    psiy: np.ndarray
    mode: ConstraintMode = UNCONSTRAINED

    @property
    def d(self):
        return self.wx.shape[1]

    @property
    def w(self):
        return np.vstack([self.wx, self.wy])

    @property
    def psi(self):
        return la.block_diag(self.psix, self.psiy)

    @property
    def t(self):
        return transfer_matrix(self.wx, self.wy)


@dataclass(frozen=True)
class LatentPosterior:
    mean: np.ndarray
    covariance: np.ndarray


@dataclass(frozen=True)
class EmTrace:
    objective_per_iteration: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def transfer_matrix(wx, wy):
    """``T = Wy (Wx' Wx)^-1 Wx'``, via the pseudo-inverse of ``Wx``."""
    return wy @ np.linalg.pinv(wx)


def _penalty_parts(wx, wy):
    """``(c, e)`` with ``||T - I||_F^2 = c + e``.

    ``T - I`` splits into orthogonal pieces ``(Wy - Wx) Wx^+`` and
    ``P - I`` (``P`` the projector onto the columns of ``Wx``), so ``c`` is
    ``p - rank(Wx)`` and ``e`` is the part that vanishes at ``Wx = Wy``.
    """
    pinv = np.linalg.pinv(wx)
    rank = int(round(float(np.trace(wx @ pinv))))
    return wx.shape[0] - rank, float(np.sum(((wy - wx) @ pinv) ** 2))


def _penalty_value(parts, mode):
    if mode.kind != "soft":
        return 0.0
    h = parts[0] + parts[1]
    return (h if mode.squared else math.sqrt(h)) / mode.sigma_t**2


def _penalty_delta(new, old, mode):
    """``penalty(new) - penalty(old)`` without cancelling the constant part."""
    if mode.kind != "soft":
        return 0.0
    (c1, e1), (c0, e0) = new, old
    if c1 != c0:
        return _penalty_value(new, mode) - _penalty_value(old, mode)
    if mode.squared:
        return (e1 - e0) / mode.sigma_t**2
    den = math.sqrt(c1 + e1) + math.sqrt(c0 + e0)
    return 0.0 if den == 0 else (e1 - e0) / den / mode.sigma_t**2


def penalty(wx, wy, mode):
    """``||T - I||_F / sigma_t^2`` (squared norm if ``mode.squared``); 0 unless soft.

    When ``d < p`` the transfer matrix has rank ``d``, so even ``Wx = Wy``
    leaves a floor of ``sqrt(p - d) / sigma_t^2``.
    """
    if mode.kind != "soft":
        return 0.0
    return _penalty_value(_penalty_parts(wx, wy), mode)


def penalty_grad(wx, wy, mode):
    """Gradient of :func:`penalty` with respect to ``(wx, wy)``."""
    p = wx.shape[0]
    pinv = np.linalg.pinv(wx)
    k = np.linalg.inv(wx.T @ wx)
    dev = wy @ pinv - np.eye(p)
    h = sum(_penalty_parts(wx, wy))
    # gradients of h = ||T - I||^2
    m = wy.T @ dev
    proj_out = np.eye(p) - wx @ pinv
    gx = 2 * (-pinv.T @ m @ pinv.T + proj_out @ m.T @ k)
    gy = 2 * dev @ pinv.T
    if mode.squared:
        scale = 1.0
    else:
        scale = 0.5 / math.sqrt(h) if h > 0 else 0.0
    scale /= mode.sigma_t**2
    return scale * gx, scale * gy


def _nll(w, psi, s):
    sigma = w @ w.T + psi
    try:
        c = la.cho_factor(sigma, lower=True)
    except la.LinAlgError:
        raise ConditioningError("model covariance is not positive definite") from None
    logdet = 2.0 * float(np.sum(np.log(np.diag(c[0]))))
    return logdet + float(np.trace(la.cho_solve(c, s)))


def objective(params, s):
    """Penalized negative log-likelihood for a joint covariance ``s``."""
    return _nll(params.w, params.psi, s) + penalty(params.wx, params.wy, params.mode)


def negative_log_likelihood(params, win, penalized=True):
    """``log|Sigma| + tr(Sigma^-1 S)`` plus the soft-mode penalty.

    ``S`` is the unregularized joint covariance of the window.  Identity and
    unconstrained modes carry no penalty; ``penalized=False`` drops it for
    soft mode too.
    """
    p = params.wx.shape[0] + params.wy.shape[0]
    if np.shape(win.x)[1] + np.shape(win.y)[1] != p:
        raise ValueError("parameter dimensions do not match the window")
    s = joint_covariance(win)
    if not penalized:
        return _nll(params.w, params.psi, s)
    return objective(params, s)


def _psi_inv(psix, psiy):
    return la.block_diag(np.linalg.inv(psix), np.linalg.inv(psiy))


def _estep(w, psix, psiy, s):
    """Posterior covariance ``C``, mean map ``B`` and moments ``B S``, ``G``."""
    d = w.shape[1]
    pinv = _psi_inv(psix, psiy)
    wtp = w.T @ pinv
    m = np.eye(d) + wtp @ w
    cov = np.linalg.inv(m)
    cov = (cov + cov.T) / 2
    b = cov @ wtp
    bs = b @ s
    g = cov + bs @ b.T
    return cov, b, bs, (g + g.T) / 2, pinv


def posterior_latent(params, win):
    """Posterior mean of ``z`` per sample and the shared posterior covariance."""
    x = np.asarray(win.x, float)
    y = np.asarray(win.y, float)
    if x.shape[1] != params.wx.shape[0] or y.shape[1] != params.wy.shape[0]:
        raise ValueError("parameter dimensions do not match the window")
    t = np.hstack([x - x.mean(axis=0), y - y.mean(axis=0)])
    pinv = _psi_inv(params.psix, params.psiy)
    w = params.w
    cov = np.linalg.inv(np.eye(params.d) + w.T @ pinv @ w)
    cov = (cov + cov.T) / 2
    return LatentPosterior(t @ (cov @ w.T @ pinv).T, cov)


def _residual(w, bs, g, s):
    r = s - w @ bs - bs.T @ w.T + w @ g @ w.T
    return (r + r.T) / 2


def _surrogate(w, pinv, bs, g, s, psi_logdet):
    """EM upper bound on the NLL (up to a constant) at fixed E-step moments."""
    return psi_logdet + float(np.sum(pinv * _residual(w, bs, g, s)))


class _Fitter:
    def __init__(self, s, px, mode, config):
        self.s = s
        self.px = px
        self.mode = mode
        self.config = config
        self.sx = s[:px, :px]
        self.sy = s[px:, px:]
        self.floor_x = config.psi_floor * float(np.mean(np.diag(self.sx)))
        self.floor_y = config.psi_floor * float(np.mean(np.diag(self.sy)))
        if not (self.floor_x > 0 and self.floor_y > 0):
            raise ConditioningError("a view has zero variance")

    def params(self, w, psix, psiy):
        px = self.px
        wx, wy = w[:px].copy(), w[px:].copy()
        if self.mode.kind == "identity":
            wy = wx.copy()
        return ModelParams(wx, wy, psix, psiy, self.mode)

    def value(self, w, psix, psiy):
        """``(nll, penalty parts)``; see :meth:`total` and :meth:`delta`."""
        px = self.px
        parts = _penalty_parts(w[:px], w[px:]) if self.mode.kind == "soft" else (0, 0.0)
        return _nll(w, la.block_diag(psix, psiy), self.s), parts

    def total(self, v):
        return v[0] + _penalty_value(v[1], self.mode)

    def delta(self, new, old):
        return new[0] - old[0] + _penalty_delta(new[1], old[1], self.mode)

    # noise updates

    def _floor(self, m, floor):
        vals, vecs = np.linalg.eigh((m + m.T) / 2)
        if vals.min() >= floor:
            return (m + m.T) / 2
        vals = np.maximum(vals, floor)
        out = (vecs * vals) @ vecs.T
        return (out + out.T) / 2

    def noise(self, r):
        px = self.px
        rx, ry = r[:px, :px], r[px:, px:]
        kind = self.config.noise
        if kind == "full":
            return self._floor(rx, self.floor_x), self._floor(ry, self.floor_y)
        if kind == "diagonal":
            return (np.diag(np.maximum(np.diag(rx), self.floor_x)),
                    np.diag(np.maximum(np.diag(ry), self.floor_y)))
        if kind == "isotropic":
            py = len(ry)
            if self.config.shared_noise:
                v = (np.trace(rx) + np.trace(ry)) / (px + py)
                vx = vy = max(v, min(self.floor_x, self.floor_y))
            else:
                vx = max(np.trace(rx) / px, self.floor_x)
                vy = max(np.trace(ry) / py, self.floor_y)
            return vx * np.eye(px), vy * np.eye(py)
        raise ValueError(f"unknown noise structure {kind!r}")

    # loading updates

    def w_unconstrained(self, bs, g):
        return la.solve(g, bs, assume_a="pos").T

    def w_identity(self, bs, g, psix, psiy):
        px = self.px
        ix, iy = np.linalg.inv(psix), np.linalg.inv(psiy)
        sbt = bs.T
        rhs = ix @ sbt[:px] + iy @ sbt[px:]
        w = la.solve(ix + iy, rhs, assume_a="pos")
        w = la.solve(g, w.T, assume_a="pos").T
        return np.vstack([w, w])

    def w_soft(self, w_old, bs, g, psix, psiy, pinv):
        px = self.px

        def bound(w):
            parts = _penalty_parts(w[:px], w[px:])
            return _surrogate(w, pinv, bs, g, self.s, 0.0), parts

        cands = [
            w_old,
            self.w_unconstrained(bs, g),
            self.w_identity(bs, g, psix, psiy),
        ]
        w, val = cands[0], bound(cands[0])
        for c in cands[1:]:
            cv = bound(c)
            if self.delta(cv, val) < 0:
                w, val = c, cv
        lip = 2 * np.linalg.norm(pinv, 2) * np.linalg.norm(g, 2)
        for _ in range(self.config.soft_steps):
            gx, gy = penalty_grad(w[:px], w[px:], self.mode)
            grad = 2 * pinv @ (w @ g - bs.T) + np.vstack([gx, gy])
            eta = 1.0 / lip
            for _ in range(60):
                trial = w - eta * grad
                tv = bound(trial)
                if self.delta(tv, val) < 0:
                    break
                eta /= 2
            else:
                break
            w, val = trial, tv
        return w

    def run(self, w, psix, psiy):
        cfg = self.config
        cur = self.value(w, psix, psiy)
        trace = [self.total(cur)]
        converged = False
        it = 0
        for it in range(1, cfg.max_iterations + 1):
            _, _, bs, g, pinv = _estep(w, psix, psiy, self.s)
            if self.mode.kind == "unconstrained":
                w_new = self.w_unconstrained(bs, g)
            elif self.mode.kind == "identity":
                w_new = self.w_identity(bs, g, psix, psiy)
            else:
                w_new = self.w_soft(w, bs, g, psix, psiy, pinv)
            psix_new, psiy_new = self.noise(_residual(w_new, bs, g, self.s))
            new = self.value(w_new, psix_new, psiy_new)
            change = self.delta(new, cur)
            scale = max(abs(cur[0]), 1.0)
            if change > 0:
                # only rounding or eigenvalue flooring can get here; keep the old point
                converged = change <= cfg.tolerance * scale
                if not converged:
                    logger.warning("EM step increased the objective by %.3g; stopping", change)
                it -= 1
                break
            w, psix, psiy, cur = w_new, psix_new, psiy_new, new
            trace.append(self.total(cur))
            if -change < cfg.tolerance * scale:
                converged = True
                break
        return self.params(w, psix, psiy), EmTrace(trace, it, converged)

    # starting points

    def init_cca(self, d):
        px = self.px
        blocks = CovarianceBlocks(
            self.sx, self.sy, self.s[:px, px:], 0, 0.0
        )
        eps = default_epsilon(self.sx, self.sy)
        blocks = CovarianceBlocks(
            self.sx + eps * np.eye(px), self.sy + eps * np.eye(len(self.sy)),
            blocks.sxy, 0, eps,
        )
        sol = cca(blocks, d)
        root = np.sqrt(np.asarray(sol.correlations))
        wx = blocks.sxx @ np.column_stack(sol.vx) * root
        wy = blocks.syy @ np.column_stack(sol.vy) * root
        return np.vstack([wx, wy])

    def diag_psi(self, w):
        px = self.px
        resid = np.diag(self.s) - np.sum(w**2, axis=1)
        rx = np.maximum(resid[:px], self.floor_x)
        ry = np.maximum(resid[px:], self.floor_y)
        if self.config.noise == "isotropic":
            r = self.noise(np.diag(np.concatenate([rx, ry])))
            return r
        return np.diag(rx), np.diag(ry)

    def identity_start(self, w):
        px = self.px
        shared = (w[:px] + w[px:]) / 2
        return np.vstack([shared, shared])

    def starts(self, d):
        px = self.px
        base = self.init_cca(d)
        out = []
        if self.mode.kind == "unconstrained":
            out.append(base)
        elif self.mode.kind == "identity":
            out.append(self.identity_start(base))
        else:
            both = [base, self.identity_start(base)]
            vals = [self.value(w, *self.diag_psi(w)) for w in both]
            out.append(both[1] if self.delta(vals[1], vals[0]) < 0 else both[0])
        rng = np.random.default_rng(self.config.seed)
        scale = math.sqrt(float(np.mean(np.diag(self.s))) / d)
        for _ in range(self.config.n_restarts):
            w = 0.5 * scale * rng.standard_normal((len(self.s), d))
            if self.mode.kind == "identity":
                w[px:] = w[:px]
            out.append(w)
        return out


def fit_covariance(s, px, d=1, mode=UNCONSTRAINED, config=EmConfig()):
    """Fit the model to a joint covariance ``s`` whose first ``px`` rows are x.

    Returns ``(ModelParams, EmTrace)`` of the best start (lowest final
    objective; earliest start on ties).
    """
    s = np.asarray(s, dtype=np.float64)
    py = len(s) - px
    if mode.kind != "unconstrained" and px != py:
        raise ValueError("constrained modes need views of equal dimension")
    if not 1 <= d <= min(px, py):
        raise ValueError(f"latent dimension d={d} must be in [1, {min(px, py)}]")
    fitter = _Fitter(s, px, mode, config)
    best = None
    for w0 in fitter.starts(d):
        params, trace = fitter.run(w0, *fitter.diag_psi(w0))
        if best is None or trace.objective_per_iteration[-1] < best[1].objective_per_iteration[-1]:
            best = (params, trace)
    return best


def em_fit(win, d=1, mode=UNCONSTRAINED, config=EmConfig()):
    """Fit probabilistic (Sim)CCA to a window by EM.

    The E-step computes the posterior of ``z``: covariance
    ``C = (I + W' Psi^-1 W)^-1`` and mean ``C W' Psi^-1 t``.  The M-step
    depends on ``mode``:

    * unconstrained: regression of both views on the latent moments;
    * identity: one loading shared by both views, from the pooled regression
      weighted by each view's noise precision;
    * soft: the better of the two updates above and the current loading,
      followed by backtracking gradient steps on the penalized bound.

    Noise covariances are then re-estimated from the residual moments.  Steps
    that would increase the objective are refused, so the trace is monotone.

    Starts from the classical CCA solution scaled by the root canonical
    correlations, plus ``config.n_restarts`` seeded random starts.

    Returns
    -------
    params : ModelParams
    posterior : LatentPosterior
    trace : EmTrace
    """
    x = np.asarray(win.x)
    s = joint_covariance(win)
    params, trace = fit_covariance(s, x.shape[1], d, mode, config)
    return params, posterior_latent(params, win), trace
