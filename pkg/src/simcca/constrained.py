"""Correlation-based similarity-constrained CCA.

The projections of the two views are tied by ``v_y = T v_x``.  In the strict
variant ``T = I`` and a single unit vector ``v`` maximizes

    f(v) = v' Sxy v / sqrt(v' Sxx v * v' Syy v),

the correlation between ``X v`` and ``Y v``.  The soft variant lets ``T``
move away from the identity at a cost ``||T - I||_F^2 / (2 sigma_t^2 p^2)``.

For a fixed ``v`` the correlation only depends on ``u = T v``, and the
cheapest ``T`` reaching a given ``u`` is ``I + (u - v) v'`` whose penalty is
``||u - v||^2``.  The soft problem is therefore solved over ``(v, delta)``
with ``u = v + delta``, alternating a sphere-projected gradient step in ``v``
with a proximal step in ``delta``.

The supremum is not always attained in that parametrization: when the best
pairs have ``v' u <= 0`` it sits in the limit ``u -> 0`` (``T = I - v v'``).
A second, compact parametrization by two unit vectors ``(v, w)`` with
``u = max(v'w, 0) w`` covers that limit; both are run and the best result is
kept.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cca import cca
from .errors import NonConvergenceError

_ARMIJO = 1e-4
_MIN_STEP = 1e-20
_TIE = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    tolerance: float = 1e-8
    max_iterations: int = 2000
    n_random: int = 8
    seed: int = 0


@dataclass(frozen=True)
class SimCcaSolution:
    v: np.ndarray
    t: Optional[np.ndarray]
    correlation: float
    objective: float
    iterations: int
    converged: bool


def ratio(blocks, v, u=None):
    """Correlation between ``X v`` and ``Y u`` (``u = v`` by default)."""
    u = v if u is None else u
    den = math.sqrt((v @ blocks.sxx @ v) * (u @ blocks.syy @ u))
    return float(v @ blocks.sxy @ u) / den


class _Problem:
    """Objective and gradients in the ``(v, delta)`` parametrization.

    ``inv_s2`` is ``1 / (sigma_t p)^2``; ``None`` pins ``delta`` at zero
    (strict mode) and ``0.0`` drops the penalty.
    """

    def __init__(self, blocks, inv_s2):
        self.sxx = blocks.sxx
        self.syy = blocks.syy
        self.sxy = blocks.sxy
        self.strict = inv_s2 is None
        self.inv_s2 = 0.0 if inv_s2 is None else inv_s2

    def value(self, v, d):
        u = v + d
        b = v @ self.sxx @ v
        c = u @ self.syy @ u
        if not (b > 0 and c > 0):
            return -math.inf
        return float(v @ self.sxy @ u) / math.sqrt(b * c) - 0.5 * self.inv_s2 * float(d @ d)

    def grad(self, v, d):
        u = v + d
        sxx_v = self.sxx @ v
        syy_u = self.syy @ u
        b = v @ sxx_v
        c = u @ syy_u
        r = math.sqrt(b * c)
        f = float(v @ self.sxy @ u) / r
        du = self.sxy.T @ v / r - f * syy_u / c
        dv = self.sxy @ u / r - f * sxx_v / b + du
        gv = dv - (v @ dv) * v
        if self.strict:
            return gv, np.zeros_like(v)
        return gv, du

    def step(self, v, d, gv, gd, eta):
        v_new = v + eta * gv
        v_new = v_new / np.linalg.norm(v_new)
        if self.strict:
            return v_new, d
        return v_new, (d + eta * gd) / (1.0 + eta * self.inv_s2)

    def stationarity(self, v, d, gv, gd):
        if self.strict:
            return float(np.linalg.norm(gv))
        gmap = (gd - self.inv_s2 * d) / (1.0 + self.inv_s2)
        return float(np.sqrt(gv @ gv + gmap @ gmap))


class _DirectionProblem:
    """Objective over two unit vectors ``(v, w)``, ``u = max(v'w, 0) w``.

    The penalty is ``(1 - max(v'w, 0)^2) / 2`` times ``inv_s2``.
    """

    def __init__(self, blocks, inv_s2):
        self.sxx = blocks.sxx
        self.syy = blocks.syy
        self.sxy = blocks.sxy
        self.inv_s2 = inv_s2

    def value(self, v, w):
        c = max(float(v @ w), 0.0)
        r = math.sqrt((v @ self.sxx @ v) * (w @ self.syy @ w))
        return float(v @ self.sxy @ w) / r - 0.5 * self.inv_s2 * (1.0 - c * c)

    def grad(self, v, w):
        sxx_v = self.sxx @ v
        syy_w = self.syy @ w
        b = v @ sxx_v
        c2 = w @ syy_w
        r = math.sqrt(b * c2)
        f = float(v @ self.sxy @ w) / r
        c = max(float(v @ w), 0.0)
        dv = self.sxy @ w / r - f * sxx_v / b + self.inv_s2 * c * w
        dw = self.sxy.T @ v / r - f * syy_w / c2 + self.inv_s2 * c * v
        return dv - (v @ dv) * v, dw - (w @ dw) * w

    def step(self, v, w, gv, gw, eta):
        v_new = v + eta * gv
        w_new = w + eta * gw
        return v_new / np.linalg.norm(v_new), w_new / np.linalg.norm(w_new)

    def stationarity(self, v, w, gv, gw):
        return float(np.sqrt(gv @ gv + gw @ gw))


def _ascend(problem, v, d, config):
    """Gradient ascent from one start; returns ``(v, d, value, iters, converged)``."""
    v = v / np.linalg.norm(v)
    h = problem.value(v, d)
    gv, gd = problem.grad(v, d)
    eta = 1.0
    prev = None
    for it in range(1, config.max_iterations + 1):
        if problem.stationarity(v, d, gv, gd) <= config.tolerance:
            return v, d, h, it - 1, True
        if prev is not None:
            # Barzilai-Borwein guess, safeguarded by backtracking below
            sv, sd, yv, yd = v - prev[0], d - prev[1], gv - prev[2], gd - prev[3]
            sy = abs(sv @ yv + sd @ yd)
            if sy > 0:
                eta = min(max((sv @ sv + sd @ sd) / sy, 1e-10), 1e10)
        while True:
            v_new, d_new = problem.step(v, d, gv, gd, eta)
            h_new = problem.value(v_new, d_new)
            moved = (v_new - v) @ (v_new - v) + (d_new - d) @ (d_new - d)
            if h_new >= h + _ARMIJO * moved / eta:
                break
            eta /= 2
            if eta < _MIN_STEP:
                # no representable ascent left: stationary up to rounding
                tol = max(config.tolerance, 1e-6)
                return v, d, h, it, problem.stationarity(v, d, gv, gd) <= tol
        prev = (v, d, gv, gd)
        v, d, h = v_new, d_new, h_new
        gv, gd = problem.grad(v, d)
    done = problem.stationarity(v, d, gv, gd) <= config.tolerance
    return v, d, h, config.max_iterations, done


def _top_eigvec(sxy):
    w, vecs = np.linalg.eigh((sxy + sxy.T) / 2)
    return vecs[:, -1]


def _starts(blocks, config):
    p = blocks.sxx.shape[0]
    sol = cca(blocks, 1)
    starts = [_top_eigvec(blocks.sxy), sol.vx[0] / np.linalg.norm(sol.vx[0])]
    rng = np.random.default_rng(config.seed)
    for _ in range(config.n_random):
        starts.append(rng.standard_normal(p))
    return starts, sol


def _sign_fix(v, d):
    if v[np.argmax(np.abs(v))] < 0:
        return -v, -d
    return v, d


def _run(problem, starts, config):
    results = [_ascend(problem, v0, d0, config) for v0, d0 in starts]
    any_converged = any(r[4] for r in results)
    best = None
    for r in results:
        # strict '>' keeps the lowest restart index on ties
        if best is None or r[2] > best[2]:
            best = r
    if not best[4]:
        # a converged restart equal up to rounding is preferred over a stalled one
        tie = _TIE * max(1.0, abs(best[2]))
        for r in results:
            if r[4] and r[2] >= best[2] - tie:
                return r, any_converged
    return best, any_converged


def simcca_identity(blocks, config=OptimizerConfig()):
    """Best single projection ``v`` shared by both views.

    Projected gradient ascent on the unit sphere with backtracking, restarted
    from the leading eigenvector of the symmetrized cross-covariance, from the
    classical CCA direction and from ``config.n_random`` seeded random
    vectors.  The best restart wins.

    Raises
    ------
    NonConvergenceError
        If no restart reaches ``config.tolerance``; ``err.best`` holds the
        best solution found.
    """
    p = blocks.sxx.shape[0]
    problem = _Problem(blocks, None)
    starts, _ = _starts(blocks, config)
    zero = np.zeros(p)
    (v, d, h, iters, ok), any_ok = _run(problem, [(s, zero) for s in starts], config)
    v, _ = _sign_fix(v, d)
    sol = SimCcaSolution(v, None, h, h, iters, ok)
    if not any_ok:
        raise NonConvergenceError("SimCCA did not converge from any start", best=sol)
    return sol


def penalty(t, sigma_t):
    """Soft-mode penalty ``||T - I||_F^2 / (2 sigma_t^2 p^2)``."""
    if math.isinf(sigma_t):
        return 0.0
    p = t.shape[0]
    return float(np.sum((t - np.eye(p)) ** 2)) / (2 * sigma_t**2 * p**2)


def simcca_soft(blocks, sigma_t, config=OptimizerConfig()):
    """SimCCA with a penalty pulling ``T`` toward the identity.

    ``sigma_t=math.inf`` removes the penalty, which recovers the first
    canonical correlation.  Restarts cover the strict optimum (``T = I``), the
    classical CCA pair and the same starts as :func:`simcca_identity`.
    """
    if not sigma_t > 0:
        raise ValueError("sigma_t must be positive")
    p = blocks.sxx.shape[0]
    inv_s2 = 0.0 if math.isinf(sigma_t) else 1.0 / (sigma_t * p) ** 2
    problem = _Problem(blocks, inv_s2)
    starts, sol = _starts(blocks, config)
    zero = np.zeros(p)

    try:
        strict = simcca_identity(blocks, config)
    except NonConvergenceError as err:
        strict = err.best
    vx = sol.vx[0] / np.linalg.norm(sol.vx[0])
    vy = sol.vy[0]
    alpha = abs(vy @ vx) / (vy @ vy) if abs(vy @ vx) > 0 else 1 / np.linalg.norm(vy)
    candidates = [(strict.v, zero), (vx, alpha * vy - vx)]
    candidates += [(s, zero) for s in starts]

    first, ok_a = _run(problem, candidates, config)

    # compact parametrization: w is the direction of u
    directions = [(v0 / np.linalg.norm(v0), (v0 + d0) / np.linalg.norm(v0 + d0))
                  for v0, d0 in candidates]
    directions[1] = (vx, vy / np.linalg.norm(vy))
    second, ok_b = _run(_DirectionProblem(blocks, inv_s2), directions, config)

    best = first if first[2] >= second[2] else second
    if not best[4]:
        other = second if best is first else first
        if other[4] and other[2] >= best[2] - _TIE * max(1.0, abs(best[2])):
            best = other
    if best is first:
        v, d, h, iters, ok = first
        w = v + d
    else:
        v, w, h, iters, ok = second
        d = max(float(v @ w), 0.0) * w - v
    if v[np.argmax(np.abs(v))] < 0:
        v, d, w = -v, -d, -w
    t = np.eye(p) + np.outer(d, v)
    # correlation along the direction of u, also defined in the u -> 0 limit
    out = SimCcaSolution(v, t, ratio(blocks, v, w), h, iters, ok)
    if not (ok_a or ok_b):
        raise NonConvergenceError("soft SimCCA did not converge from any start", best=out)
    return out
