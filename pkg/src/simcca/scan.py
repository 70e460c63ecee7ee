"""Sliding-window dependency scan along the genome."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import constrained
from .cca import cca
from .constrained import OptimizerConfig
from .covariance import covariance_blocks
from .data import FeatureMeta, PairedWindow, atomic_write, window
from .errors import EmptyResultError, NonConvergenceError, ParseError
from .pcca import IDENTITY, UNCONSTRAINED, ConstraintMode, EmConfig, em_fit
from .psimpca import PsimPcaParams, psimpca_fit

logger = logging.getLogger(__name__)

CORRELATION_METHODS = ("cca", "simcca", "simcca-soft")
PROBABILISTIC_METHODS = ("pcca", "psimcca", "psimcca-soft", "psimpca")
SOFT_METHODS = ("simcca-soft", "psimcca-soft")
PROFILE_COLUMNS = ("probe_id", "chromosome", "position", "score", "method",
                   "window_size", "converged")


@dataclass(frozen=True)
class MethodChoice:
    name: str
    sigma_t: Optional[float] = None

    def __post_init__(self):
        if self.name not in CORRELATION_METHODS + PROBABILISTIC_METHODS:
            raise ValueError(f"unknown method {self.name!r}")
        if self.name in SOFT_METHODS:
            s = self.sigma_t
            if s is None or not (math.isfinite(s) and s > 0):
                raise ValueError(f"{self.name} needs a finite positive sigma_t")
        elif self.sigma_t is not None:
            object.__setattr__(self, "sigma_t", None)

    @property
    def label(self):
        if self.sigma_t is None:
            return self.name
        return f"{self.name}:{self.sigma_t:g}"

    @classmethod
    def parse(cls, label):
        name, _, sigma = label.partition(":")
        return cls(name, float(sigma) if sigma else None)

    @property
    def probabilistic(self):
        return self.name in PROBABILISTIC_METHODS


@dataclass(frozen=True)
class ScanConfig:
    epsilon: Optional[float] = None
    seed: int = 0
    workers: int = 1
    d: int = 1
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    em: EmConfig = field(default_factory=EmConfig)


@dataclass(frozen=True)
class ProfileEntry:
    feature: FeatureMeta
    score: float
    method: MethodChoice
    window_size: int
    converged: bool


@dataclass(frozen=True)
class DependencyProfile:
    entries: Tuple[ProfileEntry, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def scores(self):
        return np.array([e.score for e in self.entries])

    @property
    def probe_ids(self):
        return [e.feature.probe_id for e in self.entries]

    def to_tsv(self):
        lines = ["\t".join(PROFILE_COLUMNS)]
        for e in self.entries:
            f = e.feature
            lines.append(
                f"{f.probe_id}\t{f.chromosome}\t{f.position}\t{e.score:.6f}\t"
                f"{e.method.label}\t{e.window_size}\t{str(e.converged).lower()}"
            )
        return "\n".join(lines) + "\n"

    def write(self, path):
        atomic_write(path, self.to_tsv())


def read_profile(path):
    entries = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if tuple(header) != PROFILE_COLUMNS:
            raise ParseError(f"unexpected profile header {header}", 1, path)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != len(PROFILE_COLUMNS):
                raise ParseError(f"expected {len(PROFILE_COLUMNS)} fields", lineno, path)
            try:
                entries.append(ProfileEntry(
                    FeatureMeta(cells[0], cells[1], int(cells[2])),
                    float(cells[3]),
                    MethodChoice.parse(cells[4]),
                    int(cells[5]),
                    cells[6] == "true",
                ))
            except ValueError as err:
                raise ParseError(str(err), lineno, path) from None
    return DependencyProfile(tuple(entries))


def dependency_score(params):
    """Shared over view-specific variance, ``tr(W W') / tr(Psi)``."""
    if isinstance(params, PsimPcaParams):
        params = params.as_model()
    w = params.w
    return float(np.sum(w * w) / (np.trace(params.psix) + np.trace(params.psiy)))


def window_seed(seed, start):
    return int(np.random.SeedSequence([seed, start]).generate_state(1)[0])


def fit_window(win, method, config=ScanConfig(), seed=None):
    """Score one window; returns ``(score, converged)``."""
    seed = config.seed if seed is None else seed
    name = method.name
    if name in CORRELATION_METHODS:
        blocks = covariance_blocks(win, config.epsilon)
        if name == "cca":
            return cca(blocks, 1).first, True
        opt = replace(config.optimizer, seed=seed)
        try:
            if name == "simcca":
                sol = constrained.simcca_identity(blocks, opt)
            else:
                sol = constrained.simcca_soft(blocks, method.sigma_t, opt)
        except NonConvergenceError as err:
            sol = err.best
        return float(sol.correlation), bool(sol.converged)

    em = replace(config.em, seed=seed)
    if name == "psimpca":
        params, _, trace = psimpca_fit(win, em)
    else:
        mode = {
            "pcca": UNCONSTRAINED,
            "psimcca": IDENTITY,
        }.get(name) or ConstraintMode.soft(method.sigma_t)
        params, _, trace = em_fit(win, config.d, mode, em)
    return dependency_score(params), trace.converged


def _task(args):
    x, y, method, config, seed = args
    return fit_window(PairedWindow.from_arrays(x, y), method, config, seed)


def scan(paired, method, window_size, config=ScanConfig()):
    """Score every matched gene by the window centered on it.

    Genes on chromosomes with fewer than ``window_size`` matched features are
    skipped.  Windows shared by several centers (near chromosome ends) are
    fitted once.  Each window's random starts are seeded from
    ``(config.seed, window start)``, so results do not depend on
    ``config.workers``.
    """
    long_enough = set()
    for chrom, (lo, hi) in paired.chromosome_runs().items():
        if hi - lo >= window_size:
            long_enough.add(chrom)
        else:
            logger.warning("skipping %s: %d matched features < window %d",
                           chrom, hi - lo, window_size)
    centers = [k for k, f in enumerate(paired.features) if f.chromosome in long_enough]
    if not centers:
        raise EmptyResultError(f"no chromosome has {window_size} matched features")

    wins = {}
    center_start = []
    for k in centers:
        win = window(paired, k, window_size)
        wins.setdefault(win.start, win)
        center_start.append(win.start)
    starts = sorted(wins)
    tasks = [(wins[s].x, wins[s].y, method, config, window_seed(config.seed, s))
             for s in starts]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]
    by_start = dict(zip(starts, results))

    feats = paired.features
    entries = []
    for k, s in zip(centers, center_start):
        score, ok = by_start[s]
        entries.append(ProfileEntry(feats[k], float(score), method, window_size, ok))
    return DependencyProfile(tuple(entries))
