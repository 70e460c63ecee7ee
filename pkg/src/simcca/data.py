"""Genomic two-view data: loading, preprocessing, probe matching and windows.

A view is a samples x features matrix whose columns carry a probe id and a
point coordinate (chromosome, position).  Two views are paired by letting
every feature of the ``x`` view pick its nearest ``y`` feature on the same
chromosome.
"""

import logging
import os
import re
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import (
    DomainError,
    EmptyResultError,
    ParseError,
    ValidationError,
    WindowUnavailableError,
)

logger = logging.getLogger(__name__)

DEFAULT_MAX_DISTANCE_BP = 5000
HEADER = ("probe_id", "chromosome", "position")


def chromosome_key(name):
    """Natural sort key, so that ``chr2`` sorts before ``chr10``."""
    return tuple(
        (0, int(tok), "") if tok.isdigit() else (1, 0, tok)
        for tok in re.findall(r"\d+|\D+", name)
    )


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class FeatureMeta:
    probe_id: str
    chromosome: str
    position: int

    def __post_init__(self):
        if not self.probe_id:
            raise ValidationError("empty probe_id")
        if self.position < 0:
            raise ValidationError(f"{self.probe_id}: negative position {self.position}")

    @property
    def sort_key(self):
        return (chromosome_key(self.chromosome), self.position, self.probe_id)


@dataclass(frozen=True)
class ViewMatrix:
    """One data source: ``values`` is n samples x p features.

    Construction sorts the features by (chromosome, position) and freezes
    the value array.
    """

    features: Tuple[FeatureMeta, ...]
    values: np.ndarray
    sample_ids: Tuple[str, ...]

    def __post_init__(self):
        features = tuple(self.features)
        values = np.asarray(self.values, dtype=np.float64)
        sample_ids = tuple(self.sample_ids)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-d array")
        if values.shape != (len(sample_ids), len(features)):
            raise ValidationError(
                f"values has shape {values.shape}, expected "
                f"({len(sample_ids)}, {len(features)})"
            )
        ids = [f.probe_id for f in features]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValidationError(f"duplicate probe_id(s): {', '.join(dup)}")
        order = sorted(range(len(features)), key=lambda j: features[j].sort_key)
        object.__setattr__(self, "features", tuple(features[j] for j in order))
        object.__setattr__(self, "values", _frozen(values[:, order]))
        object.__setattr__(self, "sample_ids", sample_ids)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]

    @property
    def probe_ids(self):
        return [f.probe_id for f in self.features]

    def subset(self, columns):
        columns = list(columns)
        return ViewMatrix(
            tuple(self.features[j] for j in columns),
            self.values[:, columns],
            self.sample_ids,
        )


@dataclass(frozen=True)
class PairedDataset:
    """Two views over the same samples plus the feature pairing.

    ``pairs`` holds ``(x index, y index, distance in bp)`` in genomic order
    of the x features.
    """

    x: ViewMatrix
    y: ViewMatrix
    pairs: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        if self.x.sample_ids != self.y.sample_ids:
            raise ValidationError("x and y views have different sample_ids")
        object.__setattr__(self, "pairs", tuple(tuple(map(int, q)) for q in self.pairs))

    def __len__(self):
        return len(self.pairs)

    @property
    def features(self):
        """x-side feature of every pair, in pair order."""
        return [self.x.features[i] for i, _, _ in self.pairs]

    @property
    def x_matched(self):
        return self.x.values[:, [i for i, _, _ in self.pairs]]

    @property
    def y_matched(self):
        return self.y.values[:, [j for _, j, _ in self.pairs]]

    def restrict(self):
        """Drop unmatched features from both views and renumber the pairs."""
        xi = sorted({i for i, _, _ in self.pairs})
        yi = sorted({j for _, j, _ in self.pairs})
        xmap = {old: new for new, old in enumerate(xi)}
        ymap = {old: new for new, old in enumerate(yi)}
        pairs = tuple((xmap[i], ymap[j], dist) for i, j, dist in self.pairs)
        return PairedDataset(self.x.subset(xi), self.y.subset(yi), pairs)

    def chromosome_runs(self):
        """``{chromosome: (first pair index, stop pair index)}``."""
        runs = {}
        for k, feat in enumerate(self.features):
            start, _ = runs.get(feat.chromosome, (k, k))
            runs[feat.chromosome] = (start, k + 1)
        return runs


@dataclass(frozen=True)
class PairedWindow:
    """Contiguous matched features on one chromosome, as dense arrays."""

    x: np.ndarray
    y: np.ndarray
    features: Tuple[FeatureMeta, ...]
    start: int
    center: int = field(default=-1)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @classmethod
    def from_arrays(cls, x, y, features=None):
        """Wrap raw arrays, e.g. for fitting a model outside of a genome scan."""
        x = _frozen(np.atleast_2d(x))
        y = _frozen(np.atleast_2d(y))
        if x.shape[0] != y.shape[0]:
            raise ValidationError("x and y must have the same number of rows")
        if features is None:
            features = tuple(
                FeatureMeta(f"f{j}", "chr", j) for j in range(x.shape[1])
            )
        return cls(x, y, tuple(features), 0, 0)


def _parse_value(text, lineno, path, column):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} in column {column!r}", lineno, path)
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {text!r} in column {column!r}", lineno, path)
    return value


def load_view(path):
    """Read a view from a tab-separated file.

    The header is ``probe_id  chromosome  position  <sample_id>...``; every
    following row is one probe.  Blank lines are skipped.
    """
    features = []
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if tuple(header[:3]) != HEADER:
            raise ParseError(
                f"header must start with {' '.join(HEADER)}, got {header[:3]}", 1, path
            )
        sample_ids = header[3:]
        if len(set(sample_ids)) != len(sample_ids):
            raise ParseError("duplicate sample ids in header", 1, path)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if len(cells) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, found {len(cells)}", lineno, path
                )
            probe_id, chrom, pos = cells[:3]
            try:
                position = int(pos)
            except ValueError:
                raise ParseError(f"position {pos!r} is not an integer", lineno, path)
            if position < 0 or not probe_id or not chrom:
                raise ParseError("empty probe_id/chromosome or negative position", lineno, path)
            features.append(FeatureMeta(probe_id, chrom, position))
            rows.append(
                [_parse_value(c, lineno, path, s) for c, s in zip(cells[3:], sample_ids)]
            )
    values = np.array(rows, dtype=np.float64).reshape(len(features), len(sample_ids)).T
    return ViewMatrix(tuple(features), values, tuple(sample_ids))


def write_view(view, path, fmt="%.6f"):
    """Write ``view`` in the format read by :func:`load_view`."""
    lines = ["\t".join(HEADER + tuple(view.sample_ids))]
    for j, f in enumerate(view.features):
        vals = "\t".join(fmt % v for v in view.values[:, j])
        lines.append(f"{f.probe_id}\t{f.chromosome}\t{f.position}\t{vals}")
    atomic_write(path, "\n".join(lines) + "\n")


def atomic_write(path, text):
    """Write to a sibling temp file, then rename over ``path``."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def preprocess(view, apply_log2=False):
    """Optionally log2-transform, then center every feature to mean zero."""
    values = np.array(view.values)
    if apply_log2:
        bad = np.argwhere(values <= 0)
        if len(bad):
            i, j = bad[0]
            raise DomainError(
                f"log2 needs positive values; probe {view.features[j].probe_id} "
                f"sample {view.sample_ids[i]} has {values[i, j]!r}"
            )
        values = np.log2(values)
    values = values - values.mean(axis=0)
    return ViewMatrix(view.features, values, view.sample_ids)


def preprocess_pair(paired, apply_log2=False):
    """Restrict to matched features and preprocess both views."""
    paired = paired.restrict()
    return PairedDataset(
        preprocess(paired.x, apply_log2), preprocess(paired.y, apply_log2), paired.pairs
    )


def match_probes(x, y, max_distance_bp=DEFAULT_MAX_DISTANCE_BP):
    """Pair every x feature with its nearest y feature on the same chromosome.

    Ties in distance go to the y feature with the lower position.  x features
    whose nearest partner is farther than ``max_distance_bp`` are dropped.
    Several x features may share one y feature.
    """
    if x.sample_ids != y.sample_ids:
        raise ValidationError("x and y views must list identical sample_ids in order")
    by_chrom = {}
    for j, f in enumerate(y.features):
        by_chrom.setdefault(f.chromosome, []).append(j)
    pos_by_chrom = {
        c: np.array([y.features[j].position for j in idx], dtype=np.int64)
        for c, idx in by_chrom.items()
    }

    pairs = []
    for i, f in enumerate(x.features):
        if f.chromosome not in by_chrom:
            continue
        pos = pos_by_chrom[f.chromosome]
        # y features are sorted by position within a chromosome
        k = int(np.searchsorted(pos, f.position, side="left"))
        best = None
        for cand in (k - 1, k):
            if 0 <= cand < len(pos):
                dist = abs(int(pos[cand]) - f.position)
                if best is None or dist < best[1]:
                    best = (cand, dist)
        # equal positions on the left of k: searchsorted already lands on the first
        cand, dist = best
        if dist <= max_distance_bp:
            pairs.append((i, by_chrom[f.chromosome][cand], dist))

    if not pairs:
        raise EmptyResultError(f"no probe pairs within {max_distance_bp} bp")
    return PairedDataset(x, y, tuple(pairs))


def window_bounds(paired, center_index, window_size):
    """Pair-index range ``[start, stop)`` of the window around ``center_index``."""
    if not 0 <= center_index < len(paired):
        raise IndexError(f"center_index {center_index} out of range")
    if window_size < 2:
        raise ValueError("window_size must be at least 2")
    chrom = paired.features[center_index].chromosome
    lo, hi = paired.chromosome_runs()[chrom]
    if hi - lo < window_size:
        raise WindowUnavailableError(
            f"chromosome {chrom} has {hi - lo} matched features, "
            f"fewer than window size {window_size}"
        )
    start = center_index - (window_size - 1) // 2
    start = min(max(start, lo), hi - window_size)
    return start, start + window_size


def window(paired, center_index, window_size):
    """Window of ``window_size`` matched features centered on ``center_index``.

    Windows overhanging a chromosome end are shifted inward.
    """
    start, stop = window_bounds(paired, center_index, window_size)
    idx = paired.pairs[start:stop]
    x = paired.x.values[:, [i for i, _, _ in idx]]
    y = paired.y.values[:, [j for _, j, _ in idx]]
    feats = tuple(paired.x.features[i] for i, _, _ in idx)
    return PairedWindow(_frozen(x), _frozen(y), feats, start, center_index)


def read_id_list(path):
    """One id per line; ``#`` starts a comment."""
    ids = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                ids.append(line)
    return ids


@dataclass(frozen=True)
class Region:
    label: str
    chromosome: str
    start_bp: int
    end_bp: int


def read_regions(path):
    """Read a ``label  chromosome  start_bp  end_bp`` region table."""
    regions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].rstrip("\r\n")
            if not line.strip():
                continue
            cells = line.split("\t")
            if cells[:4] == ["label", "chromosome", "start_bp", "end_bp"]:
                continue
            if len(cells) != 4:
                raise ParseError(f"expected 4 fields, found {len(cells)}", lineno, path)
            try:
                start, end = int(cells[2]), int(cells[3])
            except ValueError:
                raise ParseError("start_bp/end_bp must be integers", lineno, path)
            if end < start:
                raise ParseError("end_bp < start_bp", lineno, path)
            regions.append(Region(cells[0], cells[1], start, end))
    return regions


def expand_regions(regions: Sequence[Region], features: Sequence[FeatureMeta],
                   labels=None) -> List[str]:
    """Probe ids whose position falls inside any region (bounds inclusive)."""
    if labels is not None:
        labels = set(labels)
        regions = [r for r in regions if r.label in labels]
    out = []
    for f in features:
        for r in regions:
            if f.chromosome == r.chromosome and r.start_bp <= f.position <= r.end_bp:
                out.append(f.probe_id)
                break
    return out
