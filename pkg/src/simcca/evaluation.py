"""ROC/AUC and top-k enrichment of a dependency profile against known genes."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .data import atomic_write, chromosome_key
from .errors import DegenerateError, EvaluationError


@dataclass(frozen=True)
class RocCurve:
    points: List[Tuple[float, float]]
    auc: float
    positives: int
    negatives: int

    def to_tsv(self):
        lines = [f"# auc={self.auc:.6f}", "fpr\ttpr"]
        lines += [f"{f:.6f}\t{t:.6f}" for f, t in self.points]
        return "\n".join(lines) + "\n"

    def write(self, path):
        atomic_write(path, self.to_tsv())


def _labels(profile, positives):
    ids = profile.probe_ids
    if not ids:
        raise EvaluationError("empty profile")
    positives = set(positives)
    labels = np.array([i in positives for i in ids])
    if not labels.any():
        raise EvaluationError("none of the positives occur in the profile")
    if labels.all():
        raise DegenerateError("every gene in the profile is positive")
    return labels


def roc_curve(scores, labels):
    """ROC points at every distinct score threshold, highest score first.

    Genes sharing a score enter the curve together, so the trapezoidal area
    counts tied positive/negative pairs as one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp
    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    # trapezoids on integer counts, one division at the end: exact 1.0 and 0.5
    tp0, fp0 = np.r_[0, tp], np.r_[0, fp]
    twice = int(np.sum((fp0[1:] - fp0[:-1]) * (tp0[1:] + tp0[:-1])))
    auc = twice / (2 * n_pos * n_neg)
    return list(zip(fpr.tolist(), tpr.tolist())), auc, n_pos, n_neg


def roc_auc(profile, positives):
    """ROC curve and AUC of ``profile`` ranked by descending score."""
    labels = _labels(profile, positives)
    points, auc, n_pos, n_neg = roc_curve(profile.scores, labels)
    return RocCurve(points, auc, n_pos, n_neg)


def top_k_enrichment(profile, positives, k):
    """Fraction of positives among the ``k`` best genes, and overall.

    Ties in score are broken by genomic position, then probe id.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if k > len(profile):
        raise ValueError(f"k={k} exceeds profile size {len(profile)}")
    positives = set(positives)
    ranked = sorted(
        profile.entries,
        key=lambda e: (-e.score, chromosome_key(e.feature.chromosome),
                       e.feature.position, e.feature.probe_id),
    )
    hits = sum(e.feature.probe_id in positives for e in ranked[:k])
    total = sum(e.feature.probe_id in positives for e in ranked)
    return hits / k, total / len(ranked)
