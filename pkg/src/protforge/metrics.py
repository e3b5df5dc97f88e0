"""Evaluation metrics: classification, multi-label, and regression.

Definitions are deliberately direct so they can be checked against naive
brute-force oracles:

- accuracy: exact-match rate.
- precision / recall / f1: macro-averaged over classes; a class term with a
  zero denominator contributes 0 and raises a divergence flag.
- mcc: multiclass Matthews correlation from confusion-matrix counts.
- auc: one-vs-rest macro AUROC via the rank-based (Mann-Whitney) form with
  average ranks for ties, requiring per-class scores.
- f1_max: maximum micro-F1 over the exact set of distinct score thresholds.
- spearman_corr: Pearson correlation of fractional (average) ranks.
- mse: mean squared error.

Undefined values (AUROC with single-class gold, Spearman on constant input)
are reported as absent with a flag, never as 0.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .core import MetricReport

__all__ = [
    "LengthMismatchError",
    "ShapeMismatchError",
    "classification_metrics",
    "f1_max",
    "multilabel_metrics",
    "regression_metrics",
    "spearman",
]


class LengthMismatchError(ValueError):
    pass


class ShapeMismatchError(ValueError):
    pass


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _binary_auroc(is_pos: np.ndarray, scores: np.ndarray) -> float:
    ranks = _average_ranks(scores)
    n_pos = int(is_pos.sum())
    n_neg = len(is_pos) - n_pos
    rank_sum = float(ranks[is_pos].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def classification_metrics(gold: Sequence[int], pred: Sequence[int],
                           scores: Optional[np.ndarray] = None) -> MetricReport:
    """Accuracy, macro precision/recall/F1, MCC, and (with scores) AUROC.

    ``scores`` is an optional (n, C) matrix of per-class scores; without it
    AUROC is absent and flagged. Labels must lie in [0, C).
    """
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape or gold.ndim != 1:
        raise LengthMismatchError(
            f"gold and pred must be equal-length 1D, got {gold.shape} vs {pred.shape}")
    n = len(gold)
    if n < 1:
        raise LengthMismatchError("need at least one sample")

    if scores is not None:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape[0] != n or scores.ndim != 2:
            raise ShapeMismatchError(
                f"scores must be (n, C) with n={n}, got {scores.shape}")
        if not np.isfinite(scores).all():
            raise ValueError("scores must be finite")
        n_classes = scores.shape[1]
    else:
        n_classes = int(max(gold.max(), pred.max())) + 1
    if gold.min() < 0 or pred.min() < 0 or max(gold.max(), pred.max()) >= n_classes:
        raise ValueError(f"labels must lie in [0, {n_classes})")

    flags: list[str] = []
    values: dict[str, float] = {}

    values["accuracy"] = float((gold == pred).mean())

    precisions = []
    recalls = []
    f1s = []
    for c in range(n_classes):
        tp = int(((gold == c) & (pred == c)).sum())
        fp = int(((gold != c) & (pred == c)).sum())
        fn = int(((gold == c) & (pred != c)).sum())
        if tp + fp > 0:
            p_c = tp / (tp + fp)
        else:
            p_c = 0.0
            flags.append(f"precision: class {c} never predicted (term counted as 0)")
        if tp + fn > 0:
            r_c = tp / (tp + fn)
        else:
            r_c = 0.0
            flags.append(f"recall: class {c} absent from gold (term counted as 0)")
        f_c = 2 * p_c * r_c / (p_c + r_c) if (p_c + r_c) > 0 else 0.0
        precisions.append(p_c)
        recalls.append(r_c)
        f1s.append(f_c)
    values["precision"] = float(np.mean(precisions))
    values["recall"] = float(np.mean(recalls))
    values["f1"] = float(np.mean(f1s))

    # multiclass MCC from the count vectors
    correct = int((gold == pred).sum())
    t_counts = np.bincount(gold, minlength=n_classes).astype(np.float64)
    p_counts = np.bincount(pred, minlength=n_classes).astype(np.float64)
    cov = correct * n - float(t_counts @ p_counts)
    denom = np.sqrt(n * n - float(p_counts @ p_counts)) * \
        np.sqrt(n * n - float(t_counts @ t_counts))
    if denom == 0.0:
        values["mcc"] = 0.0
        flags.append("mcc: degenerate confusion matrix (reported as 0)")
    else:
        values["mcc"] = float(np.clip(cov / denom, -1.0, 1.0))

    if scores is None:
        flags.append("auc: requires per-class scores (absent)")
    else:
        per_class = []
        for c in range(n_classes):
            is_pos = gold == c
            n_pos = int(is_pos.sum())
            if n_pos == 0 or n_pos == n:
                continue
            per_class.append(_binary_auroc(is_pos, scores[:, c]))
        if per_class:
            values["auc"] = float(np.mean(per_class))
        else:
            flags.append("auc: undefined for single-class gold (absent)")

    return MetricReport(values=values, flags=flags)


def f1_max(gold: np.ndarray, scores: np.ndarray) -> float:
    """Maximum micro-F1 over thresholds for multi-label prediction.

    ``gold`` is a binary (n, L) matrix, ``scores`` a same-shape score
    matrix. The threshold grid is the exact set of distinct score values
    plus {0, 1}; a prediction is positive when its score >= threshold.
    """
    gold = np.asarray(gold, dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if gold.shape != scores.shape or gold.ndim != 2:
        raise ShapeMismatchError(
            f"gold and scores must be equal-shape 2D, got {gold.shape} vs {scores.shape}")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    if not np.isin(gold, (0.0, 1.0)).all():
        raise ValueError("gold must be binary")

    total_pos = gold.sum()
    if total_pos == 0:
        return 0.0

    best = 0.0
    thresholds = np.unique(np.concatenate([scores.ravel(), [0.0, 1.0]]))
    for t in thresholds:
        predicted = scores >= t
        tp = float((gold * predicted).sum())
        fp = float(((1 - gold) * predicted).sum())
        fn = float((gold * ~predicted).sum())
        if 2 * tp + fp + fn > 0:
            best = max(best, 2 * tp / (2 * tp + fp + fn))
    return best


def multilabel_metrics(gold: np.ndarray, scores: np.ndarray) -> MetricReport:
    """MetricReport wrapper around :func:`f1_max` (flags degenerate gold)."""
    value = f1_max(gold, scores)
    flags = []
    if np.asarray(gold).sum() == 0:
        flags.append("f1_max: gold has no positive labels (degenerate)")
    return MetricReport(values={"f1_max": value}, flags=flags)


def spearman(gold: Sequence[float], pred: Sequence[float]) -> Optional[float]:
    """Spearman's rho via Pearson on average ranks; None for constant input."""
    gold = np.asarray(gold, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if np.all(gold == gold[0]) or np.all(pred == pred[0]):
        return None
    rg = _average_ranks(gold)
    rp = _average_ranks(pred)
    rg = rg - rg.mean()
    rp = rp - rp.mean()
    return float(np.clip((rg @ rp) / np.sqrt((rg @ rg) * (rp @ rp)), -1.0, 1.0))


def regression_metrics(gold: Sequence[float],
                       pred: Sequence[float]) -> MetricReport:
    """Spearman correlation and mean squared error."""
    gold = np.asarray(gold, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if gold.shape != pred.shape or gold.ndim != 1:
        raise LengthMismatchError(
            f"gold and pred must be equal-length 1D, got {gold.shape} vs {pred.shape}")
    if len(gold) < 2:
        raise LengthMismatchError("need at least two samples")

    values = {"mse": float(((gold - pred) ** 2).mean())}
    flags = []
    rho = spearman(gold, pred)
    if rho is None:
        flags.append("spearman_corr: undefined on constant input (absent)")
    else:
        values["spearman_corr"] = rho
    return MetricReport(values=values, flags=flags)
