"""Naive-definition metric oracles (double loops, no vectorization).

Independent reference implementations used to score protforge.metrics.
AUROC deliberately uses pair counting rather than the rank-sum identity,
and Spearman builds ranks by explicit tie-group averaging.
"""

from __future__ import annotations

import math


def naive_confusion(gold, pred, n_classes):
    cm = [[0] * n_classes for _ in range(n_classes)]
    for g, p in zip(gold, pred):
        cm[g][p] += 1
    return cm


def naive_accuracy(gold, pred):
    return sum(1 for g, p in zip(gold, pred) if g == p) / len(gold)


def naive_macro_prf(gold, pred, n_classes):
    precisions, recalls, f1s = [], [], []
    for c in range(n_classes):
        tp = sum(1 for g, p in zip(gold, pred) if g == c and p == c)
        fp = sum(1 for g, p in zip(gold, pred) if g != c and p == c)
        fn = sum(1 for g, p in zip(gold, pred) if g == c and p != c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(f1)
    n = n_classes
    return sum(precisions) / n, sum(recalls) / n, sum(f1s) / n


def naive_mcc(gold, pred, n_classes):
    n = len(gold)
    correct = sum(1 for g, p in zip(gold, pred) if g == p)
    t = [sum(1 for g in gold if g == c) for c in range(n_classes)]
    p = [sum(1 for q in pred if q == c) for c in range(n_classes)]
    cov = correct * n - sum(tk * pk for tk, pk in zip(t, p))
    denom = math.sqrt(n * n - sum(pk * pk for pk in p)) * \
        math.sqrt(n * n - sum(tk * tk for tk in t))
    return cov / denom if denom else 0.0


def naive_binary_auroc(is_pos, scores):
    """Pair counting: P(score_pos > score_neg) + 0.5 P(=)."""
    pos = [s for flag, s in zip(is_pos, scores) if flag]
    neg = [s for flag, s in zip(is_pos, scores) if not flag]
    wins = ties = 0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1
            elif sp == sn:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def naive_macro_auroc(gold, scores):
    n = len(gold)
    n_classes = len(scores[0])
    per_class = []
    for c in range(n_classes):
        is_pos = [g == c for g in gold]
        n_pos = sum(is_pos)
        if n_pos in (0, n):
            continue
        per_class.append(naive_binary_auroc(is_pos, [row[c] for row in scores]))
    return sum(per_class) / len(per_class) if per_class else None


def naive_micro_f1_at(gold_mat, score_mat, threshold):
    tp = fp = fn = 0
    for grow, srow in zip(gold_mat, score_mat):
        for g, s in zip(grow, srow):
            predicted = s >= threshold
            if predicted and g:
                tp += 1
            elif predicted and not g:
                fp += 1
            elif not predicted and g:
                fn += 1
    return 2 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0


def naive_f1_max(gold_mat, score_mat):
    thresholds = {0.0, 1.0}
    for row in score_mat:
        thresholds.update(row)
    return max(naive_micro_f1_at(gold_mat, score_mat, t) for t in sorted(thresholds))


def naive_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def naive_spearman(gold, pred):
    rg = naive_ranks(gold)
    rp = naive_ranks(pred)
    n = len(rg)
    mg = sum(rg) / n
    mp = sum(rp) / n
    num = sum((a - mg) * (b - mp) for a, b in zip(rg, rp))
    den = math.sqrt(sum((a - mg) ** 2 for a in rg)) * \
        math.sqrt(sum((b - mp) ** 2 for b in rp))
    return num / den if den else None


def naive_mse(gold, pred):
    return sum((g - p) ** 2 for g, p in zip(gold, pred)) / len(gold)
