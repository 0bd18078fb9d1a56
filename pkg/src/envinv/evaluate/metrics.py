"""Evaluation metrics.

auroc is the Mann-Whitney statistic computed through midranks, so ties
contribute 1/2; it matches O(n^2) pair counting to float precision without
the quadratic cost.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..core import AnomalyClass, LabelRecord


class MetricError(ValueError):
    pass


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores: Sequence[float], labels: Sequence[int]) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"scores {scores.shape} and labels {labels.shape} must align")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("auroc needs both classes present")
    ranks = _midranks(scores)
    rank_sum = ranks[labels == 1].sum()
    return float((rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def weighted_f1(pred: Sequence[int], true: Sequence[int], n_classes: int) -> float:
    pred = np.asarray(pred, dtype=np.int64)
    true = np.asarray(true, dtype=np.int64)
    if pred.shape != true.shape or pred.size == 0:
        raise MetricError("pred and true must be non-empty and aligned")
    total = true.size
    score = 0.0
    for c in range(n_classes):
        tp = int(((pred == c) & (true == c)).sum())
        fp = int(((pred == c) & (true != c)).sum())
        fn = int(((pred != c) & (true == c)).sum())
        support = tp + fn
        if support == 0:
            continue
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / support
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        score += (support / total) * f1
    return float(score)


def map_labels(
    records: Iterable[LabelRecord | AnomalyClass | int], scheme: str
) -> np.ndarray:
    """two_class: {NORMAL, EXTRINSIC} -> 0, INTRINSIC -> 1; three_class: identity."""
    classes = []
    for rec in records:
        if isinstance(rec, LabelRecord):
            classes.append(int(rec.label))
        else:
            classes.append(int(rec))
    classes = np.asarray(classes, dtype=np.int64)
    if scheme == "three_class":
        return classes
    if scheme == "two_class":
        return (classes == int(AnomalyClass.INTRINSIC)).astype(np.int64)
    raise MetricError(f"unknown labeling scheme {scheme!r}")


@dataclass(frozen=True)
class GapResult:
    mean_correct: float
    mean_incorrect: float
    gap: float


def distance_gap(
    train_embeddings: np.ndarray,
    train_labels: np.ndarray,
    test_embeddings: np.ndarray,
    test_labels: np.ndarray,
) -> GapResult:
    """Distance to the wrong-class centroid minus distance to the own-class
    centroid, averaged over test rows; centroids come from the train rows."""
    train_labels = np.asarray(train_labels, dtype=np.int64)
    test_labels = np.asarray(test_labels, dtype=np.int64)
    if set(np.unique(train_labels)) != {0, 1}:
        raise MetricError("reference set must contain both classes")
    cent = {c: train_embeddings[train_labels == c].mean(axis=0) for c in (0, 1)}
    d0 = np.linalg.norm(test_embeddings - cent[0], axis=1)
    d1 = np.linalg.norm(test_embeddings - cent[1], axis=1)
    d_corr = np.where(test_labels == 0, d0, d1)
    d_incorr = np.where(test_labels == 0, d1, d0)
    return GapResult(
        mean_correct=float(d_corr.mean()),
        mean_incorrect=float(d_incorr.mean()),
        gap=float((d_incorr - d_corr).mean()),
    )
