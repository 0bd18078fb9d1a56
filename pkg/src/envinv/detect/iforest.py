"""Isolation forest over point vectors.

Scores follow 2^(-E[path]/c(n)): isolated points terminate in shallow leaves
across random trees and score near 1, dense-cluster points near or below 0.5.
The path normalizer c(n) uses exact harmonic numbers, so c(2) = 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def path_normalizer(n: int) -> float:
    """c(n) = 2*H(n-1) - 2*(n-1)/n; average unsuccessful BST search length."""
    if n <= 1:
        return 0.0
    harmonic = np.sum(1.0 / np.arange(1, n))
    return float(2.0 * harmonic - 2.0 * (n - 1) / n)


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    size: int = 0  # leaf only


def _build(points: np.ndarray, idx: np.ndarray, depth: int, limit: int, rng) -> _Node:
    if depth >= limit or idx.size <= 1:
        return _Node(size=idx.size)
    sub = points[idx]
    spans = sub.max(axis=0) - sub.min(axis=0)
    usable = np.nonzero(spans > 0)[0]
    if usable.size == 0:
        return _Node(size=idx.size)
    feature = int(rng.choice(usable))
    lo = sub[:, feature].min()
    hi = sub[:, feature].max()
    threshold = float(rng.uniform(lo, hi))
    mask = sub[:, feature] < threshold
    return _Node(
        feature=feature,
        threshold=threshold,
        left=_build(points, idx[mask], depth + 1, limit, rng),
        right=_build(points, idx[~mask], depth + 1, limit, rng),
    )


def _tree_paths(node: _Node, points: np.ndarray, idx: np.ndarray, depth: int, out: np.ndarray) -> None:
    if node.feature < 0:
        out[idx] = depth + path_normalizer(node.size)
        return
    mask = points[idx, node.feature] < node.threshold
    if mask.any():
        _tree_paths(node.left, points, idx[mask], depth + 1, out)
    if not mask.all():
        _tree_paths(node.right, points, idx[~mask], depth + 1, out)


@dataclass
class IsolationForest:
    trees: list[_Node]
    subsample: int

    def score(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        norm = path_normalizer(self.subsample)
        total = np.zeros(points.shape[0])
        paths = np.empty(points.shape[0])
        all_idx = np.arange(points.shape[0])
        for tree in self.trees:
            _tree_paths(tree, points, all_idx, 0, paths)
            total += paths
        return 2.0 ** (-(total / len(self.trees)) / norm)


def isolation_forest_fit(
    points: np.ndarray, trees: int = 100, subsample: int = 256, seed: int = 0
) -> IsolationForest:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ValueError("need at least 2 points to fit")
    rng = np.random.default_rng(seed)
    n = points.shape[0]
    psi = min(subsample, n)
    limit = int(np.ceil(np.log2(max(psi, 2))))
    forest = []
    for _ in range(trees):
        idx = rng.choice(n, size=psi, replace=False)
        forest.append(_build(points, idx, 0, limit, rng))
    return IsolationForest(trees=forest, subsample=psi)
