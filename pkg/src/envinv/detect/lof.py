"""Local outlier factor, inductive form.

Reference statistics (k-distances, local reachability densities) come from a
fit set; queries are scored against it without joining it.  Scores hover
around 1 inside homogeneous regions and grow as the query sits in sparser
space than its neighbors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass
class LofModel:
    points: np.ndarray
    tree: cKDTree
    k: int
    k_dist: np.ndarray  # per fit point
    lrd: np.ndarray     # per fit point


def lof_fit(points: np.ndarray, k: int = 20) -> LofModel:
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the point count {n}")
    tree = cKDTree(points)
    # first column is the point itself at distance 0
    dist, idx = tree.query(points, k=k + 1)
    neigh_dist = dist[:, 1:]
    neigh_idx = idx[:, 1:]
    k_dist = neigh_dist[:, -1]
    reach = np.maximum(neigh_dist, k_dist[neigh_idx])
    lrd = 1.0 / np.maximum(reach.mean(axis=1), 1e-300)
    return LofModel(points=points, tree=tree, k=k, k_dist=k_dist, lrd=lrd)


def lof_score(model: LofModel, queries: np.ndarray) -> np.ndarray:
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    dist, idx = model.tree.query(queries, k=model.k)
    if model.k == 1:
        dist = dist[:, None]
        idx = idx[:, None]
    reach = np.maximum(dist, model.k_dist[idx])
    lrd_q = 1.0 / np.maximum(reach.mean(axis=1), 1e-300)
    return model.lrd[idx].mean(axis=1) / lrd_q
