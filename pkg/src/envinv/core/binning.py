"""Quantile binning for discretizing continuous channels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuantileBins:
    """B buckets bounded by the B-1 inner quantile edges of a reference sample.

    digitize(v) counts edges strictly below v, so values at or below the
    lowest edge land in bucket 0 and values above the highest edge in B-1.
    """

    edges: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.float64)
        if edges.ndim != 1 or edges.size < 1:
            raise ValueError("edges must be a non-empty 1-d array")
        if np.any(np.diff(edges) < 0):
            raise ValueError("edges must be non-decreasing")
        edges.flags.writeable = False
        object.__setattr__(self, "edges", edges)

    @property
    def n_buckets(self) -> int:
        return self.edges.size + 1

    def digitize(self, values: np.ndarray | float) -> np.ndarray | int:
        idx = np.searchsorted(self.edges, values, side="left")
        if np.isscalar(values):
            return int(idx)
        return idx.astype(np.int64)


def quantile_bins(values: np.ndarray, n_buckets: int) -> QuantileBins:
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("cannot bin an empty sample")
    if n_buckets < 2:
        raise ValueError(f"need at least 2 buckets, got {n_buckets}")
    q = np.arange(1, n_buckets) / n_buckets
    edges = np.quantile(values, q, method="midpoint")
    return QuantileBins(edges=edges)
