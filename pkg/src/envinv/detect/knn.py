"""k-nearest-neighbor classification in embedding space."""
from __future__ import annotations

import numpy as np


def knn_classify(
    embeddings: np.ndarray,
    labels: np.ndarray,
    query: np.ndarray,
    k: int = 5,
    positive_class: int = 1,
) -> tuple[int, float]:
    """Majority vote over the k nearest training rows by Euclidean distance.

    Returns (predicted class, anomaly score), the score being the fraction
    of neighbors carrying positive_class.  Vote ties resolve to the smallest
    class index; equal distances resolve by training-row order.
    """
    embeddings = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if embeddings.shape[0] != labels.shape[0]:
        raise ValueError(
            f"{embeddings.shape[0]} embeddings vs {labels.shape[0]} labels"
        )
    if embeddings.shape[0] < k:
        raise ValueError(f"need at least k={k} training rows, have {embeddings.shape[0]}")
    dist = np.linalg.norm(embeddings - np.asarray(query)[None, :], axis=1)
    nearest = np.argsort(dist, kind="stable")[:k]
    votes = labels[nearest]
    counts = np.bincount(votes)
    predicted = int(np.argmax(counts))  # argmax takes the smallest index on ties
    score = float(np.mean(votes == positive_class))
    return predicted, score
