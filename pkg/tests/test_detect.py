"""Detectors against independent oracles.

The kNN oracle is a literal exhaustive scan written here.  The LOF oracle
recomputes reachability from pairwise distances with no tree structure.
Both predate the comparison runs.
"""
import numpy as np
import pytest

from envinv.core import AnomalyClass, MultivariateSeries
from envinv.datagen import SyntheticConfig, clean_twin_synthetic, gen_synthetic
from envinv.detect import (
    fit_regressor,
    isolation_forest_fit,
    knn_classify,
    lof_fit,
    lof_score,
    path_normalizer,
    predict_sys,
    res_thresh_score,
    residuals,
)


def knn_oracle(embeddings, labels, query, k, positive_class):
    d = np.linalg.norm(embeddings - query, axis=1)
    order = np.argsort(d, kind="stable")[:k]
    votes = labels[order]
    counts = np.bincount(votes)
    predicted = int(np.argmax(counts))  # argmax takes the smallest on ties
    score = float(np.mean(votes == positive_class))
    return predicted, score


def lof_oracle(train, queries, k):
    """Inductive LOF from the definition, O(n^2), no spatial index."""
    n = len(train)
    d_tt = np.linalg.norm(train[:, None] - train[None, :], axis=2)
    np.fill_diagonal(d_tt, np.inf)
    nn_idx = np.argsort(d_tt, axis=1)[:, :k]
    k_dist = np.take_along_axis(d_tt, nn_idx, axis=1)[:, -1]
    reach = np.maximum(
        np.take_along_axis(d_tt, nn_idx, axis=1), k_dist[nn_idx]
    )
    lrd = 1.0 / reach.mean(axis=1)
    out = []
    for q in queries:
        dq = np.linalg.norm(train - q, axis=1)
        order = np.argsort(dq, kind="stable")[:k]
        reach_q = np.maximum(dq[order], k_dist[order])
        lrd_q = 1.0 / reach_q.mean()
        out.append(lrd[order].mean() / lrd_q)
    return np.array(out)


class TestRegressor:
    def test_identity_map(self):
        # y = x exactly: the net must drive MSE below 1e-3
        rng = np.random.default_rng(0)
        series = []
        for i in range(3):
            x = rng.standard_normal((1, 200))
            series.append(MultivariateSeries(f"s{i}", x, x.copy()))
        params = fit_regressor(series, seed=0)
        x = series[0].env
        pred = predict_sys(params, x)
        assert np.mean((pred - x) ** 2) < 1e-3

    def test_noiseless_linear_map(self):
        rng = np.random.default_rng(1)
        w = np.array([[1.5, -0.5], [0.3, 2.0]])
        series = []
        for i in range(3):
            x = rng.standard_normal((2, 300))
            series.append(MultivariateSeries(f"s{i}", x, w @ x))
        params = fit_regressor(series, seed=1, epochs=600)
        x = rng.standard_normal((2, 100))
        pred = predict_sys(params, x)
        assert np.mean((pred - w @ x) ** 2) < 1e-3

    def test_residuals_flag_injected_breaks(self):
        """Residual magnitude inside an intrinsic range dwarfs the clean twin's.

        The fit sees every series, anomalous ones included; the injected
        shifts are too rare to drag the conditional mean."""
        config = SyntheticConfig(n_series=60, length=300)
        _, series, labels = gen_synthetic(config, seed=17)
        params = fit_regressor(series, seed=0)
        intrinsic = [
            s for s, r in zip(series, labels) if r.label == AnomalyClass.INTRINSIC
        ]
        normal = [s for s, r in zip(series, labels) if r.label == AnomalyClass.NORMAL]
        assert intrinsic, "seed 17 drew no intrinsic series"
        scores_anom = [res_thresh_score(residuals(params, s)) for s in intrinsic]
        scores_norm = [res_thresh_score(residuals(params, s)) for s in normal]
        assert np.median(scores_anom) > 2 * np.median(scores_norm)

    def test_extrinsic_residuals_look_normal(self):
        """A level shift on the environment propagates through h, so extrinsic
        residual maxima rank no differently than normal ones."""
        from envinv.evaluate.metrics import auroc

        config = SyntheticConfig(n_series=90, length=240)
        _, series, labels = gen_synthetic(config, seed=17)
        params = fit_regressor(series, seed=0)
        scored = [
            (res_thresh_score(residuals(params, s)), r.label)
            for s, r in zip(series, labels)
            if r.label in (AnomalyClass.NORMAL, AnomalyClass.EXTRINSIC)
        ]
        scores = np.array([v for v, _ in scored])
        is_ext = np.array([lab == AnomalyClass.EXTRINSIC for _, lab in scored], dtype=int)
        assert is_ext.sum() >= 8
        assert abs(auroc(scores, is_ext) - 0.5) < 0.25


class TestPathNormalizer:
    def test_hand_values(self):
        # c(2) = 2*H(1) - 2*(1/2) = 1; c(1) and c(0) are 0 by convention
        assert path_normalizer(2) == pytest.approx(1.0)
        assert path_normalizer(1) == 0.0
        assert path_normalizer(0) == 0.0

    def test_c3_exact(self):
        # c(3) = 2*(1 + 1/2) - 2*(2/3) = 3 - 4/3 = 5/3
        assert path_normalizer(3) == pytest.approx(5.0 / 3.0, rel=1e-12)

    def test_grows_logarithmically(self):
        assert path_normalizer(256) == pytest.approx(
            2 * np.sum(1 / np.arange(1, 256)) - 2 * 255 / 256
        )


class TestIsolationForest:
    def test_outlier_ranks_first(self):
        rng = np.random.default_rng(4)
        cluster = rng.normal(0.0, 0.5, size=(256, 2))
        outlier = np.array([[8.0, -8.0]])
        points = np.vstack([cluster, outlier])
        forest = isolation_forest_fit(points, trees=100, seed=0)
        scores = forest.score(points)
        assert np.argmax(scores) == 256
        assert scores[256] > 0.6
        assert np.median(scores[:256]) < 0.55

    def test_scores_in_unit_interval(self):
        rng = np.random.default_rng(5)
        points = rng.standard_normal((120, 3))
        forest = isolation_forest_fit(points, seed=1)
        scores = forest.score(points)
        assert np.all(scores > 0.0) and np.all(scores < 1.0)

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(6)
        points = rng.standard_normal((80, 2))
        s1 = isolation_forest_fit(points, seed=7).score(points)
        s2 = isolation_forest_fit(points, seed=7).score(points)
        np.testing.assert_array_equal(s1, s2)


class TestLof:
    def test_uniform_grid_scores_near_one(self):
        xx, yy = np.meshgrid(np.arange(12.0), np.arange(12.0))
        grid = np.c_[xx.ravel(), yy.ravel()]
        model = lof_fit(grid, k=8)
        inner = grid[(grid[:, 0] > 2) & (grid[:, 0] < 9) & (grid[:, 1] > 2) & (grid[:, 1] < 9)]
        scores = lof_score(model, inner)
        np.testing.assert_allclose(scores, 1.0, atol=0.05)

    def test_outlier_scores_high(self):
        rng = np.random.default_rng(7)
        cluster = rng.normal(0, 0.3, size=(100, 2))
        model = lof_fit(cluster, k=20)
        assert lof_score(model, np.array([[5.0, 5.0]]))[0] > 1.5

    @pytest.mark.parametrize("k", [3, 10])
    def test_matches_definition_oracle(self, k):
        rng = np.random.default_rng(8)
        train = rng.standard_normal((60, 3))
        queries = rng.standard_normal((15, 3))
        got = lof_score(lof_fit(train, k=k), queries)
        want = lof_oracle(train, queries, k)
        np.testing.assert_allclose(got, want, rtol=1e-9)

    def test_rejects_k_too_large(self):
        with pytest.raises(ValueError):
            lof_fit(np.zeros((5, 2)), k=5)


class TestKnn:
    def test_matches_exhaustive_scan_200_queries(self):
        rng = np.random.default_rng(9)
        emb = rng.standard_normal((70, 6))
        labels = rng.integers(0, 3, size=70)
        for _ in range(200):
            q = rng.standard_normal(6)
            got = knn_classify(emb, labels, q, k=5, positive_class=2)
            want = knn_oracle(emb, labels, q, 5, 2)
            assert got == want

    def test_tie_resolves_to_smallest_class(self):
        emb = np.array([[0.0], [1.0], [2.0], [3.0]])
        labels = np.array([2, 2, 1, 1])
        pred, _ = knn_classify(emb, labels, np.array([1.5]), k=4)
        assert pred == 1

    def test_score_is_positive_fraction(self):
        emb = np.array([[0.0], [0.1], [0.2], [5.0], [5.1]])
        labels = np.array([1, 1, 0, 0, 0])
        pred, score = knn_classify(emb, labels, np.array([0.05]), k=3, positive_class=1)
        assert pred == 1
        assert score == pytest.approx(2 / 3)

    def test_score_granularity(self):
        rng = np.random.default_rng(10)
        emb = rng.standard_normal((30, 4))
        labels = rng.integers(0, 2, size=30)
        legal = {i / 5 for i in range(6)}
        for _ in range(50):
            _, score = knn_classify(emb, labels, rng.standard_normal(4), k=5)
            assert score in legal

    def test_rejects_k_above_n(self):
        with pytest.raises(ValueError):
            knn_classify(np.zeros((3, 2)), np.zeros(3, dtype=int), np.zeros(2), k=4)
