"""Evaluation metrics against independent oracles.

auroc's oracle is literal pair counting (every positive/negative pair, ties
worth half).  weighted_f1's oracle recomputes the confusion matrix from
scratch.  Both oracles live here, not in the package, and were written
before being compared.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envinv.core import AnomalyClass
from envinv.evaluate import MetricError, auroc, distance_gap, map_labels, weighted_f1

from conftest import make_label


def auroc_pair_oracle(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def f1_confusion_oracle(pred, true, n_classes):
    pred = np.asarray(pred)
    true = np.asarray(true)
    total = 0.0
    for c in range(n_classes):
        tp = np.sum((pred == c) & (true == c))
        fp = np.sum((pred == c) & (true != c))
        fn = np.sum((pred != c) & (true == c))
        support = np.sum(true == c)
        if support == 0:
            continue
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        total += support * f1
    return total / len(true)


class TestAuroc:
    def test_hand_cases(self):
        # perfect separation, perfect inversion, single tied pair
        assert auroc([0.1, 0.9], [0, 1]) == 1.0
        assert auroc([0.9, 0.1], [0, 1]) == 0.0
        assert auroc([0.5, 0.5], [0, 1]) == 0.5

    def test_matches_pair_oracle_100_instances(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(5, 60))
            # quantized scores force plenty of ties
            scores = np.round(rng.standard_normal(n), 1)
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            got = auroc(scores, labels)
            want = auroc_pair_oracle(scores, labels)
            assert abs(got - want) < 1e-12

    def test_negated_scores_complement(self):
        rng = np.random.default_rng(1)
        scores = rng.standard_normal(40)
        labels = np.r_[np.ones(13, dtype=int), np.zeros(27, dtype=int)]
        assert auroc(scores, labels) + auroc(-scores, labels) == pytest.approx(1.0, abs=1e-12)

    @given(seed=st.integers(0, 2**31))
    @settings(max_examples=30, deadline=None)
    def test_monotone_transform_invariant(self, seed):
        rng = np.random.default_rng(seed)
        scores = rng.standard_normal(30)
        labels = rng.integers(0, 2, size=30)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        base = auroc(scores, labels)
        assert auroc(np.exp(scores), labels) == pytest.approx(base, abs=1e-12)
        assert auroc(3 * scores + 7, labels) == pytest.approx(base, abs=1e-12)

    def test_rejects_single_class(self):
        with pytest.raises(MetricError):
            auroc([0.1, 0.2], [1, 1])

    def test_rejects_misaligned(self):
        with pytest.raises(MetricError):
            auroc([0.1, 0.2, 0.3], [0, 1])


class TestWeightedF1:
    def test_all_zero_predictions_hand_oracle(self):
        # true=[0,1], pred=[0,0]: class0 f1=2/3 (prec .5, rec 1), class1 f1=0
        # weighted = (1*(2/3) + 1*0)/2 = 1/3
        assert weighted_f1([0, 0], [0, 1], 2) == pytest.approx(1 / 3)

    def test_perfect_prediction(self):
        assert weighted_f1([0, 1, 2, 1], [0, 1, 2, 1], 3) == 1.0

    def test_matches_confusion_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.integers(4, 80))
            k = int(rng.integers(2, 5))
            true = rng.integers(0, k, size=n)
            pred = rng.integers(0, k, size=n)
            got = weighted_f1(pred, true, k)
            want = f1_confusion_oracle(pred, true, k)
            assert got == pytest.approx(want, abs=1e-12)

    def test_zero_support_class_skipped(self):
        # class 2 never appears in true; its f1 must not dilute the average
        pred = [0, 1, 2]
        true = [0, 1, 1]
        assert weighted_f1(pred, true, 3) == pytest.approx(
            f1_confusion_oracle(pred, true, 3)
        )


class TestMapLabels:
    def test_two_class_mapping(self):
        out = map_labels(
            [AnomalyClass.NORMAL, AnomalyClass.EXTRINSIC, AnomalyClass.INTRINSIC], "two_class"
        )
        np.testing.assert_array_equal(out, [0, 0, 1])

    def test_three_class_identity(self):
        out = map_labels([0, 1, 2, 1], "three_class")
        np.testing.assert_array_equal(out, [0, 1, 2, 1])

    def test_accepts_records(self):
        from envinv.core import SnippetRange

        records = [
            make_label("a", AnomalyClass.NORMAL),
            make_label("b", AnomalyClass.INTRINSIC, [SnippetRange(0, 2)]),
        ]
        np.testing.assert_array_equal(map_labels(records, "two_class"), [0, 1])

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            map_labels([0], "five_class")


class TestDistanceGap:
    def test_hand_geometry(self):
        # train centroids: class0 at (1,0), class1 at (1,4)
        train = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 4.0], [2.0, 4.0]])
        train_labels = np.array([0, 0, 1, 1])
        # test points (1,1) class0 and (1,3) class1: d_correct=1, d_wrong=3
        test = np.array([[1.0, 1.0], [1.0, 3.0]])
        test_labels = np.array([0, 1])
        out = distance_gap(train, train_labels, test, test_labels)
        assert out.mean_correct == pytest.approx(1.0)
        assert out.mean_incorrect == pytest.approx(3.0)
        assert out.gap == pytest.approx(2.0)

    def test_isometry_invariant(self):
        rng = np.random.default_rng(3)
        train = rng.standard_normal((20, 4))
        train_labels = rng.integers(0, 2, size=20)
        train_labels[:2] = [0, 1]
        test = rng.standard_normal((10, 4))
        test_labels = rng.integers(0, 2, size=10)
        base = distance_gap(train, train_labels, test, test_labels)
        # random rotation + translation
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        shift = rng.standard_normal(4)
        moved = distance_gap(train @ q + shift, train_labels, test @ q + shift, test_labels)
        assert moved.gap == pytest.approx(base.gap, abs=1e-10)

    def test_class_swap_negates(self):
        rng = np.random.default_rng(4)
        train = rng.standard_normal((12, 3))
        train_labels = np.array([0] * 6 + [1] * 6)
        test = rng.standard_normal((8, 3))
        test_labels = np.array([0, 1] * 4)
        a = distance_gap(train, train_labels, test, test_labels)
        b = distance_gap(train, train_labels, test, 1 - test_labels)
        assert a.gap == pytest.approx(-b.gap, abs=1e-10)

    def test_needs_both_classes_in_train(self):
        train = np.zeros((4, 2))
        with pytest.raises(MetricError):
            distance_gap(train, np.zeros(4, dtype=int), train, np.zeros(4, dtype=int))
