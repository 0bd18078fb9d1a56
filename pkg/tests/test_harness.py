"""Experiment harness: splits, report assembly, and the per-seed pipeline."""
import json

import numpy as np
import pytest

from envinv.core import AnomalyClass, load_dataset
from envinv.core.io import Dataset
from envinv.datagen import SyntheticConfig, gen_synthetic
from envinv.core import znormalize
from envinv.evaluate.harness import (
    ALL_METHODS,
    EMBEDDING_METHODS,
    SCORE_METHODS,
    ExperimentReport,
    render_table,
    reports_from_outcomes,
    run_outcomes,
    run_seed,
    split_dataset,
    subset,
    write_reports,
)


@pytest.fixture(scope="module")
def harness_dataset():
    config = SyntheticConfig(n_series=24, length=160)
    manifest, series, labels = gen_synthetic(config, seed=3)
    return Dataset(
        manifest=manifest,
        series=tuple(znormalize(s) for s in series),
        labels=tuple(labels),
    )


class TestSplit:
    def test_partition(self, harness_dataset):
        train_idx, test_idx = split_dataset(harness_dataset, seed=0)
        n = len(harness_dataset.series)
        assert len(train_idx) + len(test_idx) == n
        assert set(train_idx).isdisjoint(test_idx)
        assert list(train_idx) == sorted(train_idx)
        assert list(test_idx) == sorted(test_idx)

    def test_stratified_counts(self, harness_dataset):
        """Per class, the train side takes max(1, round(0.7 * n_c)) members."""
        classes = harness_dataset.classes()
        train_idx, _ = split_dataset(harness_dataset, seed=0)
        for c in np.unique(classes):
            n_c = int((classes == c).sum())
            got = int((classes[train_idx] == c).sum())
            assert got == max(1, round(0.7 * n_c)), f"class {c}"

    def test_deterministic_and_seed_sensitive(self, harness_dataset):
        a1, b1 = split_dataset(harness_dataset, seed=0)
        a2, b2 = split_dataset(harness_dataset, seed=0)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(b1, b2)
        a3, _ = split_dataset(harness_dataset, seed=1)
        assert not np.array_equal(a1, a3)

    def test_split_independent_of_training_stream(self, harness_dataset):
        """The split stream is keyed separately from the model seed stream, so
        it only depends on the seed value."""
        before, _ = split_dataset(harness_dataset, seed=4)
        np.random.default_rng(4).standard_normal(100)
        after, _ = split_dataset(harness_dataset, seed=4)
        np.testing.assert_array_equal(before, after)


class TestSubset:
    def test_manifest_and_alignment(self, harness_dataset):
        idx = np.array([0, 3, 5])
        sub = subset(harness_dataset, idx)
        assert sub.manifest.n_series == 3
        assert [s.series_id for s in sub.series] == [
            harness_dataset.series[i].series_id for i in idx
        ]
        for s in sub.series:
            assert sub.label_of(s.series_id).series_id == s.series_id


class TestExperimentReport:
    def test_mean_and_population_std(self):
        rep = ExperimentReport(
            dataset="d", method="m", metric="auroc", seeds=(0, 1, 2), values=(0.5, 0.7, 0.9)
        )
        assert rep.mean == pytest.approx(0.7, abs=1e-15)
        # population std: sqrt(mean((x - 0.7)^2)) = sqrt(0.04/1.5)
        assert rep.std == pytest.approx(np.sqrt((0.04 + 0.0 + 0.04) / 3), abs=1e-15)

    def test_round_trip_via_files(self, tmp_path):
        rep = ExperimentReport(
            dataset="d", method="m", metric="auroc", seeds=(0, 1), values=(0.25, 0.75)
        )
        write_reports([rep], tmp_path)
        loaded = json.loads((tmp_path / "reports.json").read_text())
        assert loaded[0]["mean"] == pytest.approx(0.5)
        assert loaded[0]["values"] == [0.25, 0.75]
        lines = (tmp_path / "reports.csv").read_text().splitlines()
        assert lines[0] == "dataset,method,metric,seed,value"
        assert "d,m,auroc,0,0.25" in lines
        assert "d,m,auroc,mean,0.5" in lines

    def test_render_table_shape(self, tmp_path):
        reps = [
            ExperimentReport("ds1", "envinv", "auroc", (0,), (0.9,)),
            ExperimentReport("ds1", "basic", "auroc", (0,), (0.5,)),
        ]
        write_reports(reps, tmp_path)
        table = render_table([tmp_path / "reports.json"], metric="auroc")
        lines = table.splitlines()
        assert lines[0] == "method,ds1"
        assert "basic,0.500 ± 0.000" in lines
        assert "envinv,0.900 ± 0.000" in lines


class TestRunSeed:
    def test_embedding_method_outcome(self, harness_dataset):
        out = run_seed(harness_dataset, "envinv", seed=0, epochs=2)
        assert 0.0 <= out.auroc <= 1.0
        assert 0.0 <= out.f1_two <= 1.0
        assert 0.0 <= out.f1_three <= 1.0
        assert out.gap is not None
        _, test_idx = split_dataset(harness_dataset, seed=0)
        assert out.scores.shape == (len(test_idx),)
        assert set(np.round(out.scores * 5).astype(int)) <= set(range(6))

    def test_score_method_outcome(self, harness_dataset):
        out = run_seed(harness_dataset, "resthresh", seed=0)
        assert 0.0 <= out.auroc <= 1.0
        assert out.f1_two is None and out.f1_three is None and out.gap is None

    def test_unknown_method(self, harness_dataset):
        with pytest.raises(ValueError, match="nope"):
            run_seed(harness_dataset, "nope", seed=0)

    def test_deterministic(self, harness_dataset):
        a = run_seed(harness_dataset, "envinv", seed=1, epochs=2)
        b = run_seed(harness_dataset, "envinv", seed=1, epochs=2)
        assert a.auroc == b.auroc
        np.testing.assert_array_equal(a.scores, b.scores)


class TestRunOutcomes:
    def test_sequential_matches_run_seed(self, harness_dataset, tmp_path):
        from envinv.core.io import write_dataset

        write_dataset(tmp_path / "ds", harness_dataset.manifest,
                      list(harness_dataset.series), list(harness_dataset.labels))
        got = run_outcomes(
            tmp_path / "ds", tasks=[("resthresh", None)], seeds=[0, 1], workers=1
        )
        assert set(got) == {("resthresh", None, 0), ("resthresh", None, 1)}
        direct = run_seed(load_dataset(tmp_path / "ds"), "resthresh", 0)
        assert got[("resthresh", None, 0)].auroc == direct.auroc

    def test_reports_from_outcomes_layout(self, harness_dataset):
        outcomes = {s: run_seed(harness_dataset, "envinv", s, epochs=2) for s in (0, 1)}
        reps = reports_from_outcomes("syn", "envinv", [0, 1], outcomes)
        metrics = [r.metric for r in reps]
        assert metrics == ["auroc", "weighted_f1_two", "weighted_f1_three", "distance_gap"]
        assert all(r.seeds == (0, 1) for r in reps)
        score_only = {s: run_seed(harness_dataset, "resthresh", s) for s in (0, 1)}
        reps2 = reports_from_outcomes("syn", "resthresh", [0, 1], score_only)
        assert [r.metric for r in reps2] == ["auroc"]


class TestMethodRegistry:
    def test_names(self):
        assert EMBEDDING_METHODS == ("envinv", "basic", "residual")
        assert set(SCORE_METHODS) == {"resthresh", "iforest", "iforest_res", "lof", "lof_res"}
        assert set(ALL_METHODS) == set(EMBEDDING_METHODS) | set(SCORE_METHODS)
