"""Seeded experiment harness.

One seed drives everything downstream of it: the stratified train/test
split, model training, and any randomized detector.  Seeds fan out across
processes; results are keyed and sorted so the report is identical however
the pool schedules them.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..core import AnomalyClass, Dataset, load_dataset
from ..detect import (
    fit_regressor,
    isolation_forest_fit,
    knn_classify,
    lof_fit,
    lof_score,
    res_thresh_score,
    residuals,
)
from ..embedding import Mode, TrainConfig, embed_dataset, train
from .metrics import GapResult, auroc, distance_gap, map_labels, weighted_f1

EMBEDDING_METHODS = ("envinv", "basic", "residual")
SCORE_METHODS = ("resthresh", "iforest", "iforest_res", "lof", "lof_res")
ALL_METHODS = EMBEDDING_METHODS + SCORE_METHODS

_SPLIT_STREAM = 7919  # fixed tag so the split never shares a stream with training


@dataclass(frozen=True)
class ExperimentReport:
    dataset: str
    method: str
    metric: str
    seeds: tuple[int, ...]
    values: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def std(self) -> float:
        return float(np.std(self.values))  # population std, matching the +/- convention

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "method": self.method,
            "metric": self.metric,
            "seeds": list(self.seeds),
            "values": list(self.values),
            "mean": self.mean,
            "std": self.std,
        }


def split_dataset(dataset: Dataset, seed: int, train_frac: float = 0.7) -> tuple[np.ndarray, np.ndarray]:
    """Stratified split: per class, a seeded shuffle then a train_frac cut."""
    classes = dataset.classes()
    rng = np.random.default_rng(np.random.SeedSequence([seed, _SPLIT_STREAM]))
    train_idx: list[int] = []
    test_idx: list[int] = []
    for c in np.unique(classes):
        members = np.nonzero(classes == c)[0]
        members = members[rng.permutation(members.size)]
        n_train = max(1, int(round(train_frac * members.size)))
        train_idx.extend(members[:n_train].tolist())
        test_idx.extend(members[n_train:].tolist())
    return np.array(sorted(train_idx)), np.array(sorted(test_idx))


def subset(dataset: Dataset, idx: np.ndarray) -> Dataset:
    series = tuple(dataset.series[i] for i in idx)
    ids = {s.series_id for s in series}
    labels = tuple(rec for rec in dataset.labels if rec.series_id in ids)
    manifest = replace(dataset.manifest, n_series=len(series))
    return Dataset(manifest=manifest, series=series, labels=labels)


@dataclass
class SeedOutcome:
    """Everything one (method, seed) run produces that a metric might want."""

    seed: int
    auroc: float
    f1_two: float | None = None
    f1_three: float | None = None
    gap: GapResult | None = None
    scores: np.ndarray = field(default=None, repr=False)


def _knn_vote(train_emb, train_cls, test_emb, k, positive_class):
    preds = np.empty(test_emb.shape[0], dtype=np.int64)
    scores = np.empty(test_emb.shape[0])
    for i, row in enumerate(test_emb):
        preds[i], scores[i] = knn_classify(
            train_emb, train_cls, row, k=k, positive_class=positive_class
        )
    return preds, scores


def _run_embedding_method(
    dataset: Dataset, method: str, seed: int, epochs: int | None, lam: float | None
) -> SeedOutcome:
    mode = {"envinv": Mode.ENV_INV, "basic": Mode.BASIC, "residual": Mode.RESIDUAL_INPUT}[method]
    config = TrainConfig(mode=mode, seed=seed)
    if epochs is not None:
        config = replace(config, epochs=epochs)
    if lam is not None:
        config = replace(config, lam=lam)
    train_idx, test_idx = split_dataset(dataset, seed)
    train_set = subset(dataset, train_idx)
    test_set = subset(dataset, test_idx)
    model, _ = train(train_set, config)
    emb_train = embed_dataset(model, train_set)
    emb_test = embed_dataset(model, test_set)

    cls_train3 = map_labels([train_set.label_of(s.series_id) for s in train_set.series], "three_class")
    cls_test3 = map_labels([test_set.label_of(s.series_id) for s in test_set.series], "three_class")
    cls_train2 = map_labels(cls_train3, "two_class")
    cls_test2 = map_labels(cls_test3, "two_class")

    pred2, scores = _knn_vote(emb_train, cls_train2, emb_test, k=5, positive_class=1)
    pred3, _ = _knn_vote(emb_train, cls_train3, emb_test, k=5, positive_class=int(AnomalyClass.INTRINSIC))
    return SeedOutcome(
        seed=seed,
        auroc=auroc(scores, cls_test2),
        f1_two=weighted_f1(pred2, cls_test2, n_classes=2),
        f1_three=weighted_f1(pred3, cls_test3, n_classes=3),
        gap=distance_gap(emb_train, cls_train2, emb_test, cls_test2),
        scores=scores,
    )


def _pool_steps(series_list) -> np.ndarray:
    return np.concatenate(
        [np.concatenate([s.env, s.sys], axis=0).T for s in series_list], axis=0
    )


def _run_score_method(dataset: Dataset, method: str, seed: int) -> SeedOutcome:
    train_idx, test_idx = split_dataset(dataset, seed)
    train_set = subset(dataset, train_idx)
    test_set = subset(dataset, test_idx)
    cls_test2 = map_labels(
        [test_set.label_of(s.series_id) for s in test_set.series], "two_class"
    )

    if method in ("resthresh", "iforest_res", "lof_res"):
        reg = fit_regressor(list(train_set.series), seed=seed)
        test_mats = [residuals(reg, s) for s in test_set.series]
        if method == "resthresh":
            scores = np.array([res_thresh_score(m) for m in test_mats])
            return SeedOutcome(seed=seed, auroc=auroc(scores, cls_test2), scores=scores)
        train_pts = np.concatenate(
            [residuals(reg, s).T for s in train_set.series], axis=0
        )
        test_pts = [m.T for m in test_mats]
    else:
        train_pts = _pool_steps(train_set.series)
        test_pts = [np.concatenate([s.env, s.sys], axis=0).T for s in test_set.series]

    if method.startswith("iforest"):
        forest = isolation_forest_fit(train_pts, seed=seed)
        scores = np.array([float(forest.score(p).max()) for p in test_pts])
    elif method.startswith("lof"):
        model = lof_fit(train_pts, k=20)
        scores = np.array([float(lof_score(model, p).max()) for p in test_pts])
    else:
        raise ValueError(f"unknown method {method!r}")
    return SeedOutcome(seed=seed, auroc=auroc(scores, cls_test2), scores=scores)


def run_seed(
    dataset: Dataset, method: str, seed: int, epochs: int | None = None, lam: float | None = None
) -> SeedOutcome:
    if method in EMBEDDING_METHODS:
        return _run_embedding_method(dataset, method, seed, epochs, lam)
    if method in SCORE_METHODS:
        return _run_score_method(dataset, method, seed)
    raise ValueError(f"unknown method {method!r}")


def _seed_task(args: tuple) -> tuple[tuple[str, float | None, int], SeedOutcome]:
    dataset_dir, method, seed, epochs, lam = args
    dataset = load_dataset(dataset_dir)
    outcome = run_seed(dataset, method, seed, epochs=epochs, lam=lam)
    outcome.scores = None  # keep the IPC payload small
    return (method, lam, seed), outcome


def run_outcomes(
    dataset_dir: Path | str,
    tasks: list[tuple[str, float | None]],
    seeds: list[int],
    epochs: int | None = None,
    workers: int | None = None,
) -> dict[tuple[str, float | None, int], SeedOutcome]:
    """Fan (method, lam) x seed combinations over a process pool."""
    jobs = [
        (str(dataset_dir), method, seed, epochs, lam)
        for method, lam in tasks
        for seed in seeds
    ]
    if workers is None:
        workers = min(len(jobs), os.cpu_count() or 1)
    results: dict[tuple[str, float | None, int], SeedOutcome] = {}
    if workers <= 1 or len(jobs) == 1:
        for job in jobs:
            key, outcome = _seed_task(job)
            results[key] = outcome
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for key, outcome in pool.map(_seed_task, jobs):
                results[key] = outcome
    return results


def reports_from_outcomes(
    dataset_name: str,
    method: str,
    seeds: list[int],
    outcomes: dict[int, SeedOutcome],
) -> list[ExperimentReport]:
    seeds = sorted(seeds)
    out = [
        ExperimentReport(
            dataset=dataset_name,
            method=method,
            metric="auroc",
            seeds=tuple(seeds),
            values=tuple(outcomes[s].auroc for s in seeds),
        )
    ]
    if outcomes[seeds[0]].f1_three is not None:
        out.append(
            ExperimentReport(
                dataset=dataset_name, method=method, metric="weighted_f1_two",
                seeds=tuple(seeds), values=tuple(outcomes[s].f1_two for s in seeds),
            )
        )
        out.append(
            ExperimentReport(
                dataset=dataset_name, method=method, metric="weighted_f1_three",
                seeds=tuple(seeds), values=tuple(outcomes[s].f1_three for s in seeds),
            )
        )
        out.append(
            ExperimentReport(
                dataset=dataset_name, method=method, metric="distance_gap",
                seeds=tuple(seeds), values=tuple(outcomes[s].gap.gap for s in seeds),
            )
        )
    return out


def run_experiment(
    dataset: Dataset | Path | str,
    method: str,
    seeds: list[int],
    scheme: str = "two_class",
    epochs: int | None = None,
    lam: float | None = None,
) -> ExperimentReport:
    """Sequential single-method runner; the headline metric for the scheme."""
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)
    outcomes = {s: run_seed(dataset, method, s, epochs=epochs, lam=lam) for s in seeds}
    reports = reports_from_outcomes(dataset.manifest.name, method, seeds, outcomes)
    wanted = "auroc" if scheme == "two_class" else "weighted_f1_three"
    for rep in reports:
        if rep.metric == wanted:
            return rep
    raise ValueError(f"method {method!r} does not produce metric {wanted!r}")


def write_reports(reports: list[ExperimentReport], out_dir: Path | str) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = [rep.to_dict() for rep in reports]
    (out_dir / "reports.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    rows = ["dataset,method,metric,seed,value"]
    for rep in reports:
        for seed, value in zip(rep.seeds, rep.values):
            rows.append(f"{rep.dataset},{rep.method},{rep.metric},{seed},{value!r}")
        rows.append(f"{rep.dataset},{rep.method},{rep.metric},mean,{rep.mean!r}")
        rows.append(f"{rep.dataset},{rep.method},{rep.metric},std,{rep.std!r}")
    (out_dir / "reports.csv").write_text("\n".join(rows) + "\n")


def render_table(report_files: list[Path | str], metric: str = "auroc") -> str:
    """Methods x datasets grid of "mean +/- std" cells, CSV text."""
    reports: list[dict] = []
    for path in report_files:
        reports.extend(json.loads(Path(path).read_text()))
    reports = [r for r in reports if r["metric"] == metric]
    datasets = sorted({r["dataset"] for r in reports})
    methods = sorted({r["method"] for r in reports})
    cells = {(r["method"], r["dataset"]): f"{r['mean']:.3f} ± {r['std']:.3f}" for r in reports}
    rows = ["method," + ",".join(datasets)]
    for m in methods:
        rows.append(m + "," + ",".join(cells.get((m, d), "") for d in datasets))
    return "\n".join(rows) + "\n"
