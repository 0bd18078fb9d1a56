import numpy as np
import pytest

from envinv.core import (
    AnomalyClass,
    DatasetManifest,
    LabelRecord,
    LabelSource,
    MultivariateSeries,
    SnippetRange,
    GENERATOR_EPOCH,
)
from envinv.core.io import Dataset
from envinv.datagen import SyntheticConfig, gen_synthetic


def make_series(series_id="s0", n_env=2, n_sys=2, length=64, seed=0):
    rng = np.random.default_rng(seed)
    return MultivariateSeries(
        series_id=series_id,
        env=rng.standard_normal((n_env, length)),
        sys=rng.standard_normal((n_sys, length)),
    )


def make_label(series_id, label, ranges=()):
    return LabelRecord(
        series_id=series_id,
        label=label,
        ranges=tuple(ranges),
        source=LabelSource.GENERATOR,
        timestamp=GENERATOR_EPOCH,
    )


@pytest.fixture(scope="session")
def tiny_synthetic():
    """16 short synthetic series with labels, enough to train a couple epochs."""
    config = SyntheticConfig(n_series=16, length=160)
    manifest, series, labels = gen_synthetic(config, seed=11)
    return manifest, series, labels


@pytest.fixture(scope="session")
def tiny_dataset(tiny_synthetic):
    from envinv.core import znormalize

    manifest, series, labels = tiny_synthetic
    return Dataset(
        manifest=manifest,
        series=tuple(znormalize(s) for s in series),
        labels=tuple(labels),
    )


@pytest.fixture(scope="session")
def tiny_dataset_dir(tmp_path_factory, tiny_synthetic):
    from envinv.core.io import write_dataset

    manifest, series, labels = tiny_synthetic
    root = tmp_path_factory.mktemp("tinyds")
    write_dataset(root, manifest, series, labels)
    return root


# Criterion verdicts collected by test_acceptance; echoed after the run so
# they are visible without -s.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
