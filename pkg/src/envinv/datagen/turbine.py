"""Ingestion of the public wind-turbine SCADA export.

Each input CSV is one turbine's log.  The selected ambient columns become the
environment block and the generator/drivetrain columns the system block; rows
where any selected value is missing are dropped, and the remaining rows are
chopped into fixed-length windows, one series per window.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..core import (
    DatasetManifest,
    LabelRecord,
    MultivariateSeries,
    read_labels_csv,
)

ENV_COLUMNS = [
    "Amb_WindSpeed_Avg",
    "Amb_WindSpeed_Est_Avg",
    "Amb_WindDir_Relative_Avg",
    "Amb_WindDir_Abs_Avg",
    "Amb_Temp_Avg",
]
SYS_COLUMNS = [
    "Gen_RPM_Avg",
    "Prod_LatestAvg_TotActPwr",
    "Gear_Bear_Temp_Avg",
    "Hyd_Oil_Temp_Avg",
]
WINDOW_LEN = 144


class IngestionError(ValueError):
    pass


def _read_turbine_csv(path: Path) -> np.ndarray:
    """Selected columns as (9, rows_kept); rows with missing values dropped."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in ENV_COLUMNS + SYS_COLUMNS:
            if col not in header:
                raise IngestionError(f"{path}: missing required column {col!r}")
        rows = []
        for rec in reader:
            try:
                values = [float(rec[c]) for c in ENV_COLUMNS + SYS_COLUMNS]
            except (TypeError, ValueError):
                continue
            if not all(np.isfinite(v) for v in values):
                continue
            rows.append(values)
    if len(rows) < 2:
        raise IngestionError(f"{path}: fewer than 2 usable rows after dropping missing values")
    return np.asarray(rows, dtype=np.float64).T


def load_turbine(
    directory: Path | str, window_len: int = WINDOW_LEN
) -> tuple[DatasetManifest, list[MultivariateSeries], list[LabelRecord]]:
    directory = Path(directory)
    files = sorted(p for p in directory.glob("*.csv") if p.name != "labels.csv")
    if not files:
        raise IngestionError(f"{directory}: no turbine CSV files found")

    blocks = {p.stem: _read_turbine_csv(p) for p in files}
    # one shared window length keeps every emitted series the same shape;
    # a log shorter than the requested window shrinks it for the whole set
    effective = min(window_len, min(b.shape[1] for b in blocks.values()))

    series = []
    for stem in sorted(blocks):
        block = blocks[stem]
        n_windows = block.shape[1] // effective
        for w in range(n_windows):
            chunk = block[:, w * effective : (w + 1) * effective]
            series.append(
                MultivariateSeries(
                    series_id=f"{stem}_w{w:03d}",
                    env=chunk[: len(ENV_COLUMNS)],
                    sys=chunk[len(ENV_COLUMNS) :],
                )
            )

    labels: list[LabelRecord] = []
    labels_path = directory / "labels.csv"
    if labels_path.exists():
        known = {s.series_id for s in series}
        labels = [rec for rec in read_labels_csv(labels_path) if rec.series_id in known]

    manifest = DatasetManifest(
        name="turbine",
        n_series=len(series),
        length=effective,
        n_env=len(ENV_COLUMNS),
        n_sys=len(SYS_COLUMNS),
        seed=None,
        generator_config={"window_len": window_len, "files": [p.name for p in files]},
    )
    return manifest, series, labels
