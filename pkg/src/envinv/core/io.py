"""Dataset directory layout: manifest.json, one CSV per series, labels.csv.

Floats are written with repr(), the shortest text that round-trips a float64
exactly, so write -> read -> write is byte-identical.  That property is what
makes dataset generation reproducible at the file level, not just in memory.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

import numpy as np

from .series import (
    AnomalyClass,
    DatasetManifest,
    LabelRecord,
    LabelSource,
    MultivariateSeries,
    SnippetRange,
    znormalize,
)

MANIFEST_NAME = "manifest.json"
LABELS_NAME = "labels.csv"


class ParseError(ValueError):
    """Malformed dataset file; message carries the path and 1-based line."""

    def __init__(self, path: Path | str, line: int, reason: str) -> None:
        super().__init__(f"{path}:{line}: {reason}")
        self.path = str(path)
        self.line = line


def fmt_float(value: float) -> str:
    return repr(float(value))


def write_series_csv(series: MultivariateSeries, path: Path | str) -> None:
    path = Path(path)
    header = (
        ["x"]
        + [f"env_{i}" for i in range(series.n_env)]
        + [f"sys_{j}" for j in range(series.n_sys)]
    )
    rows = [",".join(header)]
    for t in range(series.length):
        cells = [str(t)]
        cells += [fmt_float(v) for v in series.env[:, t]]
        cells += [fmt_float(v) for v in series.sys[:, t]]
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n")


def read_series_csv(path: Path | str, series_id: str | None = None) -> MultivariateSeries:
    path = Path(path)
    text = path.read_text()
    lines = text.splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file")
    cols = lines[0].split(",")
    n_env = sum(1 for c in cols if c.startswith("env_"))
    n_sys = sum(1 for c in cols if c.startswith("sys_"))
    expected = ["x"] + [f"env_{i}" for i in range(n_env)] + [f"sys_{j}" for j in range(n_sys)]
    if cols != expected:
        raise ParseError(path, 1, f"malformed header {lines[0]!r}")
    if n_env < 1 or n_sys < 1:
        raise ParseError(path, 1, "header must declare at least one env and one sys column")

    width = 1 + n_env + n_sys
    data = np.empty((width - 1, len(lines) - 1), dtype=np.float64)
    for k, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != width:
            raise ParseError(path, k, f"expected {width} columns, got {len(cells)}")
        try:
            values = [float(c) for c in cells[1:]]
        except ValueError:
            raise ParseError(path, k, f"non-numeric value in row {line!r}") from None
        if not all(np.isfinite(v) for v in values):
            raise ParseError(path, k, "non-finite value")
        data[:, k - 2] = values

    if series_id is None:
        series_id = path.stem
    return MultivariateSeries(
        series_id=series_id, env=data[:n_env], sys=data[n_env:]
    )


def _ranges_to_str(ranges: tuple[SnippetRange, ...]) -> str:
    return ";".join(f"{r.start}:{r.length}" for r in ranges)


def _ranges_from_str(text: str, path: Path | str, line: int) -> tuple[SnippetRange, ...]:
    if not text:
        return ()
    out = []
    for part in text.split(";"):
        try:
            start, length = part.split(":")
            out.append(SnippetRange(start=int(start), length=int(length)))
        except ValueError:
            raise ParseError(path, line, f"bad range token {part!r}") from None
    return tuple(out)


def labels_csv_text(labels: list[LabelRecord]) -> str:
    rows = ["series_id,class,ranges,source,timestamp"]
    for rec in labels:
        rows.append(
            ",".join(
                [
                    rec.series_id,
                    rec.label.name.lower(),
                    _ranges_to_str(rec.ranges),
                    rec.source.value,
                    rec.timestamp.isoformat(),
                ]
            )
        )
    return "\n".join(rows) + "\n"


def write_labels_csv(labels: list[LabelRecord], path: Path | str) -> None:
    Path(path).write_text(labels_csv_text(labels))


def read_labels_csv(path: Path | str) -> list[LabelRecord]:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != "series_id,class,ranges,source,timestamp":
        raise ParseError(path, 1, "malformed labels header")
    out = []
    for k, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 5:
            raise ParseError(path, k, f"expected 5 columns, got {len(cells)}")
        sid, cls, ranges, source, ts = cells
        try:
            label = AnomalyClass[cls.upper()]
        except KeyError:
            raise ParseError(path, k, f"unknown class {cls!r}") from None
        try:
            src = LabelSource(source)
        except ValueError:
            raise ParseError(path, k, f"unknown source {source!r}") from None
        try:
            when = datetime.fromisoformat(ts)
        except ValueError:
            raise ParseError(path, k, f"bad timestamp {ts!r}") from None
        out.append(
            LabelRecord(
                series_id=sid,
                label=label,
                ranges=_ranges_from_str(ranges, path, k),
                source=src,
                timestamp=when,
            )
        )
    return out


def write_manifest(manifest: DatasetManifest, series_paths: list[str], path: Path | str) -> None:
    payload = {
        "name": manifest.name,
        "n_series": manifest.n_series,
        "T": manifest.length,
        "N": manifest.n_env,
        "M": manifest.n_sys,
        "seed": manifest.seed,
        "generator_config": manifest.generator_config,
        "series": series_paths,
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_manifest(path: Path | str) -> tuple[DatasetManifest, list[str]]:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    try:
        manifest = DatasetManifest(
            name=payload["name"],
            n_series=payload["n_series"],
            length=payload["T"],
            n_env=payload["N"],
            n_sys=payload["M"],
            seed=payload["seed"],
            generator_config=payload.get("generator_config", {}),
        )
        series_paths = list(payload["series"])
    except KeyError as exc:
        raise ParseError(path, 1, f"manifest missing field {exc.args[0]!r}") from None
    if len(series_paths) != manifest.n_series:
        raise ParseError(
            path, 1, f"manifest lists {len(series_paths)} series, declares {manifest.n_series}"
        )
    return manifest, series_paths


@dataclass(frozen=True)
class Dataset:
    """A manifest with its series (manifest order) and per-series labels."""

    manifest: DatasetManifest
    series: tuple[MultivariateSeries, ...]
    labels: tuple[LabelRecord, ...]

    def label_of(self, series_id: str) -> LabelRecord:
        for rec in self.labels:
            if rec.series_id == series_id:
                return rec
        raise KeyError(series_id)

    def classes(self) -> np.ndarray:
        by_id = {rec.series_id: rec.label for rec in self.labels}
        return np.array([int(by_id[s.series_id]) for s in self.series], dtype=np.int64)


def write_dataset(
    root: Path | str,
    manifest: DatasetManifest,
    series: list[MultivariateSeries],
    labels: list[LabelRecord],
) -> None:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in series:
        rel = f"{s.series_id}.csv"
        write_series_csv(s, root / rel)
        paths.append(rel)
    write_labels_csv(labels, root / LABELS_NAME)
    write_manifest(manifest, paths, root / MANIFEST_NAME)


def load_dataset(root: Path | str, normalize: bool = True) -> Dataset:
    """Read a dataset directory back, checking manifest consistency.

    normalize=True applies per-channel z-normalization to every series, the
    form the embedding and detection stages expect.  Pass False to get raw
    values, e.g. for residual models fit in original units.
    """
    root = Path(root)
    manifest, series_paths = read_manifest(root / MANIFEST_NAME)
    series = []
    for rel in series_paths:
        s = read_series_csv(root / rel)
        if s.n_env != manifest.n_env or s.n_sys != manifest.n_sys:
            raise ParseError(
                root / rel,
                1,
                f"series has N={s.n_env}, M={s.n_sys}; manifest declares "
                f"N={manifest.n_env}, M={manifest.n_sys}",
            )
        series.append(znormalize(s) if normalize else s)

    labels_path = root / LABELS_NAME
    labels: list[LabelRecord] = []
    if labels_path.exists():
        labels = read_labels_csv(labels_path)
        lengths = {s.series_id: s.length for s in series}
        for rec in labels:
            if rec.series_id not in lengths:
                raise ParseError(labels_path, 1, f"label for unknown series {rec.series_id!r}")
            rec.check_bounds(lengths[rec.series_id])
    return Dataset(manifest=manifest, series=tuple(series), labels=tuple(labels))
