"""Domain types for environment/system time series.

A recording is split into two blocks: the environment channels (wind speed,
control signal, ...) that drive the system, and the system channels (power,
temperature, ...) that respond to it.  Everything downstream assumes this
split, so it is baked into the series type rather than carried around as
column metadata.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np


class AnomalyClass(enum.IntEnum):
    NORMAL = 0
    EXTRINSIC = 1
    INTRINSIC = 2


class LabelSource(enum.Enum):
    GENERATOR = "generator"
    HUMAN = "human"


def _check_block(name: str, arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d (channels, time), got ndim={arr.ndim}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} needs at least one channel")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class MultivariateSeries:
    """One recording: env block (N, T) and sys block (M, T) on a shared clock."""

    series_id: str
    env: np.ndarray
    sys: np.ndarray

    def __post_init__(self) -> None:
        if not self.series_id:
            raise ValueError("series_id must be non-empty")
        env = _check_block("env", self.env)
        sys = _check_block("sys", self.sys)
        if env.shape[1] != sys.shape[1]:
            raise ValueError(
                f"env and sys disagree on length: {env.shape[1]} vs {sys.shape[1]}"
            )
        if env.shape[1] < 2:
            raise ValueError("series must have at least 2 time steps")
        object.__setattr__(self, "env", env)
        object.__setattr__(self, "sys", sys)

    @property
    def n_env(self) -> int:
        return self.env.shape[0]

    @property
    def n_sys(self) -> int:
        return self.sys.shape[0]

    @property
    def length(self) -> int:
        return self.env.shape[1]


@dataclass(frozen=True, order=True)
class SnippetRange:
    """Half-open window [start, start + length) in time steps."""

    start: int
    length: int

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ValueError(f"start must be >= 0, got {self.start}")
        if self.length < 1:
            raise ValueError(f"length must be >= 1, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start + self.length

    def overlaps(self, other: "SnippetRange") -> bool:
        return self.start < other.stop and other.start < self.stop


def slice_series(series: MultivariateSeries, window: SnippetRange) -> MultivariateSeries:
    """Cut one window out of a series; the source is left untouched."""
    if window.stop > series.length:
        raise ValueError(
            f"window [{window.start}, {window.stop}) exceeds series length {series.length}"
        )
    return MultivariateSeries(
        series_id=series.series_id,
        env=series.env[:, window.start : window.stop].copy(),
        sys=series.sys[:, window.start : window.stop].copy(),
    )


def znormalize(series: MultivariateSeries) -> MultivariateSeries:
    """Per-channel standardization; constant channels map to zeros."""
    def norm(block: np.ndarray) -> np.ndarray:
        mean = block.mean(axis=1, keepdims=True)
        std = block.std(axis=1, keepdims=True)
        ok = std >= 1e-12
        return np.where(ok, (block - mean) / np.where(ok, std, 1.0), 0.0)

    return MultivariateSeries(
        series_id=series.series_id, env=norm(series.env), sys=norm(series.sys)
    )


@dataclass(frozen=True)
class LabelRecord:
    """Class assignment for one series, with the flagged windows.

    A NORMAL label carries no ranges; anomalous labels carry at least one.
    Ranges are kept sorted and non-overlapping.
    """

    series_id: str
    label: AnomalyClass
    ranges: tuple[SnippetRange, ...]
    source: LabelSource
    timestamp: datetime

    def __post_init__(self) -> None:
        ranges = tuple(sorted(self.ranges))
        if self.label == AnomalyClass.NORMAL and ranges:
            raise ValueError("a NORMAL label must not carry ranges")
        if self.label != AnomalyClass.NORMAL and not ranges:
            raise ValueError(f"{self.label.name} label needs at least one range")
        for a, b in zip(ranges, ranges[1:]):
            if a.overlaps(b):
                raise ValueError(f"ranges overlap: {a} and {b}")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        object.__setattr__(self, "ranges", ranges)

    def check_bounds(self, series_length: int) -> None:
        for r in self.ranges:
            if r.stop > series_length:
                raise ValueError(
                    f"range [{r.start}, {r.stop}) exceeds series length {series_length}"
                )


# Generator-produced labels use a fixed timestamp so dataset files are
# byte-identical across runs; wall-clock time would break that.
GENERATOR_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)


@dataclass(frozen=True)
class DatasetManifest:
    """Summary of a dataset directory: shape, provenance and generator config."""

    name: str
    n_series: int
    length: int
    n_env: int
    n_sys: int
    seed: int | None
    generator_config: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_series < 1:
            raise ValueError("n_series must be >= 1")
        for attr in ("length", "n_env", "n_sys"):
            if getattr(self, attr) < 1:
                raise ValueError(f"{attr} must be >= 1")
