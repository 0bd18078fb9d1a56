"""Synthetic env/sys generator with injected anomalies.

Two environment channels (sums of incommensurate sines plus noise) drive two
system channels through a fixed affine law.  Extrinsic anomalies shift an
environment channel and the system follows, so the env->sys dependency stays
intact; intrinsic anomalies shift one system channel after the fact, breaking
it.  Per-series RNG streams are split by purpose (class draw, noise, plan) so
a clean twin can be regenerated on the identical noise stream.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..core import (
    GENERATOR_EPOCH,
    AnomalyClass,
    DatasetManifest,
    LabelRecord,
    LabelSource,
    MultivariateSeries,
    SnippetRange,
)


@dataclass(frozen=True)
class SyntheticConfig:
    n_series: int = 360
    length: int = 1440
    noise_env_0: float = 0.05
    noise_env_1: float = 0.1
    noise_sys_0: float = 0.1
    noise_sys_1: float = 0.08
    p_extrinsic: float = 0.2
    p_intrinsic: float = 0.2
    anomaly_amplitude: float = 1.0
    anomaly_len_frac_lo: float = 0.05
    anomaly_len_frac_hi: float = 0.20

    def __post_init__(self) -> None:
        if self.n_series < 1 or self.length < 2:
            raise ValueError("n_series must be >= 1 and length >= 2")
        for name in ("noise_env_0", "noise_env_1", "noise_sys_0", "noise_sys_1"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (0 <= self.p_extrinsic <= 1 and 0 <= self.p_intrinsic <= 1):
            raise ValueError("anomaly probabilities must lie in [0, 1]")
        if self.p_extrinsic + self.p_intrinsic > 1:
            raise ValueError(
                f"p_extrinsic + p_intrinsic = {self.p_extrinsic + self.p_intrinsic} exceeds 1"
            )
        if not (0 < self.anomaly_len_frac_lo <= self.anomaly_len_frac_hi <= 1):
            raise ValueError("anomaly length fractions must satisfy 0 < lo <= hi <= 1")


def _draw_plan(
    config: SyntheticConfig, rng_class: np.random.Generator
) -> tuple[AnomalyClass, SnippetRange | None, int]:
    u = rng_class.random()
    if u < config.p_extrinsic:
        label = AnomalyClass.EXTRINSIC
    elif u < config.p_extrinsic + config.p_intrinsic:
        label = AnomalyClass.INTRINSIC
    else:
        return AnomalyClass.NORMAL, None, 0
    frac = rng_class.uniform(config.anomaly_len_frac_lo, config.anomaly_len_frac_hi)
    length = max(1, round(frac * config.length))
    start = int(rng_class.integers(0, config.length - length + 1))
    sys_row = int(rng_class.integers(0, 2))
    return label, SnippetRange(start=start, length=length), sys_row


def _gen_one(
    config: SyntheticConfig, child: np.random.SeedSequence, index: int, inject: bool
) -> tuple[MultivariateSeries, AnomalyClass, SnippetRange | None]:
    seq_class, seq_noise = child.spawn(2)
    rng_class = np.random.default_rng(seq_class)
    rng_noise = np.random.default_rng(seq_noise)

    label, window, sys_row = _draw_plan(config, rng_class)
    T = config.length
    t = np.arange(T, dtype=np.float64)
    eps = [rng_noise.standard_normal(T) for _ in range(4)]

    x1 = np.sin(t / 275.0 - 50.0) + np.sin(t / 200.0) + config.noise_env_0 * eps[0]
    x2 = np.sin(t / 100.0) + config.noise_env_1 * eps[1]
    if inject and label == AnomalyClass.EXTRINSIC:
        x1 = x1.copy()
        x1[window.start : window.stop] += config.anomaly_amplitude
    y1 = x1 + config.noise_sys_0 * eps[2]
    y2 = x1 + x2 / 2.0 - 2.0 + config.noise_sys_1 * eps[3]
    if inject and label == AnomalyClass.INTRINSIC:
        target = y1 if sys_row == 0 else y2
        target[window.start : window.stop] += config.anomaly_amplitude

    series = MultivariateSeries(
        series_id=f"syn_{index:04d}", env=np.stack([x1, x2]), sys=np.stack([y1, y2])
    )
    return series, label, window


def gen_synthetic(
    config: SyntheticConfig, seed: int
) -> tuple[DatasetManifest, list[MultivariateSeries], list[LabelRecord]]:
    children = np.random.SeedSequence(seed).spawn(config.n_series)
    series, labels = [], []
    for i, child in enumerate(children):
        s, label, window = _gen_one(config, child, i, inject=True)
        series.append(s)
        labels.append(
            LabelRecord(
                series_id=s.series_id,
                label=label,
                ranges=(window,) if window is not None else (),
                source=LabelSource.GENERATOR,
                timestamp=GENERATOR_EPOCH,
            )
        )
    manifest = DatasetManifest(
        name="synthetic",
        n_series=config.n_series,
        length=config.length,
        n_env=2,
        n_sys=2,
        seed=seed,
        generator_config=asdict(config),
    )
    return manifest, series, labels


def clean_twin_synthetic(
    config: SyntheticConfig, seed: int, index: int
) -> MultivariateSeries:
    """Series `index` regenerated on the same noise stream with injection off."""
    child = np.random.SeedSequence(seed).spawn(config.n_series)[index]
    series, _, _ = _gen_one(config, child, index, inject=False)
    return series
