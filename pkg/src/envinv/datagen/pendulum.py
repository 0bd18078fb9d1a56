"""Damped driven pendulum with an OU control torque.

The control signal is the single environment channel; the system channels
are (theta, omega) integrated with classical RK4.  Intrinsic anomalies change
the chord length during a hidden interval, so the same control produces a
different response: the dependency breaks while the environment stays normal.
The label range runs from the anomaly start to the end of the series because
the state never snaps back when the length reverts; everything before the
start is bit-identical to the clean twin.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

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
class PendulumConfig:
    n_series: int = 300
    length: int = 144
    # dt and drive amplitude picked so a 20% window spans >2 natural periods
    # and the forced swing dominates the initial transient: the chord-length
    # anomaly then shows in the response gain, not just in the ring-down
    dt: float = 0.15
    gravity: float = 9.81
    chord: float = 1.0
    damping: float = 0.3
    ou_reversion: float = 0.5
    ou_volatility: float = 0.3
    ou_mean_amplitude: float = 3.0
    ou_mean_period: float = 48.0
    p_intrinsic: float = 0.3
    length_factor: float = 1.6

    def __post_init__(self) -> None:
        if self.n_series < 1 or self.length < 2:
            raise ValueError("n_series must be >= 1 and length >= 2")
        if self.dt <= 0 or self.chord <= 0 or self.gravity <= 0:
            raise ValueError("dt, chord and gravity must be positive")
        if self.ou_reversion < 0 or self.ou_volatility < 0:
            raise ValueError("OU parameters must be >= 0")
        if not 0 <= self.p_intrinsic <= 1:
            raise ValueError("p_intrinsic must lie in [0, 1]")
        if self.length_factor <= 0:
            raise ValueError("length_factor must be positive")


def ou_path(
    T: int,
    dt: float,
    reversion: float,
    volatility: float,
    mean_fn: Callable[[int], float],
    seed,
) -> np.ndarray:
    """Euler-Maruyama path of an OU process whose mean follows mean_fn.

    u[t+1] = u[t] + reversion * (mean_fn(t) - u[t]) * dt
                  + volatility * sqrt(dt) * xi,   u[0] = mean_fn(0)
    """
    if reversion < 0 or volatility < 0:
        raise ValueError("reversion and volatility must be >= 0")
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(max(T - 1, 0))
    u = np.empty(T, dtype=np.float64)
    u[0] = mean_fn(0)
    sq = np.sqrt(dt)
    for t in range(T - 1):
        u[t + 1] = u[t] + reversion * (mean_fn(t) - u[t]) * dt + volatility * sq * xi[t]
    return u


def pendulum_dynamics(
    gravity: float, chord: float, damping: float
) -> Callable[[np.ndarray, float], np.ndarray]:
    """State derivative for theta'' = -(g/L) sin(theta) - damping*omega + u."""

    def deriv(state: np.ndarray, u: float) -> np.ndarray:
        theta, omega = state
        return np.array([omega, -(gravity / chord) * np.sin(theta) - damping * omega + u])

    return deriv


def rk4_step(
    state: np.ndarray,
    deriv: Callable[[np.ndarray, float], np.ndarray],
    u: float,
    dt: float,
) -> np.ndarray:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    k1 = deriv(state, u)
    k2 = deriv(state + 0.5 * dt * k1, u)
    k3 = deriv(state + 0.5 * dt * k2, u)
    k4 = deriv(state + dt * k3, u)
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _gen_one(
    config: PendulumConfig, child: np.random.SeedSequence, index: int, inject: bool
) -> tuple[MultivariateSeries, AnomalyClass, SnippetRange | None]:
    seq_class, seq_ou, seq_init = child.spawn(3)
    rng_class = np.random.default_rng(seq_class)

    label = AnomalyClass.NORMAL
    window = None
    if rng_class.random() < config.p_intrinsic:
        label = AnomalyClass.INTRINSIC
        frac = rng_class.uniform(0.2, 0.5)
        length = max(1, round(frac * config.length))
        start = int(rng_class.integers(0, config.length - length + 1))
        window = SnippetRange(start=start, length=length)

    T = config.length
    two_pi = 2.0 * np.pi
    control = ou_path(
        T,
        config.dt,
        config.ou_reversion,
        config.ou_volatility,
        lambda t: config.ou_mean_amplitude * np.sin(two_pi * t / config.ou_mean_period),
        seq_ou,
    )

    rng_init = np.random.default_rng(seq_init)
    state = np.array([rng_init.uniform(-0.5, 0.5), rng_init.uniform(-0.5, 0.5)])
    theta = np.empty(T)
    omega = np.empty(T)
    theta[0], omega[0] = state
    base = pendulum_dynamics(config.gravity, config.chord, config.damping)
    longer = pendulum_dynamics(
        config.gravity, config.chord * config.length_factor, config.damping
    )
    for t in range(T - 1):
        anomalous_step = (
            inject and window is not None and window.start <= t < window.stop
        )
        state = rk4_step(state, longer if anomalous_step else base, control[t], config.dt)
        theta[t + 1], omega[t + 1] = state

    series = MultivariateSeries(
        series_id=f"pend_{index:04d}", env=control[None, :], sys=np.stack([theta, omega])
    )
    if window is not None:
        # state stays perturbed past the interval; label everything from start on
        window = SnippetRange(start=window.start, length=T - window.start)
    return series, label, window


def gen_pendulum(
    config: PendulumConfig, seed: int
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
        name="pendulum",
        n_series=config.n_series,
        length=config.length,
        n_env=1,
        n_sys=2,
        seed=seed,
        generator_config=asdict(config),
    )
    return manifest, series, labels


def clean_twin_pendulum(config: PendulumConfig, seed: int, index: int) -> MultivariateSeries:
    child = np.random.SeedSequence(seed).spawn(config.n_series)[index]
    series, _, _ = _gen_one(config, child, index, inject=False)
    return series
