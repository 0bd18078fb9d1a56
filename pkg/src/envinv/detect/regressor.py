"""Instantaneous env->sys regressor and the residual signal.

h maps x_t to y_t one timestep at a time, deliberately blind to history:
residual detectors built on it inherit exactly that blindness, which is the
failure mode the lagged-dynamics datasets are designed to expose.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import MultivariateSeries
from ..nn import Adam, Tensor, constant, ops, param

HIDDEN = 100
EPOCHS = 200
LR = 1e-3
BATCH = 256
MAX_ROWS = 8192


@dataclass
class RegressorParams:
    n_env: int
    n_sys: int
    w1: Tensor
    b1: Tensor
    w2: Tensor
    b2: Tensor

    def parameters(self) -> list[Tensor]:
        return [self.w1, self.b1, self.w2, self.b2]

    def named(self) -> dict[str, np.ndarray]:
        return {
            "reg/w1": self.w1.values,
            "reg/b1": self.b1.values,
            "reg/w2": self.w2.values,
            "reg/b2": self.b2.values,
        }


def regressor_from_named(tensors: dict[str, np.ndarray]) -> RegressorParams:
    w1 = param(tensors["reg/w1"])
    w2 = param(tensors["reg/w2"])
    return RegressorParams(
        n_env=w1.shape[1], n_sys=w2.shape[0],
        w1=w1, b1=param(tensors["reg/b1"]),
        w2=w2, b2=param(tensors["reg/b2"]),
    )


def regressor_loss(params: RegressorParams, x: np.ndarray, y: np.ndarray) -> Tensor:
    """Mean squared error of the predicted system values on rows (x, y)."""
    hidden = ops.leaky_relu(ops.linear(constant(x), params.w1, params.b1), slope=0.0)
    pred = ops.linear(hidden, params.w2, params.b2)
    return ops.mean_all(ops.square(ops.subtract(pred, constant(y))))


def fit_regressor(
    series: list[MultivariateSeries],
    seed: int,
    hidden: int = HIDDEN,
    epochs: int = EPOCHS,
    lr: float = LR,
) -> RegressorParams:
    """Fit h on the pooled timesteps of the given series.

    Deliberately label-blind: anomalous series stay in the pool.  The level
    shifts are rare enough that the MSE fit shrugs them off, and filtering
    would hand the residual pipeline information no unsupervised detector
    has.
    """
    if not series:
        raise ValueError("no series to fit the regressor on")

    x = np.concatenate([s.env.T for s in series], axis=0)
    y = np.concatenate([s.sys.T for s in series], axis=0)
    seq_init, seq_order = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(seq_order)
    if x.shape[0] > MAX_ROWS:
        pick = rng.choice(x.shape[0], size=MAX_ROWS, replace=False)
        x, y = x[pick], y[pick]

    n_env, n_sys = x.shape[1], y.shape[1]
    rng_init = np.random.default_rng(seq_init)
    params = RegressorParams(
        n_env=n_env,
        n_sys=n_sys,
        w1=param(rng_init.normal(0.0, np.sqrt(2.0 / n_env), size=(hidden, n_env))),
        b1=param(np.zeros(hidden)),
        w2=param(rng_init.normal(0.0, np.sqrt(1.0 / hidden), size=(n_sys, hidden))),
        b2=param(np.zeros(n_sys)),
    )
    opt = Adam(params.parameters(), lr=lr)
    n = x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for lo in range(0, n, BATCH):
            idx = order[lo : lo + BATCH]
            opt.zero_grad()
            loss = regressor_loss(params, x[idx], y[idx])
            loss.backward()
            opt.step()
    return params


def predict_sys(params: RegressorParams, env: np.ndarray) -> np.ndarray:
    """h applied columnwise: env (N, T) -> predicted sys (M, T)."""
    hidden = np.maximum(env.T @ params.w1.values.T + params.b1.values, 0.0)
    return (hidden @ params.w2.values.T + params.b2.values).T


def residuals(params: RegressorParams, series: MultivariateSeries) -> np.ndarray:
    """delta[m, t] = h(x_t)[m] - y[m, t]."""
    if series.n_env != params.n_env:
        raise ValueError(
            f"series has {series.n_env} env channels, regressor expects {params.n_env}"
        )
    return predict_sys(params, series.env) - series.sys


def res_thresh_score(residual: np.ndarray) -> float:
    """Largest absolute residual over all channels and timesteps."""
    return float(np.abs(residual).max()) if residual.size else 0.0
