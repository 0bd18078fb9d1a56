"""Dilated causal conv kernels on plain numpy.

The convolution is decomposed into one matmul per kernel tap against a
time-shifted view, which routes the bulk of the work through BLAS.  Shapes:
x (B, C, T), w (O, C, K), b (O,); tap k reads x at t - k*dilation, so tap 0
is the current step and outputs never see the future.
"""
from __future__ import annotations

import numpy as np


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int) -> np.ndarray:
    B, C, T = x.shape
    O, _, K = w.shape
    out = np.empty((B, O, T), dtype=np.float64)
    out[:] = b[None, :, None]
    for k in range(K):
        kd = k * dilation
        if kd >= T:
            break
        out[:, :, kd:] += np.matmul(w[:, :, k], x[:, :, : T - kd])
    return out


def conv1d_backward(
    x: np.ndarray, w: np.ndarray, gy: np.ndarray, dilation: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    B, C, T = x.shape
    O, _, K = w.shape
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    gb = gy.sum(axis=(0, 2))
    for k in range(K):
        kd = k * dilation
        if kd >= T:
            break
        gw[:, :, k] = np.tensordot(gy[:, :, kd:], x[:, :, : T - kd], axes=([0, 2], [0, 2]))
        gx[:, :, : T - kd] += np.matmul(w[:, :, k].T, gy[:, :, kd:])
    return gx, gw, gb
