"""Differentiable operations.

Conventions: batch axes lead, time is last.  Every op checks shapes up front
and raises ShapeError on mismatch; backward closures accumulate exact partial
derivatives into parent grads.  Targets and lengths are plain integer arrays,
not Tensors, since nothing differentiates through them.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .tensor import ShapeError, Tensor


def causal_dilated_conv1d(x: Tensor, w: Tensor, b: Tensor, dilation: int) -> Tensor:
    """out[n,o,t] = b[o] + sum_{c,k} w[o,c,k] * x[n,c,t-k*dilation], zero past the left edge."""
    if x.values.ndim != 3 or w.values.ndim != 3:
        raise ShapeError("conv1d", x.shape, ("B", "C", "T"))
    if w.shape[1] != x.shape[1]:
        raise ShapeError("conv1d", x.shape, w.shape)
    if b.shape != (w.shape[0],):
        raise ShapeError("conv1d bias", b.shape, (w.shape[0],))
    if dilation < 1:
        raise ValueError(f"dilation must be >= 1, got {dilation}")
    out_values = kernels.conv1d_forward(x.values, w.values, b.values, dilation)

    def push(g: np.ndarray) -> None:
        gx, gw, gb = kernels.conv1d_backward(x.values, w.values, g, dilation)
        x.accumulate(gx)
        w.accumulate(gw)
        b.accumulate(gb)

    return Tensor(out_values, parents=(x, w, b), push=push)


def leaky_relu(x: Tensor, slope: float = 0.01) -> Tensor:
    mask = np.where(x.values > 0.0, 1.0, slope)

    def push(g: np.ndarray) -> None:
        x.accumulate(g * mask)

    return Tensor(x.values * mask, parents=(x,), push=push)


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError("add", a.shape, b.shape)

    def push(g: np.ndarray) -> None:
        a.accumulate(g)
        b.accumulate(g)

    return Tensor(a.values + b.values, parents=(a, b), push=push)


def subtract(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeError("subtract", a.shape, b.shape)

    def push(g: np.ndarray) -> None:
        a.accumulate(g)
        b.accumulate(-g)

    return Tensor(a.values - b.values, parents=(a, b), push=push)


def scale(x: Tensor, factor: float) -> Tensor:
    def push(g: np.ndarray) -> None:
        x.accumulate(g * factor)

    return Tensor(x.values * factor, parents=(x,), push=push)


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Rows of x (B, D) mapped through w (O, D) plus bias (O,)."""
    if x.values.ndim != 2 or w.values.ndim != 2 or x.shape[1] != w.shape[1]:
        raise ShapeError("linear", x.shape, w.shape)
    if b.shape != (w.shape[0],):
        raise ShapeError("linear bias", b.shape, (w.shape[0],))

    def push(g: np.ndarray) -> None:
        x.accumulate(g @ w.values)
        w.accumulate(g.T @ x.values)
        b.accumulate(g.sum(axis=0))

    return Tensor(x.values @ w.values.T + b.values, parents=(x, w, b), push=push)


def mean_over_time(x: Tensor, lengths: np.ndarray | None = None) -> Tensor:
    """Average (B, C, T) over the time axis.

    lengths, when given, holds each sample's true extent; positions at or
    beyond it are excluded.  With right-padded batches this makes the result
    identical to encoding each sample at its own length (causality keeps the
    prefix exact, and the pooling here ignores the padded tail).
    """
    if x.values.ndim != 3:
        raise ShapeError("mean_over_time", x.shape, ("B", "C", "T"))
    B, C, T = x.shape
    if lengths is None:
        out_values = x.values.mean(axis=2)

        def push(g: np.ndarray) -> None:
            x.accumulate(np.repeat(g[:, :, None] / T, T, axis=2))

    else:
        lengths = np.asarray(lengths, dtype=np.int64)
        if lengths.shape != (B,):
            raise ShapeError("mean_over_time lengths", lengths.shape, (B,))
        if np.any(lengths < 1) or np.any(lengths > T):
            raise ValueError("lengths must lie in [1, T]")
        mask = np.arange(T)[None, :] < lengths[:, None]
        out_values = (x.values * mask[:, None, :]).sum(axis=2) / lengths[:, None]

        def push(g: np.ndarray) -> None:
            gx = (g / lengths[:, None])[:, :, None] * mask[:, None, :]
            x.accumulate(gx)

    return Tensor(out_values, parents=(x,), push=push)


def log_softmax(x: Tensor) -> Tensor:
    """Log-softmax over the last axis, computed with the max-shift trick."""
    shifted = x.values - x.values.max(axis=-1, keepdims=True)
    logz = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    out_values = shifted - logz
    softmax = np.exp(out_values)

    def push(g: np.ndarray) -> None:
        x.accumulate(g - softmax * g.sum(axis=-1, keepdims=True))

    return Tensor(out_values, parents=(x,), push=push)


def nll(logp: Tensor, targets: np.ndarray) -> Tensor:
    """Mean negative log-likelihood of integer targets over all leading axes."""
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != logp.shape[:-1]:
        raise ShapeError("nll", targets.shape, logp.shape[:-1])
    n_classes = logp.shape[-1]
    if np.any(targets < 0) or np.any(targets >= n_classes):
        raise ValueError(f"target index out of range [0, {n_classes})")
    idx = tuple(np.indices(targets.shape)) + (targets,)
    count = max(targets.size, 1)

    def push(g: np.ndarray) -> None:
        gl = np.zeros(logp.shape)
        gl[idx] = -float(g) / count
        logp.accumulate(gl)

    return Tensor(-logp.values[idx].mean(), parents=(logp,), push=push)


def l2_normalize(x: Tensor) -> Tensor:
    """Scale each row of (B, D) to unit Euclidean norm."""
    if x.values.ndim != 2:
        raise ShapeError("l2_normalize", x.shape, ("B", "D"))
    norms = np.linalg.norm(x.values, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero row")
    out_values = x.values / norms

    def push(g: np.ndarray) -> None:
        dot = (g * out_values).sum(axis=1, keepdims=True)
        x.accumulate((g - out_values * dot) / norms)

    return Tensor(out_values, parents=(x,), push=push)


def row_norm(x: Tensor) -> Tensor:
    """Euclidean norm of each row of (B, D); subgradient 0 at the origin."""
    if x.values.ndim != 2:
        raise ShapeError("row_norm", x.shape, ("B", "D"))
    norms = np.linalg.norm(x.values, axis=1)

    def push(g: np.ndarray) -> None:
        safe = np.where(norms > 0.0, norms, 1.0)
        gx = (g / safe)[:, None] * x.values
        gx[norms == 0.0] = 0.0
        x.accumulate(gx)

    return Tensor(norms, parents=(x,), push=push)


def square(x: Tensor) -> Tensor:
    def push(g: np.ndarray) -> None:
        x.accumulate(2.0 * x.values * g)

    return Tensor(x.values * x.values, parents=(x,), push=push)


def mean_all(x: Tensor) -> Tensor:
    count = max(x.values.size, 1)

    def push(g: np.ndarray) -> None:
        x.accumulate(np.full(x.shape, float(g) / count))

    return Tensor(x.values.mean(), parents=(x,), push=push)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    if int(np.prod(shape)) != x.values.size:
        raise ShapeError("reshape", x.shape, shape)

    def push(g: np.ndarray) -> None:
        x.accumulate(g.reshape(x.shape))

    return Tensor(x.values.reshape(shape), parents=(x,), push=push)


def grad_reverse(x: Tensor, lam: float) -> Tensor:
    """Identity forward; backward scales the gradient by -lam.

    The layer sits between the encoder and the environment predictor: the
    predictor trains to minimize its loss at full rate while the encoder
    receives the sign-flipped, lam-scaled gradient and so maximizes it.
    """
    if lam < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")

    def push(g: np.ndarray) -> None:
        x.accumulate(-lam * g)

    return Tensor(x.values, parents=(x,), push=push)
