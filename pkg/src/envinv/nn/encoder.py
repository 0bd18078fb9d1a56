"""TCN encoder and the environment predictor head.

The encoder is a stack of dilated causal conv blocks (dilation doubling per
block, so the receptive field grows geometrically), mean-pooled over time,
linearly projected and scaled to the unit sphere.  Normalizing bounds all
pairwise distances in [0, 2], which keeps the contrastive objective from
running away: its raw form is unbounded below.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import ops
from .tensor import Tensor, constant, param

CHANNELS = 32
N_BLOCKS = 10
KERNEL = 3
EMB_DIM_CAP = 256


def embedding_dim(series_len: int, n_env: int, n_sys: int) -> int:
    """d = min(round(0.1 * T * N * M), 256), floored at 1.

    T is the full training series length, not the sampling window; the cap
    exists because the product grows past any useful size on long series.
    """
    return max(1, min(round(0.1 * series_len * n_env * n_sys), EMB_DIM_CAP))


@dataclass
class EncoderParams:
    in_channels: int
    emb_dim: int
    channels: int = CHANNELS
    n_blocks: int = N_BLOCKS
    kernel: int = KERNEL
    conv_w: list[Tensor] = field(default_factory=list)
    conv_b: list[Tensor] = field(default_factory=list)
    proj_w: Tensor | None = None
    proj_b: Tensor | None = None

    def parameters(self) -> list[Tensor]:
        return [*self.conv_w, *self.conv_b, self.proj_w, self.proj_b]

    def named(self) -> dict[str, np.ndarray]:
        out = {}
        for i, (w, b) in enumerate(zip(self.conv_w, self.conv_b)):
            out[f"enc/block{i}/w"] = w.values
            out[f"enc/block{i}/b"] = b.values
        out["enc/proj/w"] = self.proj_w.values
        out["enc/proj/b"] = self.proj_b.values
        return out


def init_encoder(
    in_channels: int,
    emb_dim: int,
    rng: np.random.Generator,
    channels: int = CHANNELS,
    n_blocks: int = N_BLOCKS,
    kernel: int = KERNEL,
) -> EncoderParams:
    enc = EncoderParams(
        in_channels=in_channels, emb_dim=emb_dim, channels=channels,
        n_blocks=n_blocks, kernel=kernel,
    )
    for i in range(n_blocks):
        cin = in_channels if i == 0 else channels
        std = np.sqrt(2.0 / (cin * kernel))
        enc.conv_w.append(param(rng.normal(0.0, std, size=(channels, cin, kernel))))
        enc.conv_b.append(param(np.zeros(channels)))
    enc.proj_w = param(rng.normal(0.0, np.sqrt(1.0 / channels), size=(emb_dim, channels)))
    enc.proj_b = param(np.zeros(emb_dim))
    return enc


def encoder_from_named(meta: dict, tensors: dict[str, np.ndarray]) -> EncoderParams:
    enc = EncoderParams(
        in_channels=int(meta["in_channels"]),
        emb_dim=int(meta["emb_dim"]),
        channels=int(meta["channels"]),
        n_blocks=int(meta["n_blocks"]),
        kernel=int(meta["kernel"]),
    )
    for i in range(enc.n_blocks):
        enc.conv_w.append(param(tensors[f"enc/block{i}/w"]))
        enc.conv_b.append(param(tensors[f"enc/block{i}/b"]))
    enc.proj_w = param(tensors["enc/proj/w"])
    enc.proj_b = param(tensors["enc/proj/b"])
    return enc


def tcn_encode(
    enc: EncoderParams, x: Tensor | np.ndarray, lengths: np.ndarray | None = None
) -> Tensor:
    """Embed a batch (B, in_channels, T) into unit-norm rows (B, emb_dim).

    lengths masks right padding out of the mean pool, so a batch of
    different-length snippets padded to a common T embeds each exactly as if
    it were passed alone (causal convs never read past a sample's extent
    backwards, and the pool skips the padded tail).
    """
    if not isinstance(x, Tensor):
        x = constant(x)
    if x.values.ndim != 3 or x.shape[1] != enc.in_channels:
        raise ops.ShapeError("tcn_encode", x.shape, ("B", enc.in_channels, "T"))
    if x.shape[2] < 1:
        raise ops.ShapeError("tcn_encode", x.shape, ("B", enc.in_channels, ">=1"))
    h = ops.leaky_relu(ops.causal_dilated_conv1d(x, enc.conv_w[0], enc.conv_b[0], 1))
    for i in range(1, enc.n_blocks):
        conv = ops.causal_dilated_conv1d(h, enc.conv_w[i], enc.conv_b[i], 2**i)
        h = ops.add(ops.leaky_relu(conv), h)
    pooled = ops.mean_over_time(h, lengths)
    return ops.l2_normalize(ops.linear(pooled, enc.proj_w, enc.proj_b))


@dataclass
class PredictorParams:
    """Single linear map from embeddings to n_env * n_buckets logits."""

    n_env: int
    n_buckets: int
    w: Tensor
    b: Tensor

    def parameters(self) -> list[Tensor]:
        return [self.w, self.b]

    def named(self) -> dict[str, np.ndarray]:
        return {"adv/w": self.w.values, "adv/b": self.b.values}


def init_predictor(
    emb_dim: int, n_env: int, n_buckets: int, rng: np.random.Generator
) -> PredictorParams:
    w = param(rng.normal(0.0, np.sqrt(1.0 / emb_dim), size=(n_env * n_buckets, emb_dim)))
    return PredictorParams(n_env=n_env, n_buckets=n_buckets, w=w, b=param(np.zeros(n_env * n_buckets)))


def predict_env_log_probs(pred: PredictorParams, emb: Tensor) -> Tensor:
    """Per-dimension class log-probabilities, shape (B, n_env, n_buckets)."""
    logits = ops.linear(emb, pred.w, pred.b)
    stacked = ops.reshape(logits, (emb.shape[0], pred.n_env, pred.n_buckets))
    return ops.log_softmax(stacked)
