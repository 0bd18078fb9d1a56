"""Joint training of the encoder against the environment predictor.

The predictor reads the positive and negative embeddings through a
gradient-reversal layer and learns to recover the positive window's
(discretized) environment from both; the encoder receives that gradient
scaled by -lam and so learns to withhold environment information while the
contrastive term pulls positives toward their context and pushes
dependency-breaking negatives away.  The two objectives meet at a saddle
point: lam trades contrastive sharpness against invariance.

Three modes: the full scheme (ENV_INV); BASIC, which drops the adversary and
uses whole windows of other series as negatives; RESIDUAL_INPUT, BASIC over
regression-residual matrices instead of raw channels.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..core import Dataset, MultivariateSeries, QuantileBins, quantile_bins
from ..detect import RegressorParams, fit_regressor, regressor_from_named, residuals
from ..nn import (
    Adam,
    EncoderParams,
    PredictorParams,
    constant,
    embedding_dim,
    encoder_from_named,
    init_encoder,
    init_predictor,
    load_checkpoint,
    ops,
    predict_env_log_probs,
    save_checkpoint,
    tcn_encode,
)
from .sampling import Triple, sample_triple, sample_triple_matrix, window_length


class Mode(str, enum.Enum):
    ENV_INV = "envinv"
    BASIC = "basic"
    RESIDUAL_INPUT = "residual"


# The predictor gets one Adam step per batch, and small datasets yield few
# batches per epoch.  At the shared learning rate it would still be near its
# init when training ends, leaving nothing for the reversal layer to reverse.
# Two-timescale rule: run its optimizer on a faster clock than the encoder's.
ADV_LR_MULT = 25.0


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1e-3
    epochs: int = 50
    batch: int = 16
    lr: float = 1.9e-3
    window_frac: float = 0.2
    buckets: int = 20
    seed: int = 0
    mode: Mode = Mode.ENV_INV

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not 0 < self.window_frac <= 1:
            raise ValueError(f"window_frac must lie in (0, 1], got {self.window_frac}")
        if self.epochs < 1 or self.batch < 1 or self.buckets < 2:
            raise ValueError("epochs and batch must be >= 1, buckets >= 2")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    contrastive: float
    adversarial: float
    total: float


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainedModel:
    config: TrainConfig
    encoder: EncoderParams
    predictor: PredictorParams | None
    bins: list[QuantileBins]
    regressor: RegressorParams | None
    n_env: int
    n_sys: int
    window_len: int

    @property
    def mode(self) -> Mode:
        return self.config.mode

    def save(self, path: Path | str) -> None:
        cfg = asdict(self.config)
        cfg["mode"] = self.config.mode.value
        meta = {
            "kind": "envinv-model",
            "config": cfg,
            "n_env": self.n_env,
            "n_sys": self.n_sys,
            "window_len": self.window_len,
            "in_channels": self.encoder.in_channels,
            "emb_dim": self.encoder.emb_dim,
            "channels": self.encoder.channels,
            "n_blocks": self.encoder.n_blocks,
            "kernel": self.encoder.kernel,
        }
        tensors = dict(self.encoder.named())
        if self.predictor is not None:
            tensors.update(self.predictor.named())
        if self.regressor is not None:
            tensors.update(self.regressor.named())
        for n, bins in enumerate(self.bins):
            tensors[f"bins/env_{n}"] = bins.edges
        save_checkpoint(path, meta, tensors)

    @classmethod
    def load(cls, path: Path | str) -> "TrainedModel":
        meta, tensors = load_checkpoint(path)
        if meta.get("kind") != "envinv-model":
            raise ValueError(f"{path}: not a model checkpoint")
        cfg = dict(meta["config"])
        cfg["mode"] = Mode(cfg["mode"])
        config = TrainConfig(**cfg)
        encoder = encoder_from_named(meta, tensors)
        predictor = None
        if "adv/w" in tensors:
            from ..nn.tensor import param

            predictor = PredictorParams(
                n_env=meta["n_env"],
                n_buckets=config.buckets,
                w=param(tensors["adv/w"]),
                b=param(tensors["adv/b"]),
            )
        regressor = regressor_from_named(tensors) if "reg/w1" in tensors else None
        bins = []
        for n in range(meta["n_env"]):
            key = f"bins/env_{n}"
            if key in tensors:
                bins.append(QuantileBins(edges=tensors[key]))
        return cls(
            config=config,
            encoder=encoder,
            predictor=predictor,
            bins=bins,
            regressor=regressor,
            n_env=meta["n_env"],
            n_sys=meta["n_sys"],
            window_len=meta["window_len"],
        )


def env_targets(env_window: np.ndarray, bins: list[QuantileBins]) -> np.ndarray:
    """Discretize a window: per env dimension, the bucket of its window mean."""
    if not bins:
        raise RuntimeError("environment bins have not been fitted")
    if env_window.shape[0] != len(bins):
        raise ValueError(f"{env_window.shape[0]} env rows vs {len(bins)} fitted bins")
    means = env_window.mean(axis=1)
    return np.array([bins[n].digitize(means[n]) for n in range(len(bins))], dtype=np.int64)


def _window_means(x: np.ndarray, w: int) -> np.ndarray:
    cs = np.concatenate([[0.0], np.cumsum(x)])
    return (cs[w:] - cs[:-w]) / w


def fit_env_bins(
    series: list[MultivariateSeries], n_buckets: int, window_len: int
) -> list[QuantileBins]:
    """Quantile bins per env dimension over all length-window_len window means.

    The prediction targets are window means, so the bins must cover that
    distribution.  Fitting them on raw per-timestep values instead leaves the
    outer buckets unused, and the predictor can then cut its loss by bias
    alone, which teaches the encoder nothing.
    """
    n_env = series[0].n_env
    return [
        quantile_bins(
            np.concatenate([_window_means(s.env[n], window_len) for s in series]),
            n_buckets,
        )
        for n in range(n_env)
    ]


def _pad_batch(mats: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([m.shape[1] for m in mats], dtype=np.int64)
    T = int(lengths.max())
    out = np.zeros((len(mats), mats[0].shape[0], T))
    for i, m in enumerate(mats):
        out[i, :, : m.shape[1]] = m
    return out, lengths


def contrastive_loss(e_ctx, e_pos, e_neg):
    """Batch mean of d(e_pos, e_ctx) - d(e_neg, e_ctx), Euclidean d."""
    if e_ctx.shape != e_pos.shape or e_ctx.shape != e_neg.shape:
        raise ops.ShapeError("contrastive_loss", e_pos.shape, e_ctx.shape)
    d_pos = ops.row_norm(ops.subtract(e_pos, e_ctx))
    d_neg = ops.row_norm(ops.subtract(e_neg, e_ctx))
    return ops.mean_all(ops.subtract(d_pos, d_neg))


def adv_loss(predictor: PredictorParams, embedding, targets: np.ndarray):
    """Mean NLL of the correct environment bucket per env dimension."""
    return ops.nll(predict_env_log_probs(predictor, embedding), targets)


def train(
    dataset: Dataset,
    config: TrainConfig,
    use_adversary: bool = True,
) -> tuple[TrainedModel, list[EpochStats]]:
    """Train on every series of `dataset` (pass the training split).

    use_adversary=False skips the predictor entirely; it exists so tests can
    show bit-equal encoder parameters against a lam=0 run.  All other RNG
    consumers sit on their own seed streams, so the comparison is exact.
    """
    series = list(dataset.series)
    if len(series) < 2:
        raise TrainingError("need at least 2 series to sample negatives")
    mode = config.mode
    n_env = series[0].n_env
    n_sys = series[0].n_sys
    T = dataset.manifest.length
    w = window_length(T, config.window_frac)

    seq_enc, seq_adv, seq_data, seq_reg = np.random.SeedSequence(config.seed).spawn(4)

    regressor = None
    inputs: list[np.ndarray]
    if mode == Mode.RESIDUAL_INPUT:
        reg_seed = int(seq_reg.generate_state(1)[0])
        regressor = fit_regressor(series, seed=reg_seed)
        inputs = [residuals(regressor, s) for s in series]
        in_channels = n_sys
    else:
        inputs = [np.concatenate([s.env, s.sys], axis=0) for s in series]
        in_channels = n_env + n_sys

    bins = fit_env_bins(series, config.buckets, w)
    d = embedding_dim(T, n_env, n_sys)
    encoder = init_encoder(in_channels, d, np.random.default_rng(seq_enc))
    predictor = None
    adversarial = mode == Mode.ENV_INV and use_adversary
    if adversarial:
        predictor = init_predictor(d, n_env, config.buckets, np.random.default_rng(seq_adv))

    params = encoder.parameters() + (predictor.parameters() if predictor else [])
    opts = [Adam(encoder.parameters(), lr=config.lr)]
    if predictor is not None:
        opts.append(Adam(predictor.parameters(), lr=config.lr * ADV_LR_MULT))
    rng = np.random.default_rng(seq_data)
    n = len(series)
    log: list[EpochStats] = []

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        sum_contr = 0.0
        sum_adv = 0.0
        n_batches = 0
        for lo in range(0, n, config.batch):
            chunk = order[lo : lo + config.batch]
            triples: list[Triple] = []
            for i in chunk:
                j = int(rng.integers(0, n - 1))
                j += j >= i
                if mode == Mode.RESIDUAL_INPUT:
                    triples.append(
                        sample_triple_matrix(inputs[i], inputs[j], rng, config.window_frac)
                    )
                else:
                    triples.append(
                        sample_triple(
                            series[i],
                            series[j],
                            rng,
                            config.window_frac,
                            break_dependency=(mode == Mode.ENV_INV),
                        )
                    )

            ctx_batch, ctx_lens = _pad_batch([t.ctx for t in triples])
            e_ctx = tcn_encode(encoder, ctx_batch, ctx_lens)
            e_pos = tcn_encode(encoder, np.stack([t.pos for t in triples]))
            e_neg = tcn_encode(encoder, np.stack([t.neg for t in triples]))
            contr = contrastive_loss(e_ctx, e_pos, e_neg)

            if adversarial:
                # both embeddings are scored against the positive window's
                # buckets: a dependency-broken window can only reach them
                # through what its system channels reveal about the original
                # environment, so that leak is exactly what reversal suppresses
                targets = np.stack([env_targets(t.env_pos, bins) for t in triples])
                nll_pos = adv_loss(predictor, ops.grad_reverse(e_pos, config.lam), targets)
                nll_neg = adv_loss(predictor, ops.grad_reverse(e_neg, config.lam), targets)
                # summed, not averaged: the invariance loss adds one term per
                # embedding pass, matching the contrastive side's sample count
                adv = ops.add(nll_pos, nll_neg)
                objective = ops.add(contr, adv)
            else:
                adv = None
                objective = contr

            if not np.isfinite(objective.item()):
                raise TrainingError(f"non-finite loss at epoch {epoch}, batch {n_batches}")
            for opt in opts:
                opt.zero_grad()
            objective.backward()
            for opt in opts:
                opt.step()
            sum_contr += contr.item()
            sum_adv += adv.item() if adv is not None else 0.0
            n_batches += 1

        mean_contr = sum_contr / n_batches
        mean_adv = sum_adv / n_batches
        log.append(
            EpochStats(
                epoch=epoch,
                contrastive=mean_contr,
                adversarial=mean_adv,
                total=mean_contr - config.lam * mean_adv,
            )
        )
        for p in params:
            if not np.all(np.isfinite(p.values)):
                raise TrainingError(f"non-finite parameter after epoch {epoch}")

    model = TrainedModel(
        config=config,
        encoder=encoder,
        predictor=predictor,
        bins=bins,
        regressor=regressor,
        n_env=n_env,
        n_sys=n_sys,
        window_len=w,
    )
    return model, log


def write_training_log(log: list[EpochStats], path: Path | str) -> None:
    rows = ["epoch,contrastive,adversarial,total"]
    for st in log:
        rows.append(f"{st.epoch},{st.contrastive!r},{st.adversarial!r},{st.total!r}")
    Path(path).write_text("\n".join(rows) + "\n")


def embed_dataset(model: TrainedModel, dataset: Dataset, chunk: int = 32) -> np.ndarray:
    """One unit-norm embedding row per series, in manifest order."""
    mats = []
    for s in dataset.series:
        if s.n_env != model.n_env or s.n_sys != model.n_sys:
            raise ValueError(
                f"series {s.series_id} has N={s.n_env}, M={s.n_sys}; "
                f"model expects N={model.n_env}, M={model.n_sys}"
            )
        if model.mode == Mode.RESIDUAL_INPUT:
            mats.append(residuals(model.regressor, s))
        else:
            mats.append(np.concatenate([s.env, s.sys], axis=0))
    rows = []
    for lo in range(0, len(mats), chunk):
        batch, lengths = _pad_batch(mats[lo : lo + chunk])
        emb = tcn_encode(model.encoder, constant(batch), lengths)
        rows.append(emb.values)
    return np.concatenate(rows, axis=0)
