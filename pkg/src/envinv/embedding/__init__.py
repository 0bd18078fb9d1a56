from .sampling import SamplingError, Triple, sample_triple, sample_triple_matrix, window_length
from .train import (
    EpochStats,
    Mode,
    TrainConfig,
    TrainedModel,
    TrainingError,
    adv_loss,
    contrastive_loss,
    embed_dataset,
    env_targets,
    fit_env_bins,
    train,
    write_training_log,
)

__all__ = [
    "EpochStats",
    "Mode",
    "SamplingError",
    "TrainConfig",
    "TrainedModel",
    "TrainingError",
    "Triple",
    "adv_loss",
    "contrastive_loss",
    "embed_dataset",
    "env_targets",
    "fit_env_bins",
    "sample_triple",
    "sample_triple_matrix",
    "train",
    "window_length",
]
