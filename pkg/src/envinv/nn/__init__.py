from . import ops
from .checkpoint import load_checkpoint, save_checkpoint
from .encoder import (
    EncoderParams,
    PredictorParams,
    embedding_dim,
    encoder_from_named,
    init_encoder,
    init_predictor,
    predict_env_log_probs,
    tcn_encode,
)
from .kernels import BACKEND
from .optim import Adam
from .tensor import ShapeError, Tensor, constant, param

__all__ = [
    "Adam",
    "BACKEND",
    "EncoderParams",
    "PredictorParams",
    "ShapeError",
    "Tensor",
    "constant",
    "embedding_dim",
    "encoder_from_named",
    "init_encoder",
    "init_predictor",
    "load_checkpoint",
    "ops",
    "param",
    "predict_env_log_probs",
    "save_checkpoint",
    "tcn_encode",
]
