from .pendulum import (
    PendulumConfig,
    clean_twin_pendulum,
    gen_pendulum,
    ou_path,
    pendulum_dynamics,
    rk4_step,
)
from .synthetic import SyntheticConfig, clean_twin_synthetic, gen_synthetic
from .turbine import ENV_COLUMNS, SYS_COLUMNS, IngestionError, load_turbine

__all__ = [
    "ENV_COLUMNS",
    "IngestionError",
    "PendulumConfig",
    "SYS_COLUMNS",
    "SyntheticConfig",
    "clean_twin_pendulum",
    "clean_twin_synthetic",
    "gen_pendulum",
    "gen_synthetic",
    "load_turbine",
    "ou_path",
    "pendulum_dynamics",
    "rk4_step",
]
