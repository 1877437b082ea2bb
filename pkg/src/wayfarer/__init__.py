"""Goal-conditioned waypoint locomotion harness.

Train a policy to steer a simple walker (or a point-mass) through
operator-style waypoint sequences, evaluate it on fixed test cases, and
drive it live over a latency-simulating WebSocket link.
"""

from .env import EpisodeConfig, WaypointEnv
from .evaluate import TestCase, builtin_suite, evaluate_suite, run_trial, success_ratio
from .sim import ANT, POINT_MASS, DynamicsParams
from .storage import load_checkpoint, load_config, save_checkpoint, save_config
from .trainer import Checkpoint, TrainConfig, make_train_config, train

__version__ = "0.1.0"

__all__ = [
    "ANT",
    "POINT_MASS",
    "Checkpoint",
    "DynamicsParams",
    "EpisodeConfig",
    "TestCase",
    "TrainConfig",
    "WaypointEnv",
    "builtin_suite",
    "evaluate_suite",
    "load_checkpoint",
    "load_config",
    "make_train_config",
    "run_trial",
    "save_checkpoint",
    "save_config",
    "success_ratio",
    "train",
    "__version__",
]
