"""Annealed blending of an assistant reward into the target reward.

Learners train on ``beta(e) * R_assist + (1 - beta(e)) * R_target`` with a
per-episode weight ``beta`` that decays to zero, carrying value tables or
network weights forward from one episode to the next.
"""

from .config import ExperimentConfig, load_config
from .core import DualRewardStep, EnvSpec, Environment, RunRecord, Trajectory, episode_return, make_rng
from .envs import FourTankEnv, RandomWalkEnv, TempControlEnv, rw_true_values
from .harness import run_experiment
from .metrics import moving_average
from .plotting import plot_emit
from .ppo import PpoConfig, ppo_train
from .schedule import BetaSchedule, blend
from .td import run_td_experiment, run_td_run

__version__ = "0.1.0"

__all__ = [
    "BetaSchedule",
    "DualRewardStep",
    "EnvSpec",
    "Environment",
    "ExperimentConfig",
    "FourTankEnv",
    "PpoConfig",
    "RandomWalkEnv",
    "RunRecord",
    "TempControlEnv",
    "Trajectory",
    "blend",
    "episode_return",
    "load_config",
    "make_rng",
    "moving_average",
    "plot_emit",
    "ppo_train",
    "rw_true_values",
    "run_experiment",
    "run_td_experiment",
    "run_td_run",
]
