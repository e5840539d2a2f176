"""Environment contract, trajectories and seeded random streams.

Every environment reports two rewards per transition: the target reward that
defines the task being solved and an assistant reward that is easier to learn.
Environments never blend the two; learners do that with the episode's beta.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

PURPOSES = ("init-state", "dynamics-noise", "policy-sample", "weight-init")


class ContractViolation(ValueError):
    """Raised when an operation is called outside its preconditions."""


@dataclass(frozen=True)
class EnvSpec:
    state_dim: int
    action_dim: int
    gamma: float
    horizon: int
    episode_count: int = 1

    def __post_init__(self):
        if self.state_dim < 1:
            raise ContractViolation(f"state_dim must be positive, got {self.state_dim}")
        if self.action_dim < 0:
            raise ContractViolation(f"action_dim must be non-negative, got {self.action_dim}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ContractViolation(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.horizon < 1:
            raise ContractViolation(f"horizon must be >= 1, got {self.horizon}")
        if self.episode_count < 1:
            raise ContractViolation(f"episode_count must be >= 1, got {self.episode_count}")

    @property
    def is_mrp(self) -> bool:
        return self.action_dim == 0


@dataclass(frozen=True)
class DualRewardStep:
    next_state: np.ndarray
    r_target: float
    r_assist: float
    terminated: bool

    @property
    def violated(self) -> bool:
        # Assistant rewards in the control tasks are 0 or the (negative) penalty.
        return self.r_assist < 0.0


@dataclass
class Trajectory:
    states: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    episode_index: int = 0

    def __len__(self):
        return len(self.steps)

    def append(self, action, step: DualRewardStep) -> None:
        if self.steps and self.steps[-1].terminated:
            raise ContractViolation("cannot extend a trajectory past a terminal step")
        if action is not None:
            self.actions.append(action)
        self.steps.append(step)
        self.states.append(step.next_state)

    def rewards(self, which: str = "target", beta: float = 0.0) -> np.ndarray:
        r_t = np.array([s.r_target for s in self.steps], dtype=float)
        if which == "target":
            return r_t
        r_a = np.array([s.r_assist for s in self.steps], dtype=float)
        if which == "assist":
            return r_a
        if which == "blend":
            if beta == 0.0:
                return r_t
            if beta == 1.0:
                return r_a
            return beta * r_a + (1.0 - beta) * r_t
        raise ValueError(f"unknown reward selector {which!r}")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def stream_id(run: int, purpose: str) -> int:
    if purpose not in PURPOSES:
        raise ValueError(f"unknown stream purpose {purpose!r}; expected one of {PURPOSES}")
    return run * len(PURPOSES) + PURPOSES.index(purpose)


def make_rng(master_seed: int, run: int, purpose: str) -> np.random.Generator:
    """Independent generator for one (run, purpose) pair."""
    return RngStream(master_seed, stream_id(run, purpose)).generator()


class Environment(abc.ABC):
    """Episodic environment emitting target and assistant rewards."""

    spec: EnvSpec

    @abc.abstractmethod
    def reset(self, rng: np.random.Generator) -> np.ndarray:
        ...

    @abc.abstractmethod
    def step(self, state, action, rng: np.random.Generator | None = None) -> DualRewardStep:
        ...

    def observe(self, state: np.ndarray) -> np.ndarray:
        """Features fed to function approximators; identity unless overridden."""
        return np.asarray(state, dtype=float)

    def map_action(self, x: np.ndarray) -> np.ndarray:
        """Map a raw policy output in [-1, 1] to the environment's action range."""
        return np.clip(x, -1.0, 1.0)

    def _check_action(self, action) -> np.ndarray:
        a = np.asarray(action, dtype=float).reshape(-1)
        if a.shape[0] != self.spec.action_dim:
            raise ContractViolation(
                f"action has length {a.shape[0]}, expected {self.spec.action_dim}"
            )
        return a

    def _check_state(self, state) -> np.ndarray:
        s = np.asarray(state, dtype=float).reshape(-1)
        if s.shape[0] != self.spec.state_dim:
            raise ContractViolation(
                f"state has length {s.shape[0]}, expected {self.spec.state_dim}"
            )
        return s


Reward = Union[str, tuple]


def _parse_which(which: Reward) -> tuple[str, float]:
    if isinstance(which, tuple):
        kind, beta = which
        return kind, float(beta)
    return which, 0.0


def episode_return(traj: Trajectory, gamma: float, which: Reward = "target") -> float:
    """Discounted return of one trajectory.

    ``which`` is ``"target"``, ``"assist"`` or ``("blend", beta)``.
    """
    if len(traj) == 0:
        raise ContractViolation("episode_return needs a non-empty trajectory")
    kind, beta = _parse_which(which)
    rewards = traj.rewards(kind, beta)
    return discounted_sum(rewards, gamma)


def discounted_sum(rewards: Sequence[float], gamma: float) -> float:
    total = 0.0
    for r in reversed(list(rewards)):
        total = float(r) + gamma * total
    return total


@dataclass
class RunRecord:
    """One per-episode metrics row.

    ``metric`` is the RMS error for TD runs and the undiscounted target-reward
    return for PPO runs. Per-run CSV files carry ``CSV_COLUMNS``; ``steps`` and
    ``violations`` go to a separate diagnostics file.
    """

    run: int
    episode: int
    beta: float
    metric: float
    steps: int = 0
    violations: int = 0


CSV_COLUMNS = ("run", "episode", "beta", "metric")
