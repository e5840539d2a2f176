"""Tabular TD(0) with value transfer across the annealed reward sequence."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import make_rng
from .envs.randomwalk import (
    MAX_EPISODE_STEPS,
    EpisodeTooLong,
    RandomWalkEnv,
    rms_error,
    rw_true_values,
)
from .schedule import BetaSchedule, beta_at, blend


@dataclass
class ValueTable:
    """State values indexed by random-walk state; terminal entries stay 0.

    With ``step_size="visits"`` each update uses ``(1 + visits(s)) ** -decay_power``
    instead of the constant ``alpha``. ``decay_power=1`` is the classic 1/n
    schedule; it converges, but its bootstrap bias fades slowly, so the
    default is 0.7.
    """

    values: np.ndarray
    alpha: float = 0.1
    step_size: str = "constant"
    decay_power: float = 0.7
    visits: np.ndarray = field(default=None)
    terminals: tuple = ()

    @classmethod
    def zeros(
        cls,
        env: RandomWalkEnv,
        alpha: float = 0.1,
        step_size: str = "constant",
        decay_power: float = 0.7,
    ) -> "ValueTable":
        if step_size not in ("constant", "visits"):
            raise ValueError(f"step_size must be 'constant' or 'visits', got {step_size!r}")
        if not 0.5 < decay_power <= 1.0:
            raise ValueError(f"decay_power must lie in (0.5, 1], got {decay_power}")
        return cls(
            values=np.zeros(env.n_states),
            alpha=alpha,
            step_size=step_size,
            decay_power=decay_power,
            visits=np.zeros(env.n_states, dtype=np.int64),
            terminals=(0, env.n_states - 1),
        )

    @property
    def nonterminal(self) -> np.ndarray:
        return self.values[1:-1]


def td0_update(table: ValueTable, s: int, r: float, s_next: int, gamma: float = 1.0) -> ValueTable:
    """``v(s) += alpha * (r + gamma * v(s') - v(s))``, in place."""
    if s in table.terminals:
        raise ValueError(f"cannot update terminal state {s}")
    v = table.values
    if table.step_size == "visits":
        alpha = (1.0 + table.visits[s]) ** -table.decay_power
        table.visits[s] += 1
    else:
        alpha = table.alpha
    v[s] += alpha * (r + gamma * v[s_next] - v[s])
    return table


def run_td_episode(env: RandomWalkEnv, table: ValueTable, beta: float, rng: np.random.Generator) -> int:
    """Roll one episode from the start state, updating online. Returns its length."""
    s = env.start
    gamma = env.spec.gamma
    steps = 0
    while True:
        s_next, r_t, r_a, done = env.step_index(s, rng.random() < 0.5)
        td0_update(table, s, blend(r_t, r_a, beta), s_next, gamma)
        steps += 1
        if done:
            return steps
        if steps >= MAX_EPISODE_STEPS:
            raise EpisodeTooLong(f"episode exceeded {MAX_EPISODE_STEPS} steps")
        s = s_next


@dataclass
class TdResult:
    rms: np.ndarray          # (runs, episodes)
    betas: np.ndarray        # (episodes,)
    reference: np.ndarray

    @property
    def mean_curve(self) -> np.ndarray:
        return self.rms.mean(axis=0)


def run_td_run(
    env: RandomWalkEnv,
    sched: BetaSchedule,
    episodes: int,
    run: int,
    master_seed: int,
    alpha: float = 0.1,
    step_size: str = "constant",
    decay_power: float = 0.7,
) -> np.ndarray:
    """RMS error (against target-reward true values) after each episode of one run."""
    reference = rw_true_values(env, "target")
    rng = make_rng(master_seed, run, "dynamics-noise")
    table = ValueTable.zeros(env, alpha=alpha, step_size=step_size, decay_power=decay_power)
    out = np.empty(episodes)
    for e in range(episodes):
        run_td_episode(env, table, beta_at(sched, e), rng)
        out[e] = rms_error(table.nonterminal, reference)
    return out


def run_td_experiment(
    env: RandomWalkEnv,
    sched: BetaSchedule,
    episodes: int,
    runs: int,
    master_seed: int,
    alpha: float = 0.1,
    step_size: str = "constant",
) -> TdResult:
    if episodes < 1 or runs < 1:
        raise ValueError("episodes and runs must both be >= 1")
    curves = np.stack(
        [run_td_run(env, sched, episodes, r, master_seed, alpha, step_size) for r in range(runs)]
    )
    betas = np.array([beta_at(sched, e) for e in range(episodes)])
    return TdResult(curves, betas, rw_true_values(env, "target"))
