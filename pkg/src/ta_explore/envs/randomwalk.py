"""N-state random walk Markov reward process.

States are indexed ``0`` (left terminal) through ``n + 1`` (right terminal) with
``n`` odd non-terminal states; every episode starts in the centre. Each step
moves left or right with probability 1/2.

Target reward: 1 on entering the right terminal, 0 otherwise.
Assistant reward: 1 on entering the right terminal, ``assist_step_reward`` for
any other move to the right, 0 for moves to the left.
"""

from __future__ import annotations

import numpy as np

from ..core import ContractViolation, DualRewardStep, EnvSpec, Environment, Reward, _parse_which

MAX_EPISODE_STEPS = 10**6
SIZES = {5: 3, 11: 9, 33: 31}


class EpisodeTooLong(RuntimeError):
    pass


class RandomWalkEnv(Environment):
    def __init__(
        self,
        n_nonterminal: int = 3,
        assist_step_reward: float = 0.1,
        terminal_reward: float = 1.0,
        episode_count: int = 1,
    ):
        if n_nonterminal < 1 or n_nonterminal % 2 == 0:
            raise ContractViolation(
                f"n_nonterminal must be a positive odd integer, got {n_nonterminal}"
            )
        self.n = n_nonterminal
        self.assist_step_reward = float(assist_step_reward)
        self.terminal_reward = float(terminal_reward)
        self.spec = EnvSpec(
            state_dim=1, action_dim=0, gamma=1.0, horizon=MAX_EPISODE_STEPS,
            episode_count=episode_count,
        )

    @classmethod
    def from_size(cls, size: int, **kwargs) -> "RandomWalkEnv":
        """Build from the total state count (terminals included): 5, 11 or 33."""
        if size < 3 or size % 2 == 0:
            raise ContractViolation(f"size must be an odd integer >= 3, got {size}")
        return cls(n_nonterminal=size - 2, **kwargs)

    @property
    def n_states(self) -> int:
        return self.n + 2

    @property
    def start(self) -> int:
        return (self.n + 1) // 2

    def is_terminal(self, i: int) -> bool:
        return i == 0 or i == self.n + 1

    def reset(self, rng=None) -> np.ndarray:
        return np.array([self.start], dtype=float)

    def rewards_for(self, i: int, j: int) -> tuple[float, float]:
        """(target, assist) rewards for the move ``i -> j``."""
        if j == self.n + 1:
            return self.terminal_reward, self.terminal_reward
        if j == i + 1:
            return 0.0, self.assist_step_reward
        return 0.0, 0.0

    def step_index(self, i: int, move_right: bool) -> tuple[int, float, float, bool]:
        if self.is_terminal(i) or not 0 < i <= self.n:
            raise ContractViolation(f"rw_step called on non-transient state {i}")
        j = i + 1 if move_right else i - 1
        r_t, r_a = self.rewards_for(i, j)
        return j, r_t, r_a, self.is_terminal(j)

    def step(self, state, action=None, rng: np.random.Generator | None = None) -> DualRewardStep:
        if action is not None and np.asarray(action).size != 0:
            raise ContractViolation("the random walk takes no action")
        if rng is None:
            raise ContractViolation("the random walk needs an rng to sample moves")
        i = int(np.asarray(state).reshape(-1)[0])
        j, r_t, r_a, done = self.step_index(i, rng.random() < 0.5)
        return DualRewardStep(np.array([j], dtype=float), r_t, r_a, done)

    def true_values(self, reward: Reward = "target") -> np.ndarray:
        return rw_true_values(self, reward)


def _expected_rewards(env: RandomWalkEnv, reward: Reward) -> np.ndarray:
    kind, beta = _parse_which(reward)
    out = np.empty(env.n)
    for k, i in enumerate(range(1, env.n + 1)):
        lt, la = env.rewards_for(i, i - 1)
        rt, ra = env.rewards_for(i, i + 1)
        if kind == "target":
            left, right = lt, rt
        elif kind == "assist":
            left, right = la, ra
        elif kind == "blend":
            left = beta * la + (1.0 - beta) * lt
            right = beta * ra + (1.0 - beta) * rt
        else:
            raise ValueError(f"unknown reward selector {kind!r}")
        out[k] = 0.5 * (left + right)
    return out


def rw_true_values(env: RandomWalkEnv, reward: Reward = "target") -> np.ndarray:
    """Exact undiscounted state values of the non-terminal states.

    Solves ``v_i - (v_{i-1} + v_{i+1}) / 2 = rbar_i`` with zero terminal values
    by forward elimination and back substitution on the tridiagonal system.
    """
    n = env.n
    rbar = _expected_rewards(env, reward)
    # Row i: -0.5 v_{i-1} + v_i - 0.5 v_{i+1} = rbar_i
    c = np.empty(n)
    d = np.empty(n)
    c[0] = -0.5
    d[0] = rbar[0]
    for i in range(1, n):
        m = 1.0 + 0.5 * c[i - 1]
        c[i] = -0.5 / m
        d[i] = (rbar[i] + 0.5 * d[i - 1]) / m
    v = np.empty(n)
    v[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        v[i] = d[i] - c[i] * v[i + 1]
    return v


def bellman_residual(env: RandomWalkEnv, values: np.ndarray, reward: Reward = "target") -> np.ndarray:
    """Componentwise residual of the undiscounted Bellman equation."""
    full = np.concatenate([[0.0], np.asarray(values, dtype=float), [0.0]])
    rbar = _expected_rewards(env, reward)
    return full[1:-1] - rbar - 0.5 * (full[:-2] + full[2:])


def rms_error(values, reference) -> float:
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if values.shape != reference.shape:
        raise ContractViolation(
            f"rms_error length mismatch: {values.shape} vs {reference.shape}"
        )
    return float(np.sqrt(np.mean((values - reference) ** 2)))
