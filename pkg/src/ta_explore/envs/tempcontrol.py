"""Linear data-centre cooling task with box state constraints.

Three coupled heat sources evolve as ``s' = A s + B a + noise`` with a slightly
unstable ``A``. The target reward charges ``omega * |a|^2`` plus a penalty when
the next state leaves ``[-2, 2]^3``; the assistant reward is the penalty alone.
Episodes always run the full horizon.
"""

from __future__ import annotations

import numpy as np

from ..core import DualRewardStep, EnvSpec, Environment

A_MATRIX = np.array(
    [
        [1.01, 0.01, 0.0],
        [0.01, 1.01, 0.01],
        [0.0, 0.01, 1.01],
    ]
)
B_MATRIX = np.eye(3)


class TempControlEnv(Environment):
    def __init__(
        self,
        omega: float = 1.0,
        noise_std: float = 0.01,
        bound: float = 2.0,
        penalty: float = 100.0,
        horizon: int = 100,
        action_scale: float = 1.0,
        gamma: float = 0.99,
        episode_count: int = 8000,
    ):
        if omega < 0:
            raise ValueError(f"omega must be non-negative, got {omega}")
        if noise_std < 0:
            raise ValueError(f"noise_std must be non-negative, got {noise_std}")
        self.A = A_MATRIX.copy()
        self.B = B_MATRIX.copy()
        self.omega = float(omega)
        self.noise_std = float(noise_std)
        self.bound = float(bound)
        self.penalty = float(penalty)
        self.action_scale = float(action_scale)
        self.spec = EnvSpec(
            state_dim=3, action_dim=3, gamma=gamma, horizon=horizon,
            episode_count=episode_count,
        )

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(3)

    def map_action(self, x: np.ndarray) -> np.ndarray:
        return self.action_scale * np.clip(x, -1.0, 1.0)

    def satisfied(self, s: np.ndarray) -> bool:
        return bool(np.all(np.abs(s) <= self.bound))

    def rewards(self, a: np.ndarray, s_next: np.ndarray) -> tuple[float, float]:
        cost = -self.omega * float(a @ a)
        if self.satisfied(s_next):
            return cost, 0.0
        return cost - self.penalty, -self.penalty

    def step(self, state, action, rng: np.random.Generator | None = None) -> DualRewardStep:
        s = self._check_state(state)
        a = self._check_action(action)
        s_next = self.A @ s + self.B @ a
        if rng is not None and self.noise_std > 0:
            s_next = s_next + self.noise_std * rng.standard_normal(3)
        r_t, r_a = self.rewards(a, s_next)
        return DualRewardStep(s_next, r_t, r_a, False)
