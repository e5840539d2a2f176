"""Coupled four-tank process with square-root outflow dynamics.

Two pumps (0-12 V) fill the upper tanks 3 and 4, which drain into the lower
tanks 1 and 2. All four levels must stay within [3, 30] cm; leaving the box
ends the episode with a penalty.

``mode="direct"`` applies the level update as a map::

    s1' = -c1 sqrt(s1) + c2 sqrt(s3) + c3 sqrt(s4)
    s2' = -c4 sqrt(s2) + c5 sqrt(s3) + c6 sqrt(s4)
    s3' = -c7 sqrt(s3) + c8 a1
    s4' = -c9 sqrt(s4) + c10 a2

``mode="incremental"`` treats the same right-hand sides as rates and takes an
Euler step ``s' = s + dt * f(s, a)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ContractViolation, DualRewardStep, EnvSpec, Environment

# Incremental defaults conserve mass: the upper tanks drain at 0.1 sqrt(s) and
# split that outflow 60/40 between the lower tanks. Holding a lower tank near
# its floor costs about 1 per step, so surviving the horizon beats crashing.
DEFAULT_COEFFS = (0.1, 0.06, 0.04, 0.1, 0.04, 0.06, 0.1, 0.25, 0.1, 0.25)
# Direct-map defaults: a constant 6 V holds every level inside the box.
DIRECT_COEFFS = (0.5, 2.0, 2.0, 0.5, 2.0, 2.0, 0.5, 3.0, 0.5, 3.0)
MODE_DEFAULTS = {"incremental": DEFAULT_COEFFS, "direct": DIRECT_COEFFS}


@dataclass(frozen=True)
class TankCoefficients:
    c: tuple = DEFAULT_COEFFS

    def __post_init__(self):
        if len(self.c) != 10:
            raise ContractViolation(f"need exactly 10 coefficients, got {len(self.c)}")
        if any(not np.isfinite(x) or x <= 0 for x in self.c):
            raise ContractViolation(f"all coefficients must be positive, got {self.c}")


class FourTankEnv(Environment):
    def __init__(
        self,
        coeffs=None,
        omega: float = 1.0,
        level_bounds: tuple[float, float] = (3.0, 30.0),
        action_bounds: tuple[float, float] = (0.0, 12.0),
        penalty: float = 100.0,
        horizon: int = 100,
        mode: str = "incremental",
        dt: float = 1.0,
        gamma: float = 0.99,
        episode_count: int = 30000,
    ):
        if mode not in ("direct", "incremental"):
            raise ValueError(f"mode must be 'direct' or 'incremental', got {mode!r}")
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if coeffs is None:
            coeffs = MODE_DEFAULTS[mode]
        self.c = np.asarray(TankCoefficients(tuple(float(x) for x in coeffs)).c)
        self.omega = float(omega)
        self.lo, self.hi = map(float, level_bounds)
        self.a_lo, self.a_hi = map(float, action_bounds)
        self.penalty = float(penalty)
        self.mode = mode
        self.dt = float(dt)
        self.spec = EnvSpec(
            state_dim=4, action_dim=2, gamma=gamma, horizon=horizon,
            episode_count=episode_count,
        )

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=4)

    def observe(self, state: np.ndarray) -> np.ndarray:
        mid = 0.5 * (self.lo + self.hi)
        half = 0.5 * (self.hi - self.lo)
        return (np.asarray(state, dtype=float) - mid) / half

    def map_action(self, x: np.ndarray) -> np.ndarray:
        x = np.clip(x, -1.0, 1.0)
        return self.a_lo + 0.5 * (x + 1.0) * (self.a_hi - self.a_lo)

    def clamp_action(self, a) -> np.ndarray:
        return np.clip(np.asarray(a, dtype=float), self.a_lo, self.a_hi)

    def rates(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        c = self.c
        r = np.sqrt(np.maximum(s, 0.0))
        return np.array(
            [
                -c[0] * r[0] + c[1] * r[2] + c[2] * r[3],
                -c[3] * r[1] + c[4] * r[2] + c[5] * r[3],
                -c[6] * r[2] + c[7] * a[0],
                -c[8] * r[3] + c[9] * a[1],
            ]
        )

    def dynamics(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        f = self.rates(s, a)
        if self.mode == "direct":
            return f
        return s + self.dt * f

    def satisfied(self, s: np.ndarray) -> bool:
        return bool(np.all((s >= self.lo) & (s <= self.hi)))

    def rewards(self, a: np.ndarray, s_next: np.ndarray) -> tuple[float, float]:
        cost = -self.omega * float(a @ a)
        if self.satisfied(s_next):
            return cost, 0.0
        return cost - self.penalty, -self.penalty

    def step(self, state, action, rng=None) -> DualRewardStep:
        s = self._check_state(state)
        a = self.clamp_action(self._check_action(action))
        s_next = self.dynamics(s, a)
        r_t, r_a = self.rewards(a, s_next)
        return DualRewardStep(s_next, r_t, r_a, not self.satisfied(s_next))
