"""Annealing of the assistant-reward weight across episodes."""

from __future__ import annotations

from dataclasses import dataclass

KINDS = ("exponential", "linear", "constant-zero")


@dataclass(frozen=True)
class BetaSchedule:
    """Episode-indexed weight on the assistant reward.

    ``exponential``: ``beta0 * lam**e``, snapped to 0 once below ``beta_min``.
    ``linear``: ``max(0, (E - e) / E * beta0)``, exactly 0 for ``e >= E``.
    ``constant-zero``: the target-reward-only baseline.
    """

    kind: str = "constant-zero"
    beta0: float = 1.0
    lam: float | None = None
    E: int | None = None
    beta_min: float = 1e-6

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"schedule kind must be one of {KINDS}, got {self.kind!r}")
        if not 0.0 <= self.beta0 <= 1.0:
            raise ValueError(f"beta0 must lie in [0, 1], got {self.beta0}")
        if self.kind == "exponential":
            if self.lam is None or not 0.0 < self.lam < 1.0:
                raise ValueError(f"exponential schedule needs lam in (0, 1), got {self.lam}")
            if self.beta_min < 0.0:
                raise ValueError("beta_min must be non-negative")
        if self.kind == "linear":
            if self.E is None or int(self.E) != self.E or self.E < 1:
                raise ValueError(f"linear schedule needs integer E >= 1, got {self.E}")

    @classmethod
    def exponential(cls, lam: float, beta0: float = 1.0, beta_min: float = 1e-6) -> "BetaSchedule":
        return cls("exponential", beta0=beta0, lam=lam, beta_min=beta_min)

    @classmethod
    def linear(cls, E: int, beta0: float = 1.0) -> "BetaSchedule":
        return cls("linear", beta0=beta0, E=E)

    @classmethod
    def zero(cls) -> "BetaSchedule":
        return cls("constant-zero", beta0=0.0)

    def __call__(self, e: int) -> float:
        return beta_at(self, e)


def beta_at(sched: BetaSchedule, e: int) -> float:
    if e < 0:
        raise ValueError(f"episode index must be non-negative, got {e}")
    if sched.kind == "constant-zero":
        return 0.0
    if sched.kind == "linear":
        if e >= sched.E:
            return 0.0
        return (sched.E - e) / sched.E * sched.beta0
    beta = sched.beta0 * sched.lam**e
    if beta < sched.beta_min:
        return 0.0
    return beta


def blend(r_target: float, r_assist: float, beta: float) -> float:
    """Per-step training reward: ``beta * r_assist + (1 - beta) * r_target``."""
    if beta == 0.0:
        return r_target
    if beta == 1.0:
        return r_assist
    return beta * r_assist + (1.0 - beta) * r_target
