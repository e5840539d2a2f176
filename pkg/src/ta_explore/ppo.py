"""Clipped-surrogate policy gradient (PPO) with GAE, trained on blended rewards.

The actor emits a tanh-bounded Gaussian mean; its spread is a learnable,
state-independent ``log_spread`` vector. Rewards enter the buffer already
blended with the beta of the episode that produced them, and network weights
carry over from episode to episode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import ContractViolation, Environment, RunRecord, make_rng
from .nn import AdamState, MlpParams, adam_step, global_norm, mlp_backward, mlp_forward, mlp_init
from .schedule import BetaSchedule, beta_at, blend

log = logging.getLogger(__name__)

LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class PpoConfig:
    minibatch_size: int = 512
    epochs_per_update: int = 10
    lr: float = 0.00025
    gamma: float = 0.99
    gae_lambda: float = 0.9
    clip_epsilon: float = 0.2
    rollout_min_steps: int = 2048
    value_loss_coef: float = 0.5
    entropy_coef: float = 0.0
    max_grad_norm: float = 0.5
    hidden_sizes: tuple = (512, 256, 64)

    def __post_init__(self):
        if self.clip_epsilon <= 0:
            raise ValueError(f"clip_epsilon must be positive, got {self.clip_epsilon}")
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError(f"gae_lambda must lie in [0, 1], got {self.gae_lambda}")
        for name in ("minibatch_size", "epochs_per_update", "rollout_min_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.lr <= 0 or self.max_grad_norm <= 0:
            raise ValueError("lr and max_grad_norm must be positive")


# -- policy -----------------------------------------------------------------


def gaussian_logp(x: np.ndarray, mean: np.ndarray, log_spread: np.ndarray) -> np.ndarray:
    z = (x - mean) * np.exp(-log_spread)
    return -0.5 * np.sum(z * z, axis=-1) - np.sum(log_spread) - 0.5 * mean.shape[-1] * LOG_2PI


def policy_sample(actor: MlpParams, obs, rng: np.random.Generator, action_map=None):
    """Sample a raw action around the actor's mean.

    Returns ``(action, log_prob, raw)`` where ``raw`` is the pre-clamp Gaussian
    sample (its log-probability is what gets recorded) and ``action`` is
    ``action_map(raw)``, or ``raw`` clipped to [-1, 1] when no map is given.
    """
    mean, _ = mlp_forward(actor, obs)
    spread = np.exp(actor.log_spread)
    raw = mean + spread * rng.standard_normal(mean.shape)
    logp = float(gaussian_logp(raw, mean, actor.log_spread))
    action = action_map(raw) if action_map is not None else np.clip(raw, -1.0, 1.0)
    return action, logp, raw


# -- rollout storage and advantages -------------------------------------------


@dataclass
class RolloutBuffer:
    obs: list = field(default_factory=list)
    raw_actions: list = field(default_factory=list)
    logps: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    values: list = field(default_factory=list)
    dones: list = field(default_factory=list)
    betas: list = field(default_factory=list)

    def __len__(self):
        return len(self.rewards)

    def add(self, obs, raw_action, logp, reward, value, done, beta) -> None:
        self.obs.append(np.asarray(obs, dtype=float))
        self.raw_actions.append(np.asarray(raw_action, dtype=float))
        self.logps.append(float(logp))
        self.rewards.append(float(reward))
        self.values.append(float(value))
        self.dones.append(bool(done))
        self.betas.append(float(beta))

    def clear(self) -> None:
        for name in ("obs", "raw_actions", "logps", "rewards", "values", "dones", "betas"):
            getattr(self, name).clear()


def gae(rewards, values, dones, gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    """Generalised advantage estimates and value targets.

    ``dones[t]`` marks the last step of an episode; nothing is bootstrapped
    across it. The final record is treated as an episode end.
    """
    r = np.asarray(rewards, dtype=float)
    v = np.asarray(values, dtype=float)
    d = np.asarray(dones, dtype=bool).copy()
    n = r.shape[0]
    if n:
        d[-1] = True
    adv = np.zeros(n)
    running = 0.0
    for t in range(n - 1, -1, -1):
        nonterminal = 0.0 if d[t] else 1.0
        v_next = v[t + 1] if t + 1 < n else 0.0
        delta = r[t] + gamma * v_next * nonterminal - v[t]
        running = delta + gamma * lam * nonterminal * running
        adv[t] = running
    return adv, adv + v


def gae_compute(buffer: RolloutBuffer, gamma: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    return gae(buffer.rewards, buffer.values, buffer.dones, gamma, lam)


def normalize_advantages(adv: np.ndarray) -> np.ndarray:
    return (adv - adv.mean()) / (adv.std() + 1e-8)


# -- update -----------------------------------------------------------------


@dataclass
class MinibatchTerms:
    ratio: np.ndarray
    surrogate: np.ndarray
    unclipped: np.ndarray
    policy_loss: float
    value_loss: float
    entropy: float


def minibatch_loss(actor, critic, obs, raw, old_logp, adv, targets, config: PpoConfig):
    """Loss terms and gradients for one minibatch.

    The loss is ``-mean(min(r A, clip(r) A)) + c_v mean((V - target)^2) - c_e H``.
    Returns ``(terms, actor_grads, critic_grads)``.
    """
    b = obs.shape[0]
    eps = config.clip_epsilon
    mean, cache_a = mlp_forward(actor, obs)
    ls = actor.log_spread
    inv_spread = np.exp(-ls)
    z = (raw - mean) * inv_spread
    logp = -0.5 * np.sum(z * z, axis=1) - np.sum(ls) - 0.5 * mean.shape[1] * LOG_2PI
    ratio = np.exp(logp - old_logp)
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv
    surrogate = np.minimum(unclipped, clipped)
    entropy = float(np.sum(ls) + 0.5 * ls.shape[0] * (LOG_2PI + 1.0))

    # d(loss)/d(logp): only samples whose unclipped term is the active minimum carry gradient.
    active = unclipped <= clipped
    g_logp = -np.where(active, unclipped, 0.0) / b
    g_mean = g_logp[:, None] * z * inv_spread[None, :]
    actor_grads = mlp_backward(actor, cache_a, g_mean)
    actor_grads.log_spread = np.sum(g_logp[:, None] * (z * z - 1.0), axis=0) - config.entropy_coef

    v, cache_c = mlp_forward(critic, obs)
    err = v[:, 0] - targets
    value_loss = float(np.mean(err * err))
    g_v = (config.value_loss_coef * 2.0 / b) * err[:, None]
    critic_grads = mlp_backward(critic, cache_c, g_v)

    terms = MinibatchTerms(
        ratio=ratio,
        surrogate=surrogate,
        unclipped=unclipped,
        policy_loss=float(-np.mean(surrogate)),
        value_loss=value_loss,
        entropy=entropy,
    )
    return terms, actor_grads, critic_grads


@dataclass
class UpdateDiagnostics:
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    initial_ratio_max_dev: float
    grad_norm: float


def ppo_update(
    actor: MlpParams,
    critic: MlpParams,
    adam_states: tuple[AdamState, AdamState],
    buffer: RolloutBuffer,
    config: PpoConfig,
    rng: np.random.Generator,
    min_steps: int | None = None,
):
    """Run ``epochs_per_update`` passes of shuffled minibatches over the buffer.

    Returns ``(actor, critic, (actor_adam, critic_adam), diagnostics)``.
    """
    need = config.rollout_min_steps if min_steps is None else min_steps
    if len(buffer) < need:
        raise ContractViolation(f"buffer holds {len(buffer)} records, need at least {need}")
    obs = np.stack(buffer.obs)
    raw = np.stack(buffer.raw_actions)
    old_logp = np.asarray(buffer.logps)
    adv, targets = gae_compute(buffer, config.gamma, config.gae_lambda)
    adv = normalize_advantages(adv)

    actor_state, critic_state = adam_states
    n = len(buffer)
    mb = config.minibatch_size
    losses, vlosses, clipfrac, norms = [], [], [], []
    first_dev = None
    entropy = float("nan")
    for _ in range(config.epochs_per_update):
        order = rng.permutation(n)
        for start in range(0, n, mb):
            idx = order[start : start + mb]
            terms, ga, gc = minibatch_loss(
                actor, critic, obs[idx], raw[idx], old_logp[idx], adv[idx], targets[idx], config
            )
            if first_dev is None:
                first_dev = float(np.max(np.abs(terms.ratio - 1.0)))
            arrays = ga.arrays() + gc.arrays()
            norm = global_norm(arrays)
            if norm > config.max_grad_norm:
                scale = config.max_grad_norm / (norm + 1e-12)
                ga = ga.with_arrays([g * scale for g in ga.arrays()])
                gc = gc.with_arrays([g * scale for g in gc.arrays()])
            actor, actor_state = adam_step(actor, ga, actor_state)
            critic, critic_state = adam_step(critic, gc, critic_state)
            losses.append(terms.policy_loss)
            vlosses.append(terms.value_loss)
            clipfrac.append(float(np.mean(np.abs(terms.ratio - 1.0) > config.clip_epsilon)))
            norms.append(norm)
            entropy = terms.entropy
    diag = UpdateDiagnostics(
        policy_loss=float(np.mean(losses)),
        value_loss=float(np.mean(vlosses)),
        entropy=entropy,
        clip_fraction=float(np.mean(clipfrac)),
        initial_ratio_max_dev=first_dev,
        grad_norm=float(np.mean(norms)),
    )
    return actor, critic, (actor_state, critic_state), diag


# -- training loop ------------------------------------------------------------


@dataclass
class TrainResult:
    records: list
    actor: MlpParams
    critic: MlpParams
    updates: list = field(default_factory=list)


def init_agent(env: Environment, config: PpoConfig, rng: np.random.Generator):
    obs_dim = env.observe(np.zeros(env.spec.state_dim)).shape[0]
    act_dim = env.spec.action_dim
    hidden = list(config.hidden_sizes)
    actor = mlp_init([obs_dim, *hidden, act_dim], rng, "tanh", log_spread_dim=act_dim)
    critic = mlp_init([obs_dim, *hidden, 1], rng, "identity")
    states = (
        AdamState.for_params(actor, lr=config.lr),
        AdamState.for_params(critic, lr=config.lr),
    )
    return actor, critic, states


def ppo_train(
    env: Environment,
    sched: BetaSchedule,
    config: PpoConfig,
    episodes: int,
    master_seed: int,
    run: int = 0,
    progress=None,
) -> TrainResult:
    """Train one agent for ``episodes`` episodes.

    Each episode trains on ``blend(r_target, r_assist, beta_at(sched, e))``;
    the recorded metric is always the undiscounted target-reward return.
    """
    if env.spec.action_dim < 1:
        raise ContractViolation("PPO needs an environment with actions")
    init_rng = make_rng(master_seed, run, "weight-init")
    start_rng = make_rng(master_seed, run, "init-state")
    noise_rng = make_rng(master_seed, run, "dynamics-noise")
    policy_rng = make_rng(master_seed, run, "policy-sample")
    actor, critic, adam_states = init_agent(env, config, init_rng)

    buffer = RolloutBuffer()
    records, updates = [], []
    horizon = env.spec.horizon
    for e in range(episodes):
        beta = beta_at(sched, e)
        s = env.reset(start_rng)
        ep_obs, ep_raw, ep_logp, ep_rew = [], [], [], []
        target_return = 0.0
        violations = 0
        for _ in range(horizon):
            o = env.observe(s)
            a, logp, raw = policy_sample(actor, o, policy_rng, env.map_action)
            step = env.step(s, a, noise_rng)
            ep_obs.append(o)
            ep_raw.append(raw)
            ep_logp.append(logp)
            ep_rew.append(blend(step.r_target, step.r_assist, beta))
            target_return += step.r_target
            violations += step.violated
            s = step.next_state
            if step.terminated:
                break
        values, _ = mlp_forward(critic, np.stack(ep_obs))
        n = len(ep_rew)
        for t in range(n):
            buffer.add(ep_obs[t], ep_raw[t], ep_logp[t], ep_rew[t], values[t, 0], t == n - 1, beta)
        records.append(RunRecord(run, e, beta, target_return, n, violations))

        if len(buffer) >= config.rollout_min_steps:
            actor, critic, adam_states, diag = ppo_update(
                actor, critic, adam_states, buffer, config, policy_rng
            )
            updates.append(diag)
            buffer.clear()
            log.debug("run %d episode %d: %s", run, e, diag)
        if progress is not None:
            progress(records[-1])
    return TrainResult(records, actor, critic, updates)
