"""Experiment configuration: YAML in, validated dataclass out, YAML echo back.

A config names one environment, one learner and one or more beta schedules.
Each schedule becomes a separate curve run with the same seeds::

    env: {name: randomwalk, size: 5}
    algorithm: {name: td0}
    schedules:
      - {kind: constant-zero, label: baseline}
      - {kind: exponential, lam: 0.95}
    episodes: 100
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, fields
from pathlib import Path

import yaml

from .envs import FourTankEnv, RandomWalkEnv, TempControlEnv
from .ppo import PpoConfig
from .schedule import BetaSchedule

ENV_DEFAULTS = {
    "randomwalk": {"size": 5, "assist_step_reward": 0.1, "terminal_reward": 1.0},
    "tempcontrol": {
        "omega": 1.0, "noise_std": 0.01, "action_scale": 1.0, "bound": 2.0,
        "penalty": 100.0, "horizon": 100, "gamma": 0.99,
    },
    "fourtank": {
        "omega": 1.0, "mode": "incremental", "coeffs": None, "dt": 1.0,
        "penalty": 100.0, "horizon": 100, "gamma": 0.99,
    },
}
ENV_EPISODES = {"randomwalk": 100, "tempcontrol": 8000, "fourtank": 30000}

ALGO_DEFAULTS = {
    "td0": {"alpha": 0.1, "step_size": "constant", "decay_power": 0.7},
    "ppo": {
        f.name: (list(f.default) if isinstance(f.default, tuple) else f.default)
        for f in fields(PpoConfig)
    },
}
ALGO_RUNS = {"td0": 100, "ppo": 5}
# Random-walk curves are already run averages; PPO returns are smoothed for display.
ALGO_WINDOW = {"td0": 1, "ppo": 50}
PAIRINGS = {"td0": ("randomwalk",), "ppo": ("tempcontrol", "fourtank")}

SCHEDULE_KEYS = ("label", "kind", "beta0", "lam", "E", "beta_min")
TOP_KEYS = (
    "name", "env", "algorithm", "schedule", "schedules", "episodes", "runs",
    "master_seed", "output_dir", "thresholds", "window",
)
LABEL_RE = re.compile(r"^[A-Za-z0-9_.=+-]+$")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(frozen=True)
class ScheduleConfig:
    label: str
    kind: str
    beta0: float = 1.0
    lam: float | None = None
    E: int | None = None
    beta_min: float = 1e-6

    def build(self) -> BetaSchedule:
        return BetaSchedule(self.kind, beta0=self.beta0, lam=self.lam, E=self.E, beta_min=self.beta_min)

    def to_dict(self) -> dict:
        d = {"label": self.label, "kind": self.kind}
        if self.kind != "constant-zero":
            d["beta0"] = self.beta0
        if self.kind == "exponential":
            d.update(lam=self.lam, beta_min=self.beta_min)
        if self.kind == "linear":
            d["E"] = self.E
        return d


@dataclass(frozen=True)
class ExperimentConfig:
    env: str
    env_params: dict
    algorithm: str
    algo_params: dict
    schedules: tuple
    episodes: int
    runs: int
    master_seed: int = 0
    output_dir: str = "results"
    name: str = "experiment"
    thresholds: tuple = ()
    window: int = 50

    @property
    def maximize(self) -> bool:
        """PPO curves are returns (higher is better); TD curves are RMS errors."""
        return self.algorithm == "ppo"

    @property
    def baseline(self) -> ScheduleConfig | None:
        return next((s for s in self.schedules if s.kind == "constant-zero"), None)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "env": {"name": self.env, **copy.deepcopy(self.env_params)},
            "algorithm": {"name": self.algorithm, **copy.deepcopy(self.algo_params)},
            "schedules": [s.to_dict() for s in self.schedules],
            "episodes": self.episodes,
            "runs": self.runs,
            "master_seed": self.master_seed,
            "output_dir": self.output_dir,
            "thresholds": list(self.thresholds),
            "window": self.window,
        }

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def replace(self, **changes) -> "ExperimentConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return ExperimentConfig(**d)

    def build_env(self):
        return build_env(self.env, self.env_params)

    def build_ppo_config(self) -> PpoConfig:
        p = dict(self.algo_params)
        p["hidden_sizes"] = tuple(p["hidden_sizes"])
        return PpoConfig(**p)


def build_env(name: str, params: dict):
    p = dict(params)
    if name == "randomwalk":
        size = p.pop("size")
        return RandomWalkEnv(size - 2, **p)
    if name == "tempcontrol":
        return TempControlEnv(**p)
    return FourTankEnv(**p)


def _coerce(path: str, value, default):
    """Check ``value`` against the type of ``default`` and normalise it."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(path, f"expected a list of integers, got {value!r}")
        return list(value)
    return value


def _mapping(path: str, value) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _section(path: str, raw, table: dict, what: str) -> tuple[str, dict]:
    raw = dict(_mapping(path, raw))
    name = raw.pop("name", None)
    if name not in table:
        raise ConfigError(f"{path}.name", f"unknown {what} {name!r}; choose from {sorted(table)}")
    defaults = table[name]
    params = {}
    for key, value in raw.items():
        if key not in defaults:
            raise ConfigError(f"{path}.{key}", f"unknown key for {what} {name!r}")
        params[key] = _coerce(f"{path}.{key}", value, defaults[key])
    for key, default in defaults.items():
        params.setdefault(key, copy.deepcopy(default))
    return name, params


def _schedule(path: str, raw) -> ScheduleConfig:
    raw = _mapping(path, raw)
    for key in raw:
        if key not in SCHEDULE_KEYS:
            raise ConfigError(f"{path}.{key}", "unknown schedule key")
    kind = raw.get("kind")
    num = {"beta0": 1.0, "lam": 1.0, "beta_min": 1.0, "E": 1}
    vals = {k: _coerce(f"{path}.{k}", raw[k], num[k]) for k in num if raw.get(k) is not None}
    if kind == "constant-zero":
        vals["beta0"] = 0.0
    try:
        sched = BetaSchedule(kind, **vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None
    label = raw.get("label") or _default_label(sched)
    if not isinstance(label, str) or not LABEL_RE.match(label):
        raise ConfigError(f"{path}.label", f"label must match {LABEL_RE.pattern}, got {label!r}")
    return ScheduleConfig(label, sched.kind, sched.beta0, sched.lam, sched.E, sched.beta_min)


def _default_label(s: BetaSchedule) -> str:
    if s.kind == "constant-zero":
        return "baseline"
    if s.kind == "exponential":
        return f"exp-lam{s.lam:g}"
    return f"linear-E{s.E}-b{s.beta0:g}"


def _positive_int(path: str, value, minimum: int = 1) -> int:
    value = _coerce(path, value, 0)
    if value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    return value


def parse_config(raw) -> ExperimentConfig:
    """Validate a raw mapping and fill defaults."""
    raw = _mapping("<root>", raw)
    for key in raw:
        if key not in TOP_KEYS:
            raise ConfigError(key, "unknown top-level key")
    env, env_params = _section("env", raw.get("env"), ENV_DEFAULTS, "environment")
    algo, algo_params = _section("algorithm", raw.get("algorithm"), ALGO_DEFAULTS, "algorithm")
    if env not in PAIRINGS[algo]:
        raise ConfigError("algorithm.name", f"{algo!r} cannot be paired with env {env!r} (allowed: {PAIRINGS[algo]})")

    if "schedule" in raw and "schedules" in raw:
        raise ConfigError("schedules", "give either 'schedule' or 'schedules', not both")
    if "schedule" in raw:
        scheds = [_schedule("schedule", raw["schedule"])]
    else:
        items = raw.get("schedules")
        if not isinstance(items, list) or not items:
            raise ConfigError("schedules", "need a non-empty list of schedules")
        scheds = [_schedule(f"schedules[{i}]", s) for i, s in enumerate(items)]
    labels = [s.label for s in scheds]
    if len(set(labels)) != len(labels):
        raise ConfigError("schedules", f"labels must be unique, got {labels}")

    if env == "randomwalk" and (env_params["size"] < 3 or env_params["size"] % 2 == 0):
        raise ConfigError("env.size", f"size must be odd and >= 3, got {env_params['size']}")
    if env == "fourtank" and env_params["coeffs"] is not None:
        c = env_params["coeffs"]
        if not isinstance(c, list) or len(c) != 10:
            raise ConfigError("env.coeffs", f"need a list of 10 positive numbers, got {c!r}")
        env_params["coeffs"] = [_coerce(f"env.coeffs[{i}]", v, 1.0) for i, v in enumerate(c)]
    try:
        build_env(env, env_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError("env", str(exc)) from None
    if algo == "td0":
        if algo_params["alpha"] <= 0 or algo_params["alpha"] > 1:
            raise ConfigError("algorithm.alpha", f"must lie in (0, 1], got {algo_params['alpha']}")
        if algo_params["step_size"] not in ("constant", "visits"):
            raise ConfigError("algorithm.step_size", "must be 'constant' or 'visits'")
        if not 0.5 < algo_params["decay_power"] <= 1.0:
            raise ConfigError("algorithm.decay_power", "must lie in (0.5, 1]")
    else:
        try:
            PpoConfig(**{**algo_params, "hidden_sizes": tuple(algo_params["hidden_sizes"])})
        except (TypeError, ValueError) as exc:
            raise ConfigError("algorithm", str(exc)) from None

    thresholds = raw.get("thresholds") or []
    if not isinstance(thresholds, list):
        raise ConfigError("thresholds", "expected a list of numbers")
    thresholds = tuple(_coerce(f"thresholds[{i}]", t, 1.0) for i, t in enumerate(thresholds))
    output_dir = raw.get("output_dir", "results")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir", "expected a string")
    name = raw.get("name", "experiment")
    if not isinstance(name, str):
        raise ConfigError("name", "expected a string")
    seed = _coerce("master_seed", raw.get("master_seed", 0), 0)
    if seed < 0:
        raise ConfigError("master_seed", "must be non-negative")

    return ExperimentConfig(
        env=env,
        env_params=env_params,
        algorithm=algo,
        algo_params=algo_params,
        schedules=tuple(scheds),
        episodes=_positive_int("episodes", raw.get("episodes", ENV_EPISODES[env])),
        runs=_positive_int("runs", raw.get("runs", ALGO_RUNS[algo])),
        master_seed=seed,
        output_dir=output_dir,
        name=name,
        thresholds=thresholds,
        window=_positive_int("window", raw.get("window", ALGO_WINDOW[algo])),
    )


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"not valid YAML: {exc}") from None
    return parse_config(raw)


def write_resolved(config: ExperimentConfig, out_dir) -> Path:
    path = Path(out_dir) / "resolved_config.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.dump())
    return path
