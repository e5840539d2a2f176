"""Dense networks in NumPy: forward, reverse-mode gradients, Adam, gradient check.

Weights are stored as ``(fan_in, fan_out)`` so a batch ``x`` of shape
``(n, fan_in)`` maps to ``x @ W + b``. Everything is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .core import ContractViolation

ACTIVATIONS = ("relu", "tanh", "identity")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name: str, z: np.ndarray, out: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(float)
    if name == "tanh":
        return 1.0 - out * out
    return np.ones_like(z)


@dataclass
class MlpParams:
    weights: list
    biases: list
    hidden_activation: str = "relu"
    output_activation: str = "identity"
    log_spread: np.ndarray | None = None

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ContractViolation("need one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ContractViolation(f"layer {k}: weight {w.shape} and bias {b.shape} disagree")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise ContractViolation(
                    f"layer {k} expects {w.shape[0]} inputs but layer {k - 1} emits "
                    f"{self.weights[k - 1].shape[1]}"
                )
        for name in (self.hidden_activation, self.output_activation):
            if name not in ACTIVATIONS:
                raise ValueError(f"unknown activation {name!r}")

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def arrays(self) -> list[np.ndarray]:
        """Flat view of every trainable array, in a fixed order."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        if self.log_spread is not None:
            out.append(self.log_spread)
        return out

    def with_arrays(self, arrays) -> "MlpParams":
        arrays = list(arrays)
        n = len(self.weights)
        log_spread = arrays[2 * n] if self.log_spread is not None else None
        return replace(
            self,
            weights=arrays[0 : 2 * n : 2],
            biases=arrays[1 : 2 * n : 2],
            log_spread=log_spread,
        )

    def copy(self) -> "MlpParams":
        return self.with_arrays([a.copy() for a in self.arrays()])

    def zeros_like(self) -> "MlpParams":
        return self.with_arrays([np.zeros_like(a) for a in self.arrays()])


@dataclass
class ForwardCache:
    inputs: list = field(default_factory=list)   # input to each layer
    pre: list = field(default_factory=list)      # pre-activation of each layer
    post: list = field(default_factory=list)     # post-activation of each layer
    squeeze: bool = False


def mlp_init(
    sizes,
    rng: np.random.Generator,
    output_activation: str = "identity",
    hidden_activation: str = "relu",
    log_spread_dim: int | None = None,
) -> MlpParams:
    """Weights ~ U[-b, b] with ``b = sqrt(6 / fan_in)``; zero biases.

    ``log_spread_dim`` adds a zero-initialised per-dimension log standard
    deviation (for Gaussian policies).
    """
    sizes = [int(s) for s in sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ContractViolation(f"invalid layer sizes {sizes}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    log_spread = np.zeros(log_spread_dim) if log_spread_dim else None
    return MlpParams(weights, biases, hidden_activation, output_activation, log_spread)


def mlp_forward(params: MlpParams, x) -> tuple[np.ndarray, ForwardCache]:
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != params.sizes[0]:
        raise ContractViolation(f"input shape {x.shape} does not match {params.sizes[0]} inputs")
    cache = ForwardCache(squeeze=squeeze)
    last = len(params.weights) - 1
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append(h)
        z = h @ w + b
        h = _act(params.output_activation if k == last else params.hidden_activation, z)
        cache.pre.append(z)
        cache.post.append(h)
    return (h[0] if squeeze else h), cache


def mlp_backward(params: MlpParams, cache: ForwardCache, grad_out) -> MlpParams:
    """Gradients of ``sum(grad_out * output)`` w.r.t. every weight and bias.

    The returned object mirrors ``params``; its ``log_spread`` slot (if any)
    is zero since the network output does not depend on it.
    """
    g = np.asarray(grad_out, dtype=float)
    if cache.squeeze:
        g = g[None, :]
    last = len(params.weights) - 1
    dw = [None] * len(params.weights)
    db = [None] * len(params.weights)
    for k in range(last, -1, -1):
        act = params.output_activation if k == last else params.hidden_activation
        g = g * _act_grad(act, cache.pre[k], cache.post[k])
        dw[k] = cache.inputs[k].T @ g
        db[k] = g.sum(axis=0)
        if k:
            g = g @ params.weights[k].T
    log_spread = None if params.log_spread is None else np.zeros_like(params.log_spread)
    return replace(params, weights=dw, biases=db, log_spread=log_spread)


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0
    lr: float = 0.00025
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 0.00025, **kwargs) -> "AdamState":
        arrays = params.arrays()
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays], lr=lr, **kwargs)


def adam_step(params: MlpParams, grads: MlpParams, state: AdamState) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam step; inputs are left untouched."""
    p_arr, g_arr = params.arrays(), grads.arrays()
    if [a.shape for a in p_arr] != [g.shape for g in g_arr]:
        raise ContractViolation("gradient shapes do not match parameter shapes")
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    new_m = [b1 * m + (1.0 - b1) * g for m, g in zip(state.m, g_arr)]
    new_v = [b2 * v + (1.0 - b2) * g * g for v, g in zip(state.v, g_arr)]
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_p = [
        p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        for p, m, v in zip(p_arr, new_m, new_v)
    ]
    return params.with_arrays(new_p), replace(state, m=new_m, v=new_v, t=t)


def global_norm(arrays) -> float:
    return float(np.sqrt(sum(float(np.sum(a * a)) for a in arrays)))


def grad_check(
    params: MlpParams,
    loss_fn: Callable[[MlpParams], tuple[float, MlpParams]],
    perturbation: float = 1e-5,
    max_coords: int | None = 200,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_fn(params)`` returns ``(loss, grads)``. At most ``max_coords``
    coordinates are probed (sampled with ``rng``); ``None`` checks every one.
    Relative error is ``|a - n| / max(|a| + |n|, 1e-8)``.
    """
    _, grads = loss_fn(params)
    base = [a.copy() for a in params.arrays()]
    g_arr = grads.arrays()
    coords = [(i, j) for i, a in enumerate(base) for j in range(a.size)]
    if max_coords is not None and len(coords) > max_coords:
        rng = rng if rng is not None else np.random.default_rng(0)
        picks = rng.choice(len(coords), size=max_coords, replace=False)
        coords = [coords[k] for k in sorted(picks)]
    worst = 0.0
    for i, j in coords:
        plus = [a.copy() for a in base]
        minus = [a.copy() for a in base]
        plus[i].flat[j] += perturbation
        minus[i].flat[j] -= perturbation
        lp, _ = loss_fn(params.with_arrays(plus))
        lm, _ = loss_fn(params.with_arrays(minus))
        numeric = (lp - lm) / (2.0 * perturbation)
        analytic = g_arr[i].flat[j]
        rel = abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-8)
        worst = max(worst, rel)
    return worst


def save_params(path, params: MlpParams) -> None:
    """Write a ``.npz`` with arrays ``W0, b0, W1, b1, ...``, optional ``log_spread``,
    and string entries ``hidden_activation`` / ``output_activation``."""
    arrays = {}
    for k, (w, b) in enumerate(zip(params.weights, params.biases)):
        arrays[f"W{k}"] = w
        arrays[f"b{k}"] = b
    if params.log_spread is not None:
        arrays["log_spread"] = params.log_spread
    arrays["hidden_activation"] = np.array(params.hidden_activation)
    arrays["output_activation"] = np.array(params.output_activation)
    np.savez(path, **arrays)


def load_params(path) -> MlpParams:
    with np.load(path) as data:
        n = sum(1 for key in data.files if key.startswith("W"))
        weights = [data[f"W{k}"] for k in range(n)]
        biases = [data[f"b{k}"] for k in range(n)]
        log_spread = data["log_spread"] if "log_spread" in data.files else None
        return MlpParams(
            weights,
            biases,
            str(data["hidden_activation"]),
            str(data["output_activation"]),
            log_spread,
        )
