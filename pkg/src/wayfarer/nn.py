"""Minimal MLP with analytic backprop and a diagonal-Gaussian action head.

Hidden layers use tanh, the output layer is linear. Forward returns a
cache of activations so the matching backward pass can produce exact
reverse-mode gradients; both accept a single input vector or a batch
(rows are samples). The Gaussian head keeps one state-independent
``log_std`` per action dimension, clamped to [-3, 1] after updates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG_STD_MIN = -3.0
LOG_STD_MAX = 1.0
LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class LayerDims:
    input: int
    hidden: list[int]
    output: int

    def __post_init__(self) -> None:
        sizes = [self.input, *self.hidden, self.output]
        if any(int(s) < 1 for s in sizes):
            raise ValueError(f"all layer sizes must be >= 1, got {sizes}")

    def pairs(self) -> list[tuple[int, int]]:
        sizes = [self.input, *self.hidden, self.output]
        return list(zip(sizes[:-1], sizes[1:]))


@dataclass
class MlpParams:
    """Per-layer weight matrices (out x in) and bias vectors."""

    dims: LayerDims
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def copy(self) -> "MlpParams":
        return MlpParams(
            dims=self.dims,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
        )

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]


@dataclass
class GaussianHead:
    log_std: np.ndarray

    def copy(self) -> "GaussianHead":
        return GaussianHead(log_std=self.log_std.copy())

    def clamp(self) -> None:
        np.clip(self.log_std, LOG_STD_MIN, LOG_STD_MAX, out=self.log_std)

    def entropy(self) -> float:
        """Sum over dimensions of log_std + 0.5*ln(2*pi*e)."""
        return float(np.sum(self.log_std + 0.5 * (LOG_2PI + 1.0)))


@dataclass
class Gradients:
    """Same shapes as MlpParams, plus the gradient w.r.t. the input."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    d_input: np.ndarray | None = None
    log_std: np.ndarray | None = None


@dataclass
class ForwardCache:
    """Activations retained by mlp_forward for the backward pass."""

    inputs: list[np.ndarray] = field(default_factory=list)  # activation entering each layer
    hidden_out: list[np.ndarray] = field(default_factory=list)  # tanh outputs per hidden layer
    squeeze: bool = False


def init_params(dims: LayerDims, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights, U(-b, b) with b = sqrt(6/(fan_in+fan_out)); zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in dims.pairs():
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(dims=dims, weights=weights, biases=biases)


def zeros_like_params(params: MlpParams) -> Gradients:
    return Gradients(
        weights=[np.zeros_like(w) for w in params.weights],
        biases=[np.zeros_like(b) for b in params.biases],
    )


def mlp_forward(params: MlpParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Affine + tanh stack with a linear output layer.

    Accepts shape (input,) or (n, input); output matches.
    """
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != params.dims.input:
        raise ValueError(f"expected input width {params.dims.input}, got {x.shape[1]}")

    cache = ForwardCache(squeeze=squeeze)
    h = x
    n_layers = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append(h)
        z = h @ w.T + b
        if i < n_layers - 1:
            h = np.tanh(z)
            cache.hidden_out.append(h)
        else:
            h = z
    return (h[0] if squeeze else h), cache


def mlp_backward(params: MlpParams, cache: ForwardCache, output_gradient: np.ndarray) -> Gradients:
    """Gradients of sum(output * output_gradient) w.r.t. all parameters and the input."""
    g = np.asarray(output_gradient, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != (cache.inputs[0].shape[0], params.dims.output):
        raise ValueError(
            f"output gradient shape {g.shape} does not match forward batch "
            f"({cache.inputs[0].shape[0]}, {params.dims.output})"
        )

    grads = zeros_like_params(params)
    delta = g
    for i in range(len(params.weights) - 1, -1, -1):
        grads.weights[i] = delta.T @ cache.inputs[i]
        grads.biases[i] = delta.sum(axis=0)
        delta = delta @ params.weights[i]
        if i > 0:
            # derivative of tanh at the (i-1)-th hidden output
            delta = delta * (1.0 - cache.hidden_out[i - 1] ** 2)
    grads.d_input = delta[0] if cache.squeeze else delta
    return grads


def sample_action(
    mean: np.ndarray, head: GaussianHead, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    """Draw a ~ N(mean, exp(log_std)^2) and return (a, log density at a)."""
    std = np.exp(head.log_std)
    action = mean + std * rng.standard_normal(mean.shape)
    return action, log_prob(mean, head, action)


def log_prob(mean: np.ndarray, head: GaussianHead, action: np.ndarray) -> float:
    z = (action - mean) * np.exp(-head.log_std)
    return float(-0.5 * np.sum(z * z) - np.sum(head.log_std) - 0.5 * LOG_2PI * mean.shape[-1])


def log_prob_grad(
    mean: np.ndarray, head: GaussianHead, action: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(d logp / d mean, d logp / d log_std) at the given action.

    d/d mean = (a - mean) / exp(2*log_std);
    d/d log_std = (a - mean)^2 * exp(-2*log_std) - 1.
    """
    inv_var = np.exp(-2.0 * head.log_std)
    diff = action - mean
    return diff * inv_var, diff * diff * inv_var - 1.0
