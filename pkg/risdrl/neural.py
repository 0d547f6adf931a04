"""
Dense tanh networks with analytic backpropagation, Adam and soft target updates.

Arrays are batch-first: a forward pass takes (B, in) or a single (in,) vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"RISMLP"
CHECKPOINT_VERSION = 1
ACTIVATIONS = ("tanh", "identity")


class TrainingDiverged(RuntimeError):
    """
    Raised when a loss, gradient or parameter stops being finite.
    """


class Mlp:
    def __init__(
        self,
        layer_dims: Sequence[int],
        weights: list[np.ndarray],
        biases: list[np.ndarray],
        *,
        output_activation: str = "tanh",
        hidden_activation: str = "tanh",
        name: str = "mlp",
    ):
        layer_dims = [int(d) for d in layer_dims]
        if len(layer_dims) < 2 or min(layer_dims) < 1:
            raise ValueError(f"Invalid layer dims {layer_dims}")
        if len(weights) != len(layer_dims) - 1 or len(biases) != len(weights):
            raise ValueError("Need one weight matrix and bias vector per layer")
        for index, (W, b) in enumerate(zip(weights, biases)):
            expected = (layer_dims[index + 1], layer_dims[index])
            if W.shape != expected or b.shape != (expected[0],):
                raise ValueError(f"Layer {index} has shapes {W.shape}/{b.shape}, expected {expected}")
        for activation in (output_activation, hidden_activation):
            if activation not in ACTIVATIONS:
                raise ValueError(f"Unknown activation {activation}")
        self.layer_dims = layer_dims
        self.weights = [np.array(W, dtype=np.float64) for W in weights]
        self.biases = [np.array(b, dtype=np.float64) for b in biases]
        self.output_activation = output_activation
        self.hidden_activation = hidden_activation
        self.name = name
        self.version = 0

    @classmethod
    def initialize(
        cls,
        layer_dims: Sequence[int],
        rng: np.random.Generator,
        *,
        output_activation: str = "tanh",
        final_scale: float = 1.0,
        name: str = "mlp",
    ) -> "Mlp":
        """
        Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer; the last layer is scaled by `final_scale`.
        """
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, fan_out))
        weights[-1] *= final_scale
        biases[-1] *= final_scale
        return cls(layer_dims, weights, biases, output_activation=output_activation, name=name)

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """
        Parameter arrays in layer order [W0, b0, W1, b1, ...]; updates mutate them in place.
        """
        params: list[np.ndarray] = []
        for W, b in zip(self.weights, self.biases):
            params.extend((W, b))
        return params

    def activation(self, layer: int) -> str:
        return self.output_activation if layer == self.num_layers - 1 else self.hidden_activation

    def same_architecture(self, other: "Mlp") -> bool:
        return (
            self.layer_dims == other.layer_dims
            and self.output_activation == other.output_activation
            and self.hidden_activation == other.hidden_activation
        )

    def clone(self, name: str | None = None) -> "Mlp":
        return Mlp(
            self.layer_dims,
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            output_activation=self.output_activation,
            hidden_activation=self.hidden_activation,
            name=name or self.name,
        )

    def mark_updated(self) -> None:
        self.version += 1


@dataclass
class ActivationCache:
    inputs: list[np.ndarray]
    outputs: list[np.ndarray]
    single: bool
    version: int


def forward(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, ActivationCache]:
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x[None, :] if single else x
    if a.ndim != 2 or a.shape[1] != net.layer_dims[0]:
        raise ValueError(f"{net.name} expects inputs of width {net.layer_dims[0]}, got shape {x.shape}")
    inputs, outputs = [], []
    for layer, (W, b) in enumerate(zip(net.weights, net.biases)):
        inputs.append(a)
        z = a @ W.T + b
        a = np.tanh(z) if net.activation(layer) == "tanh" else z
        outputs.append(a)
    cache = ActivationCache(inputs=inputs, outputs=outputs, single=single, version=net.version)
    return (a[0] if single else a), cache


def backward(
    net: Mlp, cache: ActivationCache, upstream: np.ndarray
) -> tuple[list[np.ndarray], np.ndarray]:
    """
    Reverse-mode gradients of sum(output * upstream) with respect to every
    parameter (ordered as `net.parameters()`) and to the input.
    """
    if cache.version != net.version:
        raise RuntimeError(f"Stale activation cache for {net.name}: parameters changed since forward")
    delta = np.asarray(upstream, dtype=np.float64)
    if cache.single:
        delta = delta[None, :]
    if delta.shape != cache.outputs[-1].shape:
        raise ValueError(f"Upstream gradient shape {delta.shape} does not match output {cache.outputs[-1].shape}")
    grads: list[np.ndarray] = [None] * (2 * net.num_layers)  # type: ignore[list-item]
    for layer in reversed(range(net.num_layers)):
        if net.activation(layer) == "tanh":
            delta = delta * (1.0 - cache.outputs[layer] ** 2)
        grads[2 * layer] = delta.T @ cache.inputs[layer]
        grads[2 * layer + 1] = delta.sum(axis=0)
        delta = delta @ net.weights[layer]
    return grads, (delta[0] if cache.single else delta)


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON
    step: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: Mlp, learning_rate: float, **kwargs) -> "AdamState":
        params = net.parameters()
        return cls(
            learning_rate=learning_rate,
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            **kwargs,
        )


def check_finite(net: Mlp, arrays: Sequence[np.ndarray], what: str, step: int) -> None:
    for array in arrays:
        if not np.all(np.isfinite(array)):
            message = f"Non-finite {what} in {net.name} at update {step}"
            log.error(message)
            raise TrainingDiverged(message)


def optimizer_step(net: Mlp, grads: Sequence[np.ndarray], opt: AdamState) -> None:
    """
    One Adam descent step on `net` in place.
    """
    params = net.parameters()
    if len(grads) != len(params) or len(opt.first_moment) != len(params):
        raise ValueError(f"Gradient/optimizer state does not match {net.name}")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ValueError(f"Gradient shape {g.shape} does not match parameter {p.shape} in {net.name}")
    check_finite(net, grads, "gradient", opt.step + 1)
    opt.step += 1
    correction1 = 1.0 - opt.beta1**opt.step
    correction2 = 1.0 - opt.beta2**opt.step
    for p, g, m, v in zip(params, grads, opt.first_moment, opt.second_moment):
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * g * g
        p -= opt.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + opt.epsilon)
    check_finite(net, params, "parameter", opt.step)
    net.mark_updated()


def soft_update(target: Mlp, source: Mlp, eta: float) -> None:
    """
    target <- eta * source + (1 - eta) * target, parameter by parameter.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"Soft-update rate must lie in [0, 1], got {eta}")
    if not target.same_architecture(source):
        raise ValueError(f"Cannot blend {source.name} into {target.name}: architectures differ")
    for tgt, src in zip(target.parameters(), source.parameters()):
        tgt *= 1.0 - eta
        tgt += eta * src
    target.mark_updated()


def gradient_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def save_checkpoint(path: Path, net: Mlp) -> None:
    """
    Layout: magic, version byte, hidden/output activation bytes, layer count (<u8),
    layer dims (<u8), then every parameter as <f8 in layer order (W row-major, then b).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = CHECKPOINT_MAGIC + bytes(
        [
            CHECKPOINT_VERSION,
            ACTIVATIONS.index(net.hidden_activation),
            ACTIVATIONS.index(net.output_activation),
        ]
    )
    dims = np.array([len(net.layer_dims), *net.layer_dims], dtype="<u8")
    body = np.concatenate([p.ravel() for p in net.parameters()]).astype("<f8")
    with path.open("wb") as handle:
        handle.write(header)
        handle.write(dims.tobytes())
        handle.write(body.tobytes())


def load_checkpoint(path: Path, name: str | None = None) -> Mlp:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    offset = len(CHECKPOINT_MAGIC)
    if raw[:offset] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path} is not a network checkpoint")
    if len(raw) < offset + 3 + 8:
        raise ValueError(f"{path} is truncated: no layer header")
    version, hidden_code, output_code = raw[offset], raw[offset + 1], raw[offset + 2]
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"Unsupported checkpoint version {version} in {path}")
    if hidden_code >= len(ACTIVATIONS) or output_code >= len(ACTIVATIONS):
        raise ValueError(f"Unknown activation code in {path}")
    offset += 3
    (count,) = np.frombuffer(raw[offset : offset + 8], dtype="<u8")
    offset += 8
    if count < 2 or len(raw) < offset + 8 * int(count):
        raise ValueError(f"{path} is truncated: expected {int(count)} layer dims")
    dims = [int(d) for d in np.frombuffer(raw[offset : offset + 8 * int(count)], dtype="<u8")]
    offset += 8 * int(count)
    values = np.frombuffer(raw[offset:], dtype="<f8").astype(np.float64)
    expected = sum(o * i + o for i, o in zip(dims[:-1], dims[1:]))
    if values.size != expected:
        raise ValueError(f"{path} holds {values.size} parameters, expected {expected}")
    weights, biases = [], []
    cursor = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(values[cursor : cursor + fan_out * fan_in].reshape(fan_out, fan_in).copy())
        cursor += fan_out * fan_in
        biases.append(values[cursor : cursor + fan_out].copy())
        cursor += fan_out
    return Mlp(
        dims,
        weights,
        biases,
        hidden_activation=ACTIVATIONS[hidden_code],
        output_activation=ACTIVATIONS[output_code],
        name=name or path.stem,
    )
