"""Minimal dense-network engine: forward, backprop for MSE, Adam, init.

Everything runs at double precision so gradient checks and serialization
round trips can be asserted tightly.  Layers hold an (out, in) weight
matrix, a bias vector and one of three activations (linear, relu, tanh).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ACTIVATIONS = ("linear", "relu", "tanh")


def _act(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    raise ValueError(f"unknown activation {kind!r}")


def _act_deriv(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "linear":
        return np.ones_like(z)
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    raise ValueError(f"unknown activation {kind!r}")


@dataclass(eq=False)
class DenseLayer:
    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)
    activation: str

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise ValueError(
                f"inconsistent layer shapes: weights {self.weights.shape}, "
                f"biases {self.biases.shape}"
            )
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise ValueError("layer parameters must be finite")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(eq=False)
class NetworkModel:
    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ValueError(
                    f"layer dimensions do not chain: {a.out_dim} -> {b.in_dim}"
                )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def parameters(self) -> list[np.ndarray]:
        """Flat parameter list: [W0, b0, W1, b1, ...] (live references)."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.biases)
        return out

    def set_parameters(self, params: list[np.ndarray]) -> None:
        if len(params) != 2 * len(self.layers):
            raise ValueError("parameter list length mismatch")
        for i, layer in enumerate(self.layers):
            w, b = params[2 * i], params[2 * i + 1]
            if w.shape != layer.weights.shape or b.shape != layer.biases.shape:
                raise ValueError("parameter shape mismatch")
            layer.weights = np.asarray(w, dtype=np.float64)
            layer.biases = np.asarray(b, dtype=np.float64)


@dataclass(eq=False)
class ForwardTrace:
    """Per-layer pre-activations and activations for one input batch.

    activations[0] is the input batch; activations[-1] is the network
    output; pre_activations[l] is W a + b for layer l.
    """

    pre_activations: list[np.ndarray]
    activations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def init_network(layer_spec: list[tuple[int, int, str]], seed: int) -> NetworkModel:
    """Build a network with Glorot-uniform weights and zero biases.

    `layer_spec` lists (in_dim, out_dim, activation) per layer; adjacent
    entries must chain.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for in_dim, out_dim, activation in layer_spec:
        limit = np.sqrt(6.0 / (in_dim + out_dim))
        w = rng.uniform(-limit, limit, size=(out_dim, in_dim))
        layers.append(DenseLayer(weights=w, biases=np.zeros(out_dim), activation=activation))
    return NetworkModel(layers=layers)


def forward(model: NetworkModel, batch: np.ndarray) -> ForwardTrace:
    """Run a batch through the network, recording every layer's z and a."""
    a = np.asarray(batch, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[1] != model.input_dim:
        raise ValueError(f"input dim {a.shape[1]} does not match model input {model.input_dim}")
    pre, acts = [], [a]
    for layer in model.layers:
        z = a @ layer.weights.T + layer.biases
        a = _act(layer.activation, z)
        pre.append(z)
        acts.append(a)
    return ForwardTrace(pre_activations=pre, activations=acts)


def mse_loss(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean over batch and dimensions of squared differences."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff))


def backward(
    model: NetworkModel, trace: ForwardTrace, target: np.ndarray
) -> list[np.ndarray]:
    """Gradients of mse_loss(output, target) w.r.t. every weight and bias.

    Returns the gradient list aligned with model.parameters().
    """
    target = np.asarray(target, dtype=np.float64)
    out = trace.output
    if target.shape != out.shape:
        raise ValueError(f"target shape {target.shape} does not match output {out.shape}")
    if len(trace.pre_activations) != len(model.layers):
        raise ValueError("trace depth does not match the model")
    n_batch, n_out = out.shape
    # dL/da for L = sum((a - t)^2) / (B * D)
    grad_a = 2.0 * (out - target) / (n_batch * n_out)
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(model.layers))
    for l in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[l]
        z = trace.pre_activations[l]
        if z.shape[1] != layer.out_dim:
            raise ValueError("stale trace: layer dimensions inconsistent")
        delta = grad_a * _act_deriv(layer.activation, z)
        grads[2 * l] = delta.T @ trace.activations[l]
        grads[2 * l + 1] = delta.sum(axis=0)
        grad_a = delta @ layer.weights
    return grads


@dataclass(eq=False)
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], lr: float = 1e-3, **kw) -> "AdamState":
        return cls(
            lr=lr,
            first_moment=[np.zeros_like(p) for p in params],
            second_moment=[np.zeros_like(p) for p in params],
            **kw,
        )


def adam_step(
    state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns new parameters and state.

    The input state is not mutated; moments are replaced functionally so a
    state can be checkpointed or replayed.
    """
    if not (len(params) == len(grads) == len(state.first_moment)):
        raise ValueError("parameter/gradient/state length mismatch")
    t = state.step_count + 1
    new_m, new_v, new_params = [], [], []
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if g.shape != p.shape:
            raise ValueError("gradient shape mismatch")
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon))
        new_m.append(m)
        new_v.append(v)
    new_state = AdamState(
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        epsilon=state.epsilon,
        step_count=t,
        first_moment=new_m,
        second_moment=new_v,
    )
    return new_params, new_state


SERIAL_FORMAT = "emolatent-network"
SERIAL_VERSION = 1


def model_to_dict(model: NetworkModel) -> dict:
    """JSON-ready dict; parameter arrays row-major, value-exact round trip."""
    return {
        "format": SERIAL_FORMAT,
        "version": SERIAL_VERSION,
        "layers": [
            {
                "in": layer.in_dim,
                "out": layer.out_dim,
                "activation": layer.activation,
                "weights": layer.weights.reshape(-1).tolist(),
                "biases": layer.biases.tolist(),
            }
            for layer in model.layers
        ],
    }


def model_from_dict(d: dict) -> NetworkModel:
    if d.get("format") != SERIAL_FORMAT:
        raise ValueError(f"not a serialized network: format {d.get('format')!r}")
    if d.get("version") != SERIAL_VERSION:
        raise ValueError(f"unsupported network version {d.get('version')!r}")
    layers = []
    for spec in d["layers"]:
        w = np.array(spec["weights"], dtype=np.float64).reshape(spec["out"], spec["in"])
        b = np.array(spec["biases"], dtype=np.float64)
        layers.append(DenseLayer(weights=w, biases=b, activation=spec["activation"]))
    return NetworkModel(layers=layers)


def save_model(model: NetworkModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path: str | Path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
