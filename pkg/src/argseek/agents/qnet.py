"""Small fully connected Q-network with hand-rolled backprop.

Hidden layers use tanh, the output layer is linear. The loss is the mean
squared error between the Q-value of the taken action and its target; only
that one output unit per sample receives error signal. Parameters update
with Adam. Model files are plain text with 17-significant-digit values so a
save/load round trip is bit exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class QNetworkParams:
    """Weights and biases per layer; ``weights[i]`` has shape (out, in)."""

    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.layer_dims) < 2:
            raise ValueError("need at least input and output dimensions")
        expected = list(zip(self.layer_dims[1:], self.layer_dims[:-1]))
        got_w = [w.shape for w in self.weights]
        got_b = [b.shape for b in self.biases]
        if got_w != expected or got_b != [(d,) for d, _ in expected]:
            raise ValueError("parameter shapes do not match layer_dims")
        for arr in self.weights + self.biases:
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite parameter values")


def init_qnet(layer_dims: tuple[int, ...], rng: np.random.Generator) -> QNetworkParams:
    """Symmetric uniform init scaled by 1/sqrt(fan_in), for weights and biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return QNetworkParams(tuple(layer_dims), weights, biases)


def copy_params(params: QNetworkParams) -> QNetworkParams:
    return QNetworkParams(
        params.layer_dims,
        [w.copy() for w in params.weights],
        [b.copy() for b in params.biases],
    )


def mlp_forward_batch(params: QNetworkParams, x: np.ndarray) -> np.ndarray:
    """Q-values for a batch of feature rows, shape (B, n_actions)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.layer_dims[0]:
        raise ValueError(
            f"expected batch of dim-{params.layer_dims[0]} rows, got {x.shape}"
        )
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.T + b
        if i != last:
            h = np.tanh(h)
    return h


def mlp_forward(params: QNetworkParams, x: np.ndarray) -> np.ndarray:
    """Q-values for a single feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a single feature vector")
    return mlp_forward_batch(params, x[None, :])[0]


def mlp_gradients(
    params: QNetworkParams,
    x: np.ndarray,
    actions: np.ndarray,
    targets: np.ndarray,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Loss and exact gradients of mean (Q(x)[a] - target)^2 over the batch.

    Returns (loss, weight_grads, bias_grads) ordered like the parameters.
    """
    x = np.asarray(x, dtype=np.float64)
    actions = np.asarray(actions, dtype=np.int64)
    targets = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or len(actions) != len(x) or len(targets) != len(x) or not len(x):
        raise ValueError("batch arrays must be non-empty with matching lengths")

    # Forward pass keeping every activation for backprop.
    acts = [x]
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.T + b
        if i != last:
            h = np.tanh(h)
        acts.append(h)

    q = acts[-1]
    batch = len(x)
    picked = q[np.arange(batch), actions]
    err = picked - targets
    loss = float(np.mean(err**2))

    # Only the taken action's output unit carries error signal.
    delta = np.zeros_like(q)
    delta[np.arange(batch), actions] = 2.0 * err / batch

    w_grads: list[np.ndarray] = [np.empty(0)] * len(params.weights)
    b_grads: list[np.ndarray] = [np.empty(0)] * len(params.biases)
    for i in range(last, -1, -1):
        w_grads[i] = delta.T @ acts[i]
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i]) * (1.0 - acts[i] ** 2)

    for g in w_grads + b_grads:
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient values")
    return loss, w_grads, b_grads


@dataclass
class AdamState:
    """First and second moment accumulators, one pair per parameter array."""

    m_w: list[np.ndarray] = field(default_factory=list)
    v_w: list[np.ndarray] = field(default_factory=list)
    m_b: list[np.ndarray] = field(default_factory=list)
    v_b: list[np.ndarray] = field(default_factory=list)
    t: int = 0


def adam_update(
    params: QNetworkParams,
    w_grads: list[np.ndarray],
    b_grads: list[np.ndarray],
    state: AdamState,
    learning_rate: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One in-place Adam step with bias-corrected moments."""
    if not state.m_w:
        state.m_w = [np.zeros_like(w) for w in params.weights]
        state.v_w = [np.zeros_like(w) for w in params.weights]
        state.m_b = [np.zeros_like(b) for b in params.biases]
        state.v_b = [np.zeros_like(b) for b in params.biases]
    state.t += 1
    c1 = 1.0 - beta1**state.t
    c2 = 1.0 - beta2**state.t
    for tgt, grads, m, v in (
        (params.weights, w_grads, state.m_w, state.v_w),
        (params.biases, b_grads, state.m_b, state.v_b),
    ):
        for i, g in enumerate(grads):
            m[i] = beta1 * m[i] + (1.0 - beta1) * g
            v[i] = beta2 * v[i] + (1.0 - beta2) * g**2
            tgt[i] -= learning_rate * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)


def save_qnet(params: QNetworkParams, path: str | Path) -> None:
    """Text format: a dims header, then one value per line in layer order."""
    lines = ["dims " + " ".join(str(d) for d in params.layer_dims)]
    for w, b in zip(params.weights, params.biases):
        lines.extend("%.17g" % v for v in w.ravel())
        lines.extend("%.17g" % v for v in b)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_qnet(path: str | Path) -> QNetworkParams:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("dims "):
        raise ValueError(f"{path}: not a model file (missing dims header)")
    dims = tuple(int(t) for t in lines[0].split()[1:])
    values = np.array([float(t) for t in lines[1:] if t.strip()], dtype=np.float64)
    weights, biases = [], []
    pos = 0
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(values[pos : pos + fan_out * fan_in].reshape(fan_out, fan_in))
        pos += fan_out * fan_in
        biases.append(values[pos : pos + fan_out])
        pos += fan_out
    if pos != len(values):
        raise ValueError(f"{path}: parameter count does not match dims header")
    return QNetworkParams(dims, weights, biases)
