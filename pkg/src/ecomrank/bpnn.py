"""Three-layer feedforward network trained by backpropagation.

Forward pass for one input vector x:

    s_j = sum_i W[j,i] * x_i - theta_j        hidden pre-activation
    h_j = tansig(s_j) = 2/(1+exp(-2*s_j)) - 1 hidden output
    r_k = sum_j V[k,j] * h_j - phi_k          output pre-activation
    y_k = act(r_k)                            logistic by default

Thresholds are subtracted, so their gradients carry the opposite sign
of the usual bias convention. Training is per-example gradient descent
on the squared error 0.5 * sum_k (y_k - t_k)^2.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ModelFormatError, TrainingDiverged

ACTIVATIONS = ("tansig", "logistic")


def tansig(z):
    """2/(1+exp(-2z)) - 1, the tanh-shaped transfer with range (-1, 1)."""
    return np.tanh(z)


def logistic(z):
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def _activate(kind: str, z):
    if kind == "tansig":
        return tansig(z)
    if kind == "logistic":
        return logistic(z)
    raise ValueError(f"unknown activation {kind!r}")


def _activation_slope(kind: str, out):
    """Derivative of the activation expressed through its own output."""
    if kind == "tansig":
        return 1.0 - out * out
    if kind == "logistic":
        return out * (1.0 - out)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass
class BpNetwork:
    input_size: int
    hidden_size: int
    output_size: int
    W: np.ndarray
    theta: np.ndarray
    V: np.ndarray
    phi: np.ndarray
    hidden_activation: str = "tansig"
    output_activation: str = "logistic"

    def copy(self) -> "BpNetwork":
        return BpNetwork(
            input_size=self.input_size,
            hidden_size=self.hidden_size,
            output_size=self.output_size,
            W=self.W.copy(),
            theta=self.theta.copy(),
            V=self.V.copy(),
            phi=self.phi.copy(),
            hidden_activation=self.hidden_activation,
            output_activation=self.output_activation,
        )


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass(frozen=True)
class ForwardTrace:
    s: np.ndarray
    h: np.ndarray
    r: np.ndarray


@dataclass(frozen=True)
class Gradients:
    W: np.ndarray
    theta: np.ndarray
    V: np.ndarray
    phi: np.ndarray


def init(
    seed: int,
    sizes: tuple[int, int, int] = (5, 4, 1),
    hidden_activation: str = "tansig",
    output_activation: str = "logistic",
) -> BpNetwork:
    """Fresh network with weights and thresholds uniform in [-0.5, 0.5]."""
    n_in, n_hidden, n_out = sizes
    if min(n_in, n_hidden, n_out) < 1:
        raise ValueError(f"layer sizes must be positive, got {sizes}")
    if hidden_activation not in ACTIVATIONS or output_activation not in ACTIVATIONS:
        raise ValueError("unknown activation kind")
    rng = np.random.default_rng(seed)
    return BpNetwork(
        input_size=n_in,
        hidden_size=n_hidden,
        output_size=n_out,
        W=rng.uniform(-0.5, 0.5, size=(n_hidden, n_in)),
        theta=rng.uniform(-0.5, 0.5, size=n_hidden),
        V=rng.uniform(-0.5, 0.5, size=(n_out, n_hidden)),
        phi=rng.uniform(-0.5, 0.5, size=n_out),
        hidden_activation=hidden_activation,
        output_activation=output_activation,
    )


def forward(net: BpNetwork, x) -> tuple[np.ndarray, ForwardTrace]:
    """Network output plus the layer trace (s, h, r) for the input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.input_size,):
        raise ValueError(f"expected input of shape ({net.input_size},), got {x.shape}")
    s = net.W @ x - net.theta
    h = _activate(net.hidden_activation, s)
    r = net.V @ h - net.phi
    y = _activate(net.output_activation, r)
    return y, ForwardTrace(s=s, h=h, r=r)


def predict_max(net: BpNetwork, x) -> int:
    """Index of the largest output; the degenerate K-way recognition path."""
    y, _ = forward(net, x)
    return int(np.argmax(y))


def gradients(net: BpNetwork, x, target) -> tuple[Gradients, float]:
    """Backpropagated gradients of the squared error for one example."""
    x = np.asarray(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    y, trace = forward(net, x)
    err = y - target
    delta_out = err * _activation_slope(net.output_activation, y)
    delta_hidden = (net.V.T @ delta_out) * _activation_slope(
        net.hidden_activation, trace.h
    )
    grads = Gradients(
        W=np.outer(delta_hidden, x),
        theta=-delta_hidden,
        V=np.outer(delta_out, trace.h),
        phi=-delta_out,
    )
    return grads, 0.5 * float(err @ err)


def _logistic_scalar(z: float) -> float:
    # guard math.exp's OverflowError; limits agree with the array version
    if z > 700.0:
        return 1.0
    if z < -700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


def _tansig_scalar(z: float) -> float:
    return math.tanh(z)


_SCALAR_ACT = {"tansig": _tansig_scalar, "logistic": _logistic_scalar}


def train(
    net: BpNetwork, examples, cfg: TrainConfig
) -> tuple[BpNetwork, list[float]]:
    """Per-example gradient descent; returns the trained copy and epoch losses.

    The update arithmetic is the scalar form of gradients(); a network
    this small trains several times faster on plain floats than on
    per-example numpy calls, and the two paths are test-pinned to agree.
    """
    examples = list(examples)
    if cfg.epochs > 0 and not examples:
        raise DataError("cannot train on an empty example list")
    if net.output_size != 1:
        raise ValueError("scalar-target training expects a single output neuron")
    out = net.copy()
    if not examples:
        return out, []
    n_in, n_hidden = out.input_size, out.hidden_size
    X = [[float(v) for v in ex.features.as_array()] for ex in examples]
    T = [float(ex.target) for ex in examples]
    W = [list(row) for row in out.W]
    theta = list(out.theta)
    V = list(out.V[0])
    phi = float(out.phi[0])
    act_h = _SCALAR_ACT[out.hidden_activation]
    act_o = _SCALAR_ACT[out.output_activation]
    tansig_hidden = out.hidden_activation == "tansig"
    tansig_out = out.output_activation == "tansig"

    rng = random.Random(cfg.seed)
    order = list(range(len(examples)))
    lr = cfg.learning_rate
    history: list[float] = []
    h = [0.0] * n_hidden
    for epoch in range(cfg.epochs):
        if cfg.shuffle:
            rng.shuffle(order)
        total = 0.0
        for idx in order:
            x = X[idx]
            for j in range(n_hidden):
                wj = W[j]
                s = -theta[j]
                for i in range(n_in):
                    s += wj[i] * x[i]
                h[j] = act_h(s)
            r = -phi
            for j in range(n_hidden):
                r += V[j] * h[j]
            y = act_o(r)
            err = y - T[idx]
            slope_out = (1.0 - y * y) if tansig_out else y * (1.0 - y)
            delta_out = err * slope_out
            phi += lr * delta_out
            for j in range(n_hidden):
                hj = h[j]
                slope_h = (1.0 - hj * hj) if tansig_hidden else hj * (1.0 - hj)
                delta_h = V[j] * delta_out * slope_h
                V[j] -= lr * delta_out * hj
                theta[j] += lr * delta_h
                wj = W[j]
                step = lr * delta_h
                for i in range(n_in):
                    wj[i] -= step * x[i]
            total += 0.5 * err * err
        mean_loss = total / len(examples)
        if not math.isfinite(mean_loss):
            raise TrainingDiverged(f"non-finite loss at epoch {epoch}")
        history.append(mean_loss)
    out.W = np.array(W, dtype=np.float64)
    out.theta = np.array(theta, dtype=np.float64)
    out.V = np.array([V], dtype=np.float64)
    out.phi = np.array([phi], dtype=np.float64)
    return out, history


def save_model(net: BpNetwork, path) -> None:
    payload = {
        "sizes": [net.input_size, net.hidden_size, net.output_size],
        "hidden_activation": net.hidden_activation,
        "output_activation": net.output_activation,
        "W": net.W.tolist(),
        "theta": net.theta.tolist(),
        "V": net.V.tolist(),
        "phi": net.phi.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_model(path) -> BpNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a valid model file: {exc}") from exc
    try:
        n_in, n_hidden, n_out = (int(v) for v in payload["sizes"])
        hidden_activation = payload["hidden_activation"]
        output_activation = payload["output_activation"]
        W = np.array(payload["W"], dtype=np.float64)
        theta = np.array(payload["theta"], dtype=np.float64)
        V = np.array(payload["V"], dtype=np.float64)
        phi = np.array(payload["phi"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: missing or malformed model fields") from exc
    if hidden_activation not in ACTIVATIONS or output_activation not in ACTIVATIONS:
        raise ModelFormatError(f"{path}: unknown activation kind")
    if W.shape != (n_hidden, n_in) or theta.shape != (n_hidden,):
        raise ModelFormatError(f"{path}: hidden-layer parameter shapes do not match sizes")
    if V.shape != (n_out, n_hidden) or phi.shape != (n_out,):
        raise ModelFormatError(f"{path}: output-layer parameter shapes do not match sizes")
    if not (np.isfinite(W).all() and np.isfinite(theta).all()
            and np.isfinite(V).all() and np.isfinite(phi).all()):
        raise ModelFormatError(f"{path}: non-finite parameters")
    return BpNetwork(
        input_size=n_in,
        hidden_size=n_hidden,
        output_size=n_out,
        W=W,
        theta=theta,
        V=V,
        phi=phi,
        hidden_activation=hidden_activation,
        output_activation=output_activation,
    )
