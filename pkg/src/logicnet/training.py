"""Backpropagation and the perceptron rule, from scratch.

Backpropagation minimises the summed half squared error with full-batch
gradient descent. Initial weights and biases are drawn uniformly from
``[-init_scale, init_scale]`` by numpy's PCG64 generator seeded with
``TrainSpec.seed``, layer by layer (weights, then biases), so a spec fully
determines the run.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .formula import TruthTable
from .network import Layer, Network, Sigmoid, Step, forward, sigmoid

RNG_ALGORITHM = "numpy.random.PCG64"
DIVERGENCE_LIMIT = 1e6


class TrainingError(ValueError):
    pass


class TrainingDiverged(RuntimeError):
    def __init__(self, message: str, report: "TrainReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray
    input_names: Tuple[str, ...] = ()
    target_names: Tuple[str, ...] = ("y",)

    def __post_init__(self):
        x = np.array(self.inputs, dtype=np.float64)
        t = np.array(self.targets, dtype=np.float64)
        if t.ndim == 1:
            t = t[:, None]
        if x.ndim != 2 or t.ndim != 2 or len(x) != len(t) or len(x) == 0:
            raise TrainingError(f"inconsistent dataset shapes {x.shape} and {t.shape}")
        x.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", t)
        names = tuple(self.input_names) or tuple(f"x{i + 1}" for i in range(x.shape[1]))
        if len(names) != x.shape[1]:
            raise TrainingError("input_names does not match input width")
        object.__setattr__(self, "input_names", names)
        tnames = tuple(self.target_names)
        if len(tnames) != t.shape[1]:
            tnames = tuple(f"y{i + 1}" for i in range(t.shape[1]))
        object.__setattr__(self, "target_names", tnames)

    def __len__(self):
        return len(self.inputs)

    @classmethod
    def from_truth_table(cls, table: TruthTable) -> "Dataset":
        return cls(table.inputs, table.outputs, table.variables)

    @classmethod
    def from_csv(cls, text: str) -> "Dataset":
        """Header row of variable names ending in ``y``, then rows of bits."""
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
        if len(rows) < 2:
            raise TrainingError("truth-table CSV needs a header and at least one row")
        header = [h.strip() for h in rows[0]]
        if header[-1] != "y":
            raise TrainingError("last CSV column must be named 'y'")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:]])
        except ValueError as exc:
            raise TrainingError(f"bad CSV value: {exc}") from None
        if data.shape[1] != len(header):
            raise TrainingError("CSV rows do not match the header width")
        return cls(data[:, :-1], data[:, -1], tuple(header[:-1]))

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(self.input_names) + list(self.target_names))
        for x, t in zip(self.inputs, self.targets):
            w.writerow([_fmt_bit(v) for v in x] + [_fmt_bit(v) for v in t])
        return out.getvalue()


def _fmt_bit(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class TrainSpec:
    topology: Tuple[int, ...]
    learning_rate: float = 0.5
    max_epochs: int = 20000
    target_max_error: float = 0.4
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "topology", tuple(int(w) for w in self.topology))
        if len(self.topology) < 2 or min(self.topology) < 1:
            raise TrainingError(f"bad topology {self.topology}")
        if not self.learning_rate > 0 or not self.init_scale > 0:
            raise TrainingError("learning_rate and init_scale must be positive")
        if self.max_epochs < 0:
            raise TrainingError("max_epochs must be non-negative")
        if not 0 < self.target_max_error < 1:
            raise TrainingError("target_max_error must lie in (0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise TrainingError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class TrainReport:
    spec: TrainSpec
    network: Network
    epochs: int
    final_loss: float
    max_error: float
    example_errors: np.ndarray
    converged: bool
    loss_history: Tuple[float, ...]
    diverged: bool = False
    rng: str = RNG_ALGORITHM

    def to_document(self) -> dict:
        from .network import to_document
        return {
            "spec": {
                "topology": list(self.spec.topology),
                "learning_rate": self.spec.learning_rate,
                "max_epochs": self.spec.max_epochs,
                "target_max_error": self.spec.target_max_error,
                "seed": self.spec.seed,
                "init_scale": self.spec.init_scale,
            },
            "rng": self.rng,
            "epochs": self.epochs,
            "final_loss": self.final_loss,
            "max_error": self.max_error,
            "example_errors": self.example_errors.tolist(),
            "converged": self.converged,
            "diverged": self.diverged,
            "network": to_document(self.network),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    def loss_csv(self) -> str:
        lines = ["epoch,loss"]
        lines += [f"{i},{v!r}" for i, v in enumerate(self.loss_history)]
        return "\n".join(lines) + "\n"


def _check_dims(net: Network, data: Dataset):
    if data.inputs.shape[1] != len(net.inputs):
        raise TrainingError(f"dataset has {data.inputs.shape[1]} inputs, network expects {len(net.inputs)}")
    if data.targets.shape[1] != net.n_outputs:
        raise TrainingError(f"dataset has {data.targets.shape[1]} targets, network emits {net.n_outputs}")


def loss(net: Network, data: Dataset) -> float:
    """Sum over examples of half the squared output error."""
    _check_dims(net, data)
    out = forward(net, data.inputs).output
    return float(0.5 * np.sum((data.targets - out) ** 2))


def _backprop(weights, biases, x, t):
    """Loss, per-element residual and per-layer gradients for raw arrays."""
    acts = [x]
    for w, b in zip(weights, biases):
        acts.append(sigmoid(acts[-1] @ w.T + b))
    out = acts[-1]
    diff = out - t
    delta = diff * out * (1.0 - out)
    grads = [None] * len(weights)
    for k in range(len(weights) - 1, -1, -1):
        prev = acts[k]
        grads[k] = (delta.T @ prev, delta.sum(axis=0))
        if k:
            delta = (delta @ weights[k]) * prev * (1.0 - prev)
    return float(0.5 * np.sum(diff ** 2)), diff, grads


def gradient(net: Network, data: Dataset) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Exact gradient of :func:`loss` as ``[(dW, db), ...]`` per layer."""
    _check_dims(net, data)
    for k, layer in enumerate(net.layers):
        if not isinstance(layer.activation, Sigmoid):
            raise TrainingError(f"layer {k} is not differentiable ({layer.activation})")
    return _backprop([l.weights for l in net.layers], [l.biases for l in net.layers],
                     data.inputs, data.targets)[2]


def numerical_gradient(net: Network, data: Dataset, eps: float = 1e-4) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Central finite differences of :func:`loss`, same layout as :func:`gradient`."""
    _check_dims(net, data)
    weights = [l.weights.copy() for l in net.layers]
    biases = [l.biases.copy() for l in net.layers]

    def at():
        return _backprop(weights, biases, data.inputs, data.targets)[0]

    grads = []
    for k in range(len(weights)):
        pair = []
        for arr in (weights[k], biases[k]):
            g = np.zeros_like(arr)
            for idx in np.ndindex(arr.shape):
                keep = arr[idx]
                arr[idx] = keep + eps
                up = at()
                arr[idx] = keep - eps
                down = at()
                arr[idx] = keep
                g[idx] = (up - down) / (2 * eps)
            pair.append(g)
        grads.append(tuple(pair))
    return grads


def gradient_relative_error(a, b) -> float:
    """``|a - b| / max(|a|, |b|, 1e-12)`` over all flattened components."""
    fa = np.concatenate([np.ravel(x) for pair in a for x in pair])
    fb = np.concatenate([np.ravel(x) for pair in b for x in pair])
    scale = max(np.linalg.norm(fa), np.linalg.norm(fb), 1e-12)
    return float(np.linalg.norm(fa - fb) / scale)


def init_network(spec: TrainSpec, input_names: Sequence[str] = ()) -> Network:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    names = tuple(input_names) or tuple(f"x{i + 1}" for i in range(spec.topology[0]))
    layers = []
    s = spec.init_scale
    for fan_in, fan_out in zip(spec.topology[:-1], spec.topology[1:]):
        w = rng.uniform(-s, s, size=(fan_out, fan_in))
        b = rng.uniform(-s, s, size=fan_out)
        layers.append(Layer(w, b, Sigmoid()))
    return Network(names, tuple(layers))


def train_backprop(spec: TrainSpec, data: Dataset, net: Optional[Network] = None) -> TrainReport:
    """Full-batch gradient descent until every output is within
    ``target_max_error`` of its target or ``max_epochs`` updates have run.
    """
    if spec.topology[0] != data.inputs.shape[1] or spec.topology[-1] != data.targets.shape[1]:
        raise TrainingError(f"topology {spec.topology} does not fit the dataset")
    if net is None:
        net = init_network(spec, data.input_names)
    if tuple(net.widths) != spec.topology:
        raise TrainingError(f"network widths {net.widths} differ from topology {spec.topology}")
    weights = [layer.weights.copy() for layer in net.layers]
    biases = [layer.biases.copy() for layer in net.layers]
    history = []
    epochs = 0
    rate = spec.learning_rate

    def report(value, diff, converged, diverged=False):
        current = Network(net.inputs, tuple(Layer(w, b, Sigmoid()) for w, b in zip(weights, biases)))
        errors = np.abs(diff).max(axis=1) if np.all(np.isfinite(diff)) else np.full(len(diff), np.nan)
        return TrainReport(spec, current, epochs, value, float(np.max(errors)), errors,
                           converged, tuple(history), diverged=diverged)

    while True:
        value, diff, grads = _backprop(weights, biases, data.inputs, data.targets)
        history.append(value)
        if not np.isfinite(value) or value > DIVERGENCE_LIMIT:
            raise TrainingDiverged(f"loss became {value} after {epochs} epochs",
                                   report(value, diff, False, diverged=True))
        converged = bool(np.abs(diff).max() < spec.target_max_error)
        if converged or epochs >= spec.max_epochs:
            return report(value, diff, converged)
        for k, (dw, db) in enumerate(grads):
            weights[k] -= rate * dw
            biases[k] -= rate * db
        epochs += 1


# --------------------------------------------------------------------------
# Perceptron

@dataclass(frozen=True, eq=False)
class PerceptronReport:
    weights: np.ndarray
    bias: float
    epochs: int
    misclassified: int
    converged: bool
    history: Tuple[int, ...] = field(default=())
    input_names: Tuple[str, ...] = ()

    @property
    def network(self) -> Network:
        """The trained unit as a one-neuron step network."""
        return Network(self.input_names, (Layer(self.weights[None, :], [self.bias], Step(0.0)),))

    def to_document(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "bias": self.bias,
            "epochs": self.epochs,
            "misclassified": self.misclassified,
            "converged": self.converged,
            "history": list(self.history),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"


def _predict(w: np.ndarray, b: float, x: np.ndarray) -> np.ndarray:
    return (x @ w + b >= 0.0).astype(np.float64)


def train_perceptron(data: Dataset, rate: float = 1.0, max_epochs: int = 1000,
                     seed: Optional[int] = None) -> PerceptronReport:
    """Rosenblatt's error-correction rule on a single threshold unit.

    Weights and bias start at zero. Within an epoch examples are visited in
    order, or in a fresh seeded permutation each epoch when ``seed`` is
    given. ``history`` records misclassifications after every epoch.
    """
    if data.targets.shape[1] != 1:
        raise TrainingError("perceptron needs exactly one target column")
    if not rate > 0:
        raise TrainingError("rate must be positive")
    x = data.inputs
    t = data.targets[:, 0]
    w = np.zeros(x.shape[1])
    b = 0.0
    rng = None if seed is None else np.random.Generator(np.random.PCG64(seed))
    history = []
    wrong = int(np.sum(_predict(w, b, x) != t))
    epochs = 0
    while wrong and epochs < max_epochs:
        order = np.arange(len(x)) if rng is None else rng.permutation(len(x))
        for i in order:
            y = float(x[i] @ w + b >= 0.0)
            if y != t[i]:
                w = w + rate * (t[i] - y) * x[i]
                b = b + rate * (t[i] - y)
        epochs += 1
        wrong = int(np.sum(_predict(w, b, x) != t))
        history.append(wrong)
    return PerceptronReport(w, float(b), epochs, wrong, wrong == 0, tuple(history), data.input_names)
