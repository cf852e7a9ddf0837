"""Layered dense feedforward networks with sigmoid or step units."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple, Union

import numpy as np

DOCUMENT_FORMAT = "logicnet.network"
DOCUMENT_VERSION = 1


class NetworkError(ValueError):
    pass


def sigmoid(x):
    """Logistic function, evaluated without overflow for large ``|x|``."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Sigmoid:
    def __call__(self, z):
        return sigmoid(z)

    def to_doc(self):
        return {"kind": "sigmoid"}


@dataclass(frozen=True)
class Step:
    """McCulloch-Pitts style unit: fires when the input reaches ``threshold``."""

    threshold: float = 0.0

    def __call__(self, z):
        return (np.asarray(z) >= self.threshold).astype(np.float64)

    def to_doc(self):
        return {"kind": "step", "threshold": float(self.threshold)}


Activation = Union[Sigmoid, Step]


def _frozen(a, ndim: int, what: str) -> np.ndarray:
    try:
        arr = np.array(a, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise NetworkError(f"{what}: not numeric ({exc})") from None
    if arr.ndim != ndim:
        raise NetworkError(f"{what}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NetworkError(f"{what}: non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Layer:
    weights: np.ndarray
    biases: np.ndarray
    activation: Activation = field(default_factory=Sigmoid)

    def __post_init__(self):
        w = _frozen(self.weights, 2, "weights")
        b = _frozen(self.biases, 1, "biases")
        if w.shape[0] == 0:
            raise NetworkError("layer has no neurons")
        if b.shape[0] != w.shape[0]:
            raise NetworkError(f"bias length {b.shape[0]} != weight rows {w.shape[0]}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @classmethod
    def trusted(cls, weights: np.ndarray, biases: np.ndarray, activation: Activation) -> "Layer":
        """Skip validation. Arrays must be finite, read-only float64 of matching shape."""
        layer = object.__new__(cls)
        layer.__dict__.update(weights=weights, biases=biases, activation=activation)
        return layer

    @property
    def width(self) -> int:
        return self.weights.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Layer):
            return NotImplemented
        return (self.activation == other.activation
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.biases, other.biases))


@dataclass(frozen=True, eq=True)
class Network:
    inputs: Tuple[str, ...]
    layers: Tuple[Layer, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise NetworkError("network needs at least one layer")
        width = len(self.inputs)
        for k, layer in enumerate(self.layers):
            if layer.weights.shape[1] != width:
                raise NetworkError(
                    f"layer {k}: expects {layer.weights.shape[1]} inputs, previous width is {width}")
            width = layer.width

    @classmethod
    def trusted(cls, inputs: Tuple[str, ...], layers: Tuple[Layer, ...]) -> "Network":
        """Skip the dimension checks; for builders that guarantee them."""
        net = object.__new__(cls)
        net.__dict__.update(inputs=inputs, layers=layers)
        return net

    @property
    def widths(self) -> Tuple[int, ...]:
        return (len(self.inputs),) + tuple(layer.width for layer in self.layers)

    @property
    def n_outputs(self) -> int:
        return self.layers[-1].width


@dataclass(frozen=True)
class Trace:
    """Per-layer pre-activations ``z`` and activations ``a``.

    Arrays are shaped ``(width,)`` for a single input vector or
    ``(batch, width)`` for a batch.
    """

    inputs: np.ndarray
    pre_activations: Tuple[np.ndarray, ...]
    activations: Tuple[np.ndarray, ...]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def forward(net: Network, x, binarize_hidden: bool = False, cut: float = 0.5) -> Trace:
    """Propagate ``x`` (one vector or a batch of rows) through ``net``.

    With ``binarize_hidden`` every hidden layer's activations are rounded at
    ``cut`` before feeding the next layer; the recorded hidden activations
    are the rounded ones, the final layer is left raw.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != len(net.inputs):
        raise NetworkError(f"input shape {x.shape} does not match {len(net.inputs)} inputs")
    if not np.all(np.isfinite(x)):
        raise NetworkError("non-finite input")
    zs, acts = [], []
    a = x
    last = len(net.layers) - 1
    for k, layer in enumerate(net.layers):
        z = a @ layer.weights.T + layer.biases
        a = layer.activation(z)
        if binarize_hidden and k != last:
            a = (a >= cut).astype(np.float64)
        zs.append(z)
        acts.append(a)
    return Trace(x, tuple(zs), tuple(acts))


def forward_stacked(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], x,
                    binarize_hidden: bool = False, cut: float = 0.5) -> np.ndarray:
    """Sigmoid forward pass for ``G`` same-shaped networks at once.

    ``weights[k]`` is ``(G, rows, cols)`` and ``biases[k]`` is ``(G, rows)``;
    ``x`` is ``(R, n_inputs)``. Returns final activations shaped
    ``(G, R, n_outputs)``.
    """
    a = np.asarray(x, dtype=np.float64)[None, :, :]
    last = len(weights) - 1
    for k, (w, b) in enumerate(zip(weights, biases)):
        z = a @ np.swapaxes(w, 1, 2) + b[:, None, :]
        a = sigmoid(z)
        if binarize_hidden and k != last:
            a = (a >= cut).astype(np.float64)
    return a


def binarize(trace_or_values, cut: float = 0.5) -> np.ndarray:
    """Round outputs to bits; values equal to ``cut`` map to 1."""
    values = trace_or_values.output if isinstance(trace_or_values, Trace) else trace_or_values
    return (np.asarray(values) >= cut).astype(np.uint8)


# --------------------------------------------------------------------------
# Document format
#
# {
#   "format": "logicnet.network", "version": 1,
#   "inputs": ["p", "q"],
#   "layers": [
#     {"weights": [[-10.0, 0.0], [0.0, 20.0]], "biases": [5.0, -10.0],
#      "activation": {"kind": "sigmoid"}},
#     ...
#   ]
# }
#
# Floats are written with Python's shortest round-trip repr, so every
# float64 survives a round trip bit for bit.

def activation_from_doc(doc) -> Activation:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise NetworkError(f"bad activation entry {doc!r}")
    if doc["kind"] == "sigmoid":
        return Sigmoid()
    if doc["kind"] == "step":
        return Step(float(doc.get("threshold", 0.0)))
    raise NetworkError(f"unknown activation kind {doc['kind']!r}")


def to_document(net: Network) -> dict:
    return {
        "format": DOCUMENT_FORMAT,
        "version": DOCUMENT_VERSION,
        "inputs": list(net.inputs),
        "layers": [
            {"weights": layer.weights.tolist(),
             "biases": layer.biases.tolist(),
             "activation": layer.activation.to_doc()}
            for layer in net.layers
        ],
    }


def from_document(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise NetworkError("document must be an object")
    if doc.get("format", DOCUMENT_FORMAT) != DOCUMENT_FORMAT:
        raise NetworkError(f"unexpected format {doc.get('format')!r}")
    if "inputs" not in doc or "layers" not in doc:
        raise NetworkError("document needs 'inputs' and 'layers'")
    inputs = doc["inputs"]
    if not isinstance(inputs, list) or not all(isinstance(s, str) for s in inputs):
        raise NetworkError("'inputs' must be a list of names")
    layers = []
    for k, entry in enumerate(doc["layers"]):
        try:
            weights = entry["weights"]
            biases = entry["biases"]
        except (KeyError, TypeError):
            raise NetworkError(f"layer {k}: missing 'weights' or 'biases'") from None
        if not weights:
            raise NetworkError(f"layer {k}: empty layer")
        activation = activation_from_doc(entry.get("activation", {"kind": "sigmoid"}))
        layers.append(Layer(weights, biases, activation))
    return Network(tuple(inputs), tuple(layers))


def serialize(net: Network) -> str:
    return json.dumps(to_document(net), indent=2) + "\n"


def deserialize(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"malformed network document: {exc}") from None
    return from_document(doc)


def step_network(inputs: Sequence[str], layers: List[Tuple[Sequence, Sequence]],
                 threshold: float = 0.0) -> Network:
    """Convenience builder for all-step networks, e.g. hand-wired threshold gates."""
    act = Step(threshold)
    return Network(tuple(inputs), tuple(Layer(w, b, act) for w, b in layers))


def count_neurons(net: Network) -> int:
    return sum(layer.width for layer in net.layers)


def layer_input(trace: Trace, k: int) -> np.ndarray:
    return trace.inputs if k == 0 else trace.activations[k - 1]


__all__ = [
    "Activation", "Layer", "Network", "NetworkError", "Sigmoid", "Step", "Trace",
    "binarize", "count_neurons", "deserialize", "forward", "forward_stacked", "from_document",
    "layer_input", "serialize", "sigmoid", "step_network", "to_document",
]
