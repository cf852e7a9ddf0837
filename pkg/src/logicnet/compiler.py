"""Lower propositional formulas to layered sigmoid networks.

Every connective becomes one sigmoid neuron built from a fixed gate
template. Implication is rewritten as ``!x | y`` first, ``<>`` is dropped,
and each neuron is placed in the layer equal to the height of its subtree.
Shorter subtrees are carried forward with pass-through neurons so that
every connection spans exactly one layer.

For ``p -> q`` this reproduces the classic three-neuron construction::

    layer 1:  a1 = σ(5 - 10 p)        (NOT p)
              a2 = σ(-10 + 20 q)      (PASS q)
    layer 2:  h  = σ(-5 + 10 a1 + 10 a2)
"""

from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import formula as fm
from .formula import And, Formula, Implies, Not, Or, Possibly, Var
from .network import Layer, Network, Sigmoid, binarize, forward, forward_stacked

MAX_VERIFY_VARIABLES = 16


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    bias: float
    weight: float


# Bias/weight templates. On {0,1} inputs every pre-activation is at least 5
# away from 0.
NOT = Gate(5.0, -10.0)
PASS = Gate(-10.0, 20.0)


def or_gate(k: int) -> Gate:
    return Gate(-5.0, 10.0)


def and_gate(k: int) -> Gate:
    return Gate(5.0 - 10.0 * k, 10.0)


GATES = {"NOT": NOT, "PASS": PASS, "OR": or_gate, "AND": and_gate}


def normalize(f: Formula) -> Formula:
    """Drop ``<>`` and rewrite ``x -> y`` as ``!x | y``."""
    if isinstance(f, Var):
        return f
    if isinstance(f, Possibly):
        return normalize(f.operand)
    if isinstance(f, Not):
        return Not(normalize(f.operand))
    if isinstance(f, Implies):
        return Or(Not(normalize(f.left)), normalize(f.right))
    return type(f)(normalize(f.left), normalize(f.right))


Rows = Tuple[Tuple[float, ...], ...]


@dataclass(frozen=True, eq=False)
class _Block:
    """Compiled subformula.

    ``layers[k]`` is ``(weight rows, biases)`` for network layer ``k + 1``,
    kept as plain tuples until the network is assembled. The first layer
    reads the shared input vector; deeper layers only read the block's own
    previous layer. The top layer holds exactly one neuron, the
    subformula's output. A bare variable is a block of height 0 whose
    output is the input column ``column``.
    """

    height: int
    layers: Tuple[Tuple[Rows, Tuple[float, ...]], ...]
    column: int = -1
    padding: int = 0


def _pass_layer(width: int, col: int):
    row = [0.0] * width
    row[col] = PASS.weight
    return (tuple(row),), (PASS.bias,)


_PASS_1 = _pass_layer(1, 0)


def _carry(block: _Block, height: int, n_inputs: int) -> _Block:
    """Extend ``block`` with pass-through neurons until it reaches ``height``."""
    if block.height >= height:
        return block
    layers = list(block.layers)
    if block.height == 0:
        layers.append(_pass_layer(n_inputs, block.column))
    while len(layers) < height:
        layers.append(_PASS_1)
    return _Block(height, tuple(layers), padding=block.padding + height - block.height)


def _gate(gate: Gate, kids: Tuple[_Block, ...], n_inputs: int) -> _Block:
    height = 1 + max(k.height for k in kids)
    if height == 1:
        top = [0.0] * n_inputs
        for k in kids:
            top[k.column] += gate.weight
        return _Block(1, (((tuple(top),), (gate.bias,)),))
    kids = [_carry(k, height - 1, n_inputs) for k in kids]
    # first layer: children share the input vector, so rows stack
    rows: Rows = ()
    biases: Tuple[float, ...] = ()
    for k in kids:
        rows += k.layers[0][0]
        biases += k.layers[0][1]
    layers = [(rows, biases)]
    # deeper layers: each child only sees itself, so blocks go on the diagonal
    for depth in range(1, height - 1):
        widths = [len(k.layers[depth - 1][1]) for k in kids]
        total = sum(widths)
        rows, biases, offset = (), (), 0
        for k, width in zip(kids, widths):
            before = (0.0,) * offset
            after = (0.0,) * (total - offset - width)
            rows += tuple(before + r + after for r in k.layers[depth][0])
            biases += k.layers[depth][1]
            offset += width
        layers.append((rows, biases))
    # every carried child ends in a single-neuron layer
    layers.append((((gate.weight,) * len(kids),), (gate.bias,)))
    return _Block(height, tuple(layers), padding=sum(k.padding for k in kids))


@lru_cache(maxsize=1 << 16)
def _block(f: Formula, inputs: Tuple[str, ...]) -> _Block:
    """Compile ``f`` with ``<>`` skipped and ``x -> y`` emitted as ``!x | y``."""
    kind = type(f)
    n = len(inputs)
    if kind is Var:
        return _Block(0, (), column=inputs.index(f.name))
    if kind is Possibly:
        return _block(f.operand, inputs)
    if kind is Not:
        return _gate(NOT, (_block(f.operand, inputs),), n)
    if kind is Implies:
        return _gate(_OR2, (_block(Not(f.left), inputs), _block(f.right, inputs)), n)
    if kind is And:
        return _gate(_AND2, (_block(f.left, inputs), _block(f.right, inputs)), n)
    if kind is Or:
        return _gate(_OR2, (_block(f.left, inputs), _block(f.right, inputs)), n)
    raise CompileError(f"not a formula node: {f!r}")


_OR2 = or_gate(2)
_AND2 = and_gate(2)
_SIGMOID = Sigmoid()


def _root_block(f: Formula, inputs: Tuple[str, ...]) -> _Block:
    block = _block(f, inputs)
    return _carry(block, 1, len(inputs)) if block.height == 0 else block


def compile_formula(f: Formula, inputs=None) -> Network:
    """Build a sigmoid network whose rounded output is ``f``'s truth value.

    ``inputs`` fixes the input order; it defaults to the formula's
    variables sorted by name and may include unused names.
    """
    names = f.free_variables
    if not names:
        raise CompileError("formula has no variables")
    if inputs is None:
        inputs = tuple(sorted(names))
    else:
        inputs = tuple(inputs)
        if not names.issubset(inputs):
            raise CompileError(f"inputs do not cover {sorted(names - set(inputs))}")
    block = _root_block(f, inputs)
    layers = []
    for rows, biases in block.layers:
        w = np.array(rows)
        b = np.array(biases)
        w.flags.writeable = False
        b.flags.writeable = False
        layers.append(Layer.trusted(w, b, _SIGMOID))
    return Network.trusted(inputs, tuple(layers))


def padding_count(f: Formula) -> int:
    """Pass-through neurons added to align subformulas of different heights."""
    return _root_block(f, fm.variables(f)).padding


def compile_incompatibility_probe(f: Formula) -> Network:
    """Network for ``x & !y`` given the implication ``x -> y`` over atoms.

    It fires exactly on the rows where the implication is false.
    """
    if not isinstance(f, Implies):
        raise CompileError("incompatibility probe needs an implication")
    if not (isinstance(f.left, Var) and isinstance(f.right, Var)):
        raise CompileError("incompatibility probe needs atomic antecedent and consequent")
    return compile_formula(And(f.left, Not(f.right)), inputs=fm.variables(f))


# --------------------------------------------------------------------------
# Verification

@dataclass(frozen=True)
class VerificationRow:
    inputs: Tuple[int, ...]
    expected: int
    hidden: Tuple[Tuple[int, ...], ...]
    output: float
    output_continuous: float

    @property
    def bit(self) -> int:
        return int(self.output >= 0.5)

    @property
    def bit_continuous(self) -> int:
        return int(self.output_continuous >= 0.5)

    @property
    def agrees(self) -> bool:
        return self.bit == self.expected and self.bit_continuous == self.expected


@dataclass(frozen=True)
class VerificationReport:
    """Row-by-row comparison of a compiled network with brute-force evaluation.

    ``output`` is computed with each hidden layer rounded to bits, which is
    how the gate templates are meant to be read; ``output_continuous``
    feeds raw sigmoid values through. ``max_distance`` and
    ``max_distance_continuous`` are the worst gaps between those outputs
    and the target bit.
    """

    formula: str
    variables: Tuple[str, ...]
    rows: Tuple[VerificationRow, ...]
    network: Network

    @property
    def agreeing(self) -> int:
        return sum(r.agrees for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.agreeing == len(self.rows)

    @property
    def max_distance(self) -> float:
        return max(abs(r.output - r.expected) for r in self.rows)

    @property
    def max_distance_continuous(self) -> float:
        return max(abs(r.output_continuous - r.expected) for r in self.rows)

    def to_document(self) -> dict:
        return {
            "formula": self.formula,
            "variables": list(self.variables),
            "passed": self.passed,
            "rows_total": len(self.rows),
            "rows_agreeing": self.agreeing,
            "max_distance": self.max_distance,
            "max_distance_continuous": self.max_distance_continuous,
            "rows": [
                {"inputs": list(r.inputs), "expected": r.expected, "bit": r.bit,
                 "hidden": [list(h) for h in r.hidden], "output": r.output,
                 "output_continuous": r.output_continuous}
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2) + "\n"

    def activation_table(self, symbols: str = "10") -> str:
        """Inputs, rounded hidden activations and output bit, one row per line."""
        one, zero = symbols
        hidden_names = []
        for k, layer in enumerate(self.network.layers[:-1], start=2):
            hidden_names += [f"a{i + 1}[{k}]" for i in range(layer.width)]
        header = list(self.variables) + hidden_names + ["h(x)", "raw"]
        lines = ["\t".join(header)]
        for r in self.rows:
            bits = list(r.inputs) + [b for h in r.hidden for b in h] + [r.bit]
            cells = [one if b else zero for b in bits] + [f"{r.output:.6g}"]
            lines.append("\t".join(cells))
        return "\n".join(lines) + "\n"


def verify(f: Formula, net: Network = None) -> VerificationReport:
    """Check the compiled network of ``f`` against :func:`formula.truth_table`."""
    names = fm.variables(f)
    if len(names) > MAX_VERIFY_VARIABLES:
        raise fm.TooManyVariables(
            f"{len(names)} variables exceeds the verification limit of {MAX_VERIFY_VARIABLES}")
    if net is None:
        net = compile_formula(f)
    table = fm.truth_table(f, net.inputs)
    x = table.inputs.astype(np.float64)
    gated = forward(net, x, binarize_hidden=True)
    continuous = forward(net, x)
    hidden = [binarize(a) for a in gated.activations[:-1]]
    rows = []
    for i, (bits, expected) in enumerate(table.rows()):
        rows.append(VerificationRow(
            inputs=bits,
            expected=expected,
            hidden=tuple(tuple(int(v) for v in h[i]) for h in hidden),
            output=float(gated.output[i, 0]),
            output_continuous=float(continuous.output[i, 0]),
        ))
    return VerificationReport(fm.to_string(f), table.variables, tuple(rows), net)


def _stack_rows(blocks, k):
    return np.array([b.layers[k][0] for b in blocks]), np.array([b.layers[k][1] for b in blocks])


def compile_batch(formulas, inputs, batch: int = 1 << 14):
    """Compile many formulas at once, grouped by network architecture.

    Yields ``(members, weights, biases)`` where ``weights[k]`` is
    ``(len(members), rows, cols)`` and ``biases[k]`` is ``(len(members), rows)``.
    Slice ``i`` of every array equals the corresponding layer of
    ``compile_formula(members[i], inputs)``.

    Child subformulas are compiled once through the same cache as
    :func:`compile_formula`; the root gate of every binary formula is then
    assembled for a whole group in a few array operations.
    """
    inputs = tuple(inputs)
    n_inputs = len(inputs)
    child_index = {}   # (child formula, height) -> (signature, slot)
    child_arrays = {}  # signature -> list of per-layer (weights, biases)
    pending = {}       # (gate, sig_a, sig_b) -> (members, slots_a, slots_b)
    singles = {}       # signature -> (members, blocks)
    count = 0

    def child(f, height):
        key = (f, height)
        try:
            return child_index[key]
        except KeyError:
            pass
        block = _carry(_block(f, inputs), height, n_inputs)
        sig = tuple(len(b) for _, b in block.layers)
        arrays = child_arrays.setdefault(sig, [])
        arrays.append(block)
        child_index[key] = (sig, len(arrays) - 1)
        return child_index[key]

    def flush():
        stacked = {}
        for sig, blocks in child_arrays.items():
            stacked[sig] = [_stack_rows(blocks, k) for k in range(len(sig))]
        for (gate, sig_a, sig_b), (members, slots_a, slots_b) in pending.items():
            ia = np.array(slots_a)
            ib = np.array(slots_b)
            g = len(members)
            a_layers = [(w[ia], b[ia]) for w, b in stacked[sig_a]]
            b_layers = [(w[ib], b[ib]) for w, b in stacked[sig_b]]
            weights = [np.concatenate([a_layers[0][0], b_layers[0][0]], axis=1)]
            biases = [np.concatenate([a_layers[0][1], b_layers[0][1]], axis=1)]
            for k in range(1, len(sig_a)):
                (wa, ba), (wb, bb) = a_layers[k], b_layers[k]
                ra, ca = wa.shape[1:]
                rb, cb = wb.shape[1:]
                w = np.zeros((g, ra + rb, ca + cb))
                w[:, :ra, :ca] = wa
                w[:, ra:, ca:] = wb
                weights.append(w)
                biases.append(np.concatenate([ba, bb], axis=1))
            weights.append(np.full((g, 1, 2), gate.weight))
            biases.append(np.full((g, 1), gate.bias))
            yield members, weights, biases
        for sig, (members, blocks) in singles.items():
            layers = [_stack_rows(blocks, k) for k in range(len(sig))]
            yield members, [w for w, _ in layers], [b for _, b in layers]
        pending.clear()
        singles.clear()

    for f in formulas:
        names = f.free_variables
        if not names:
            raise CompileError("formula has no variables")
        if not names.issubset(inputs):
            raise CompileError(f"inputs do not cover {sorted(names - set(inputs))}")
        kind = type(f)
        kids = None
        if kind is And or kind is Or or kind is Implies:
            left = Not(f.left) if kind is Implies else f.left
            gate = _AND2 if kind is And else _OR2
            ha = _block(left, inputs).height
            hb = _block(f.right, inputs).height
            height = 1 + max(ha, hb)
            if height > 1:
                kids = (child(left, height - 1), child(f.right, height - 1))
        if kids is None:
            block = _root_block(f, inputs)
            sig = tuple(len(b) for _, b in block.layers)
            members, blocks = singles.setdefault(sig, ([], []))
            members.append(f)
            blocks.append(block)
        else:
            (sig_a, slot_a), (sig_b, slot_b) = kids
            members, slots_a, slots_b = pending.setdefault((gate, sig_a, sig_b), ([], [], []))
            members.append(f)
            slots_a.append(slot_a)
            slots_b.append(slot_b)
        count += 1
        if count % batch == 0:
            yield from flush()
    yield from flush()


@dataclass
class SweepReport:
    """Outcome of :func:`verify_many`."""

    formulas: int = 0
    rows: int = 0
    failures: list = None
    max_distance: float = 0.0
    max_distance_continuous: float = 0.0

    def __post_init__(self):
        if self.failures is None:
            self.failures = []

    @property
    def passed(self) -> bool:
        return self.formulas > 0 and not self.failures


def _expected_bits(masks, n_rows: int) -> np.ndarray:
    if n_rows <= 63:
        m = np.array(masks, dtype=np.uint64)[:, None]
        return ((m >> np.arange(n_rows, dtype=np.uint64)) & np.uint64(1)).astype(np.float64)
    return np.array([[(m >> r) & 1 for r in range(n_rows)] for m in masks], dtype=np.float64)


def verify_many(formulas, inputs, batch: int = 1 << 14, max_failures: int = 20) -> SweepReport:
    """Check the compiled network of every formula against its truth table.

    Same checks as :func:`verify` (rounded-hidden and continuous
    propagation), run over networks from :func:`compile_batch` so that
    multi-million formula sweeps stay practical.
    """
    inputs = tuple(inputs)
    if len(inputs) > MAX_VERIFY_VARIABLES:
        raise fm.TooManyVariables(f"{len(inputs)} inputs exceeds {MAX_VERIFY_VARIABLES}")
    x = fm.assignment_bits(len(inputs)).astype(np.float64)
    n_rows = len(x)
    report = SweepReport()
    for members, weights, biases in compile_batch(formulas, inputs, batch):
        expected = _expected_bits([fm.truth_mask(f, inputs) for f in members], n_rows)
        target = expected.astype(bool)
        gated = forward_stacked(weights, biases, x, binarize_hidden=True)[:, :, 0]
        raw = forward_stacked(weights, biases, x)[:, :, 0]
        report.formulas += len(members)
        report.rows += len(members) * n_rows
        report.max_distance = max(report.max_distance, float(np.abs(gated - expected).max()))
        report.max_distance_continuous = max(report.max_distance_continuous,
                                             float(np.abs(raw - expected).max()))
        bad = ((gated >= 0.5) != target) | ((raw >= 0.5) != target)
        for i in np.flatnonzero(bad.any(axis=1)):
            if len(report.failures) >= max_failures:
                break
            report.failures.append(fm.to_string(members[i]))
    return report
