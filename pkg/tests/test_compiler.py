import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logicnet import compiler as c, formula as fm, network as nw
from logicnet.formula import And, Implies, Not, Or, Possibly, Var

SIG5 = 1 / (1 + np.exp(-5.0))
SIG_M5 = 1 - SIG5
SIG_M10 = 1 / (1 + np.exp(10.0))
ROWS = np.array([[1, 1], [1, 0], [0, 1], [0, 0]], dtype=float)


def internal_nodes(f):
    return 0 if isinstance(f, Var) else 1 + sum(internal_nodes(k) for k in fm.children(f))


# -- gate catalog ----------------------------------------------------------

def test_gate_catalog():
    assert (c.NOT.bias, c.NOT.weight) == (5, -10)
    assert (c.PASS.bias, c.PASS.weight) == (-10, 20)
    assert (c.or_gate(2).bias, c.or_gate(2).weight) == (-5, 10)
    assert (c.and_gate(2).bias, c.and_gate(3).bias) == (-15, -25)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_gate_margins_on_bits(k):
    for gate, fn in ((c.and_gate(k), all), (c.or_gate(k), any)):
        for bits in fm.assignment_bits(k):
            z = gate.bias + gate.weight * bits.sum()
            assert abs(z) >= 5
            assert (z > 0) == fn(bits)


# -- the implication network -----------------------------------------------

def test_implication_weights():
    net = c.compile_formula(fm.parse("p -> q"))
    assert net.inputs == ("p", "q")
    assert net.layers[0].weights.tolist() == [[-10, 0], [0, 20]]
    assert net.layers[0].biases.tolist() == [5, -10]
    assert net.layers[1].weights.tolist() == [[10, 10]]
    assert net.layers[1].biases.tolist() == [-5]


def test_implication_activation_table():
    report = c.verify(fm.parse("p -> q"))
    hidden = [tuple(row.hidden[0]) for row in report.rows]
    assert hidden == [(0, 1), (0, 0), (1, 1), (1, 0)]
    assert [row.bit for row in report.rows] == [1, 0, 1, 1]
    assert report.passed and report.agreeing == 4
    assert report.max_distance <= SIG_M5 + 1e-15


def test_implication_raw_output_at_false_row():
    net = c.compile_formula(fm.parse("p -> q"))
    t = nw.forward(net, [1, 0], binarize_hidden=True)
    assert t.output[0] == pytest.approx(SIG_M5, rel=1e-12)
    assert nw.binarize(t)[0] == 0


def test_single_variable_is_one_pass_neuron():
    net = c.compile_formula(Var("p"))
    assert nw.count_neurons(net) == 1
    assert net.layers[0].weights.tolist() == [[20]] and net.layers[0].biases.tolist() == [-10]
    assert nw.binarize(nw.forward(net, [[1], [0]])).ravel().tolist() == [1, 0]
    report = c.verify(Var("p"))
    assert report.passed and report.max_distance <= SIG_M10 + 1e-15


def test_conjunction_with_negation():
    net = c.compile_formula(fm.parse("p & !q"))
    assert nw.binarize(nw.forward(net, ROWS)).ravel().tolist() == [0, 1, 0, 0]


def test_incompatibility_probe():
    probe = c.compile_incompatibility_probe(fm.parse("p -> q"))
    out = nw.binarize(nw.forward(probe, ROWS)).ravel().tolist()
    assert out == [0, 1, 0, 0]
    implication = nw.binarize(nw.forward(c.compile_formula(fm.parse("p -> q")), ROWS)).ravel()
    assert out == (1 - implication).tolist()


@pytest.mark.parametrize("text", ["p & q", "(p & q) -> r", "p -> !q", "p"])
def test_incompatibility_probe_rejects(text):
    with pytest.raises(c.CompileError):
        c.compile_incompatibility_probe(fm.parse(text))


def test_probe_keeps_variable_order():
    assert c.compile_incompatibility_probe(fm.parse("z -> a")).inputs == ("a", "z")


def test_compile_errors():
    with pytest.raises(c.CompileError):
        c.compile_formula(Var("p"), inputs=("q",))


@pytest.mark.parametrize("text", ["!p | <>(q & r)", "p -> <>(q & !r)", "<>p", "<><>(p | q)"])
def test_possibility_is_transparent(text):
    f = fm.parse(text)
    assert c.compile_formula(f) == c.compile_formula(fm.strip_possibly(f))
    assert c.verify(f).passed


def test_verify_documents():
    report = c.verify(fm.parse("p -> q"))
    doc = json.loads(report.to_json())
    assert doc["passed"] is True
    assert len(doc["rows"]) == 4
    table = report.activation_table().splitlines()
    assert table[0].split("\t")[:5] == ["p", "q", "a1[2]", "a2[2]", "h(x)"]
    assert [line.split("\t")[:5] for line in table[1:]] == [
        ["1", "1", "0", "1", "1"], ["1", "0", "0", "0", "0"],
        ["0", "1", "1", "1", "1"], ["0", "0", "1", "0", "1"]]


# -- structure -------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_structure(seed):
    f = fm.random_formula(np.random.default_rng(seed), ("p", "q", "r", "s"), 5)
    n = c.normalize(f)
    net = c.compile_formula(f)
    assert len(net.layers) == max(1, fm.depth(n))
    assert nw.count_neurons(net) == internal_nodes(n) + c.padding_count(f)
    assert net.layers[-1].width == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_margin_with_binarized_layer_inputs(seed):
    f = fm.random_formula(np.random.default_rng(seed), ("p", "q", "r"), 5)
    net = c.compile_formula(f)
    x = fm.assignment_bits(len(net.inputs)).astype(float)
    t = nw.forward(net, x, binarize_hidden=True)
    for z in t.pre_activations:
        assert np.all(np.abs(z) >= 5)


# -- oracle equivalence ----------------------------------------------------

def _table_bits(f, names):
    return fm.truth_table(f, names).outputs.tolist()


def test_random_formulas_over_six_variables():
    rng = np.random.default_rng(2024)
    names = ("a", "b", "c", "d", "e", "f")
    for _ in range(500):
        f = fm.random_formula(rng, names[:int(rng.integers(1, 7))], int(rng.integers(0, 7)))
        report = c.verify(f)
        assert report.passed, fm.to_string(f)


def test_exhaustive_height_two_over_three_variables():
    fs = list(fm.enumerate_formulas(("p", "q", "r"), 2))
    assert len(fs) == 3303
    sweep = c.verify_many(fs, ("p", "q", "r"))
    assert sweep.passed and sweep.formulas == 3303
    # raw propagation must also land on the right side of the cut
    assert sweep.max_distance_continuous < 0.5


def test_exhaustive_with_possibility_over_two_variables():
    fs = list(fm.enumerate_formulas(("p", "q"), 2, (Not, Possibly, And, Or, Implies)))
    for f in fs:
        assert c.verify(f).passed


def test_batch_compile_matches_single_compile():
    names = ("p", "q", "r")
    fs = list(fm.enumerate_formulas(names, 2))
    seen = 0
    for members, weights, biases in c.compile_batch(fs, names, batch=512):
        for g, f in enumerate(members):
            net = c.compile_formula(f, inputs=names)
            assert len(net.layers) == len(weights)
            for layer, w, b in zip(net.layers, weights, biases):
                assert np.array_equal(layer.weights, w[g])
                assert np.array_equal(layer.biases, b[g])
            seen += 1
    assert seen == len(fs)


def test_sweep_reports_failures():
    # a tampered network must be caught by verify
    f = fm.parse("p -> q")
    net = c.compile_formula(f)
    bad = nw.Network(net.inputs, (net.layers[0], nw.Layer([[10, 10]], [-15], nw.Sigmoid())))
    report = c.verify(f, bad)
    assert not report.passed and report.agreeing < 4


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_continuous_mode_passes_on_random_depth_five(seed):
    f = fm.random_formula(np.random.default_rng(seed), ("p", "q", "r"), 5)
    report = c.verify(f)
    assert report.passed
    assert all(row.bit_continuous == row.expected for row in report.rows)
