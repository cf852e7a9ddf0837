"""Acceptance suite: seven criteria, each with its tolerance and time budget.

Run under pytest (a PASS/FAIL line per criterion appears in the terminal
summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import io
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import random_configuration, xor_data  # noqa: E402
from logicnet import compiler, formula as fm, hopfield as hf, training as tr  # noqa: E402
from logicnet.cli import main  # noqa: E402

RESULTS = {}


def _record(number, title, budget, fn):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    within = elapsed < budget
    passed = bool(ok and within)
    RESULTS[number] = (passed, f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} "
                               f"({detail}; {elapsed:.2f}s of {budget:g}s)")
    return passed, detail, elapsed, within


# -- 1 ---------------------------------------------------------------------

REFERENCE_TABLE = [(1, 1, 0, 1, 1), (1, 0, 0, 0, 0), (0, 1, 1, 1, 1), (0, 0, 1, 0, 1)]


def implication_table():
    out = io.StringIO()
    code = main(["verify", "p -> q", "--raw"], out=out, err=io.StringIO())
    lines = out.getvalue().splitlines()
    body = [line.split("\t") for line in lines[1:5]]
    columns = [tuple(int(c) for c in row[:5]) for row in body]
    distances = [abs(float(row[5]) - int(row[4])) for row in body]
    ok = code == 0 and columns == REFERENCE_TABLE and max(distances) < 0.00670
    return ok, f"columns match: {columns == REFERENCE_TABLE}, max raw distance {max(distances):.7f}"


# -- 2 ---------------------------------------------------------------------

def compatibility_pair():
    claim = fm.parse("p -> q")
    a = fm.compatible(claim, fm.parse("<>(p & !q)"))
    b = fm.compatible(claim, fm.parse("<>(!p | q)"))
    ok = a is fm.Verdict.INCOMPATIBLE and b is fm.Verdict.COMPATIBLE
    return ok, f"{a.value} / {b.value}"


# -- 3 ---------------------------------------------------------------------

def oracle_equivalence():
    # depth counts levels (a bare variable is depth 1), so depth <= 4 is height <= 3
    exhaustive = compiler.verify_many(fm.enumerate_formulas(("p", "q"), 3), ("p", "q"))
    rng = np.random.Generator(np.random.PCG64(20240601))
    names = ("p", "q", "r")
    randoms = [fm.random_formula(rng, names, 5) for _ in range(500)]
    sampled = compiler.verify_many(randoms, names)
    ok = (exhaustive.passed and sampled.passed and exhaustive.formulas == fm.count_formulas(2, 3)
          and sampled.formulas == 500)
    return ok, (f"{exhaustive.formulas} exhaustive + {sampled.formulas} random formulas, "
                f"{len(exhaustive.failures) + len(sampled.failures)} failures")


# -- 4 ---------------------------------------------------------------------

def gradient_check():
    worst = 0.0
    for seed in range(20):
        net, data = random_configuration(seed)
        err = tr.gradient_relative_error(tr.gradient(net, data), tr.numerical_gradient(net, data, 1e-4))
        worst = max(worst, err)
    return worst < 1e-6, f"20 configurations, worst relative error {worst:.2e}"


# -- 5 ---------------------------------------------------------------------

def xor_dichotomy():
    data = xor_data()
    perceptron = [tr.train_perceptron(data, rate=1.0, max_epochs=1000, seed=s) for s in range(10)]
    never = all(r.misclassified >= 1 and min(r.history) >= 1 for r in perceptron)
    runs = [tr.train_backprop(tr.TrainSpec((2, 2, 1), 0.5, 20000, 0.4, seed=s), data) for s in range(10)]
    wins = [s for s, r in enumerate(runs) if r.converged and r.max_error < 0.4]
    ok = never and len(wins) >= 6
    return ok, f"perceptron never separates: {never}; backprop converged for seeds {wins}"


# -- 6 ---------------------------------------------------------------------

def hopfield_energy():
    monotone = True
    recalled = True
    halted = True
    for seed in range(100):
        rng = np.random.Generator(np.random.PCG64(seed))
        count = 1 + seed % 3
        patterns = rng.choice(np.array([-1, 1]), size=(count, 16))
        net = hf.store(patterns)
        probe = hf.corrupt(patterns[0], 3, rng)
        order = "ascending" if seed % 2 == 0 else "random"
        r = hf.recall(net, probe, order=order, max_sweeps=100, seed=seed)
        monotone &= bool(np.all(np.diff(r.energies) <= 1e-12))
        halted &= r.converged
        if count == 1:
            recalled &= bool(np.array_equal(r.state, patterns[0]))
    _, outcomes = hf.demo(n=16, n_patterns=8, flips=1, seed=0)
    overload_fails = sum(not o.recovered for o in outcomes)
    ok = monotone and recalled and halted and overload_fails >= 1
    return ok, (f"monotone {monotone}, single-pattern recall {recalled}, "
                f"overload (seed 0) failures {overload_fails}/8")


# -- 7 ---------------------------------------------------------------------

SEEDED_COMMANDS = [
    ["table", "p -> q", "--format", "csv"],
    ["verify", "p -> q", "--raw"],
    ["compile", "!p | <>(q & r)"],
    ["train", "--formula", "p -> q", "--topology", "2,2,1", "--seed", "0", "--format", "doc"],
    ["train", "--formula", "(a | b) & !(a & b)", "--seed", "3", "--format", "csv"],
    ["perceptron", "--formula", "(a | b) & !(a & b)", "--seed", "2", "--format", "doc"],
    ["hopfield", "demo", "--n", "16", "--patterns", "3", "--flip", "3", "--seed", "5",
     "--order", "random", "--format", "csv"],
]


def _invoke(argv, out_dir):
    proc = subprocess.run([sys.executable, "-m", "logicnet.cli", *argv, "--out", out_dir],
                          capture_output=True)
    files = {p.name: p.read_bytes() for p in sorted(Path(out_dir).iterdir())}
    return proc.returncode, proc.stdout, files


def determinism():
    mismatched = []
    for argv in SEEDED_COMMANDS:
        with tempfile.TemporaryDirectory() as a, tempfile.TemporaryDirectory() as b:
            if _invoke(argv, a) != _invoke(argv, b):
                mismatched.append(" ".join(argv[:2]))
    return not mismatched, f"{len(SEEDED_COMMANDS)} commands run twice, mismatches {mismatched}"


CRITERIA = [
    (1, "implication table reproduction", 1.0, implication_table),
    (2, "compatibility pair", 1.0, compatibility_pair),
    (3, "oracle equivalence", 60.0, oracle_equivalence),
    (4, "gradient correctness", 10.0, gradient_check),
    (5, "XOR dichotomy", 30.0, xor_dichotomy),
    (6, "Hopfield energy monotonicity and overload", 10.0, hopfield_energy),
    (7, "determinism", 60.0, determinism),
]


@pytest.mark.parametrize("number, title, budget, fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, fn):
    passed, detail, elapsed, within = _record(number, title, budget, fn)
    print(RESULTS[number][1])
    assert within, f"took {elapsed:.2f}s, budget {budget}s"
    assert passed, detail


if __name__ == "__main__":
    for number, title, budget, fn in CRITERIA:
        _record(number, title, budget, fn)
        print(RESULTS[number][1], flush=True)
    sys.exit(0 if all(p for p, _ in RESULTS.values()) else 1)
