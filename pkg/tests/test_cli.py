import io
import json
import subprocess
import sys

import pytest

from logicnet import network as nw
from logicnet.cli import main


def run(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_table_text():
    code, out, _ = run("table", "p -> q")
    assert code == 0
    rows = [line.replace(" ", "").split("|") for line in out.splitlines()[2:]]
    assert rows == [["t", "t", "t"], ["t", "f", "f"], ["f", "t", "t"], ["f", "f", "t"]]


def test_table_csv():
    code, out, _ = run("table", "p -> q", "--format", "csv")
    assert out == "p,q,value\n1,1,1\n1,0,0\n0,1,1\n0,0,1\n"


def test_table_small_cases():
    assert run("table", "p", "--format", "csv")[1].count("\n") == 3
    out = run("table", "(p & !p)", "--format", "csv")[1]
    assert [line.split(",")[-1] for line in out.splitlines()[1:]] == ["0", "0"]


def test_parse_error_reports_offset():
    code, out, err = run("table", "p -> ")
    assert code == 1 and out == ""
    assert "byte 5" in err and "expected" in err


def test_parse_from_stdin(monkeypatch):
    code, out, _ = run("parse", "-", stdin="¬p ∨ ◊(q ∧ r)\n", monkeypatch=monkeypatch)
    assert code == 0 and out == "!p | <>(q & r)\n"
    code, out, _ = run("parse", "p&q->r", "--unicode")
    assert out == "p ∧ q → r\n"


def test_eval():
    assert run("eval", "p -> q", "--assign", "p=1,q=0")[1] == "0\n"
    assert run("eval", "p -> q", "--assign", "p=0", "--assign", "q=0")[1] == "1\n"
    assert run("eval", "p -> q", "--assign", "p=1")[0] == 1
    assert run("eval", "p", "--assign", "p=2")[0] == 1


def test_verify_raw_table():
    code, out, _ = run("verify", "p -> q", "--raw")
    assert code == 0
    lines = out.splitlines()
    cols = [line.split("\t")[:5] for line in lines[1:5]]
    assert cols == [["1", "1", "0", "1", "1"], ["1", "0", "0", "0", "0"],
                    ["0", "1", "1", "1", "1"], ["0", "0", "1", "0", "1"]]
    assert lines[-1].startswith("pass: 4/4")


@pytest.mark.parametrize("formula", ["!p | <>(q & r)", "p -> <>(q & !r)"])
def test_verify_passes(formula):
    code, out, _ = run("verify", formula)
    assert code == 0 and out.startswith("pass")


def test_verify_document():
    code, out, _ = run("verify", "p -> q", "--format", "doc")
    assert json.loads(out)["passed"] is True


@pytest.mark.parametrize("claim, possibility, verdict, code", [
    ("p -> q", "<>(p & !q)", "incompatible", 2),
    ("p -> q", "<>(!p | q)", "compatible", 0),
    ("p", "<>p", "compatible", 0),
])
def test_compat(claim, possibility, verdict, code):
    got, out, _ = run("compat", claim, possibility)
    assert (got, out) == (code, verdict + "\n")


def test_compat_needs_possibility():
    assert run("compat", "p", "q")[0] == 1


def test_compile_emits_network_document(tmp_path):
    code, out, _ = run("compile", "p -> q", "--out", str(tmp_path))
    assert code == 0
    net = nw.deserialize(out)
    assert net.layers[0].weights.tolist() == [[-10, 0], [0, 20]]
    assert (tmp_path / "network.json").read_text() == out


def test_train_implication(tmp_path):
    code, out, _ = run("train", "--formula", "p -> q", "--topology", "2,2,1", "--seed", "0",
                       "--out", str(tmp_path))
    assert code == 0
    assert out.startswith("converged") and "outputs: 1011" in out
    assert {p.name for p in tmp_path.iterdir()} == {"report.json", "loss.csv", "network.json"}
    assert json.loads((tmp_path / "report.json").read_text())["converged"] is True


def test_train_non_convergence_exit_code():
    code, out, _ = run("train", "--formula", "(a | b) & !(a & b)", "--topology", "2,1",
                       "--epochs", "200")
    assert code == 3 and out.startswith("not converged")


def test_perceptron_xor_csv(tmp_path):
    path = tmp_path / "xor.csv"
    path.write_text("a,b,y\n1,1,0\n1,0,1\n0,1,1\n0,0,0\n")
    code, out, _ = run("perceptron", "--truth-table", str(path))
    assert code == 3 and "not converged" in out
    code, _, _ = run("perceptron", "--formula", "a | b")
    assert code == 0


def test_train_csv_header_must_end_in_y(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,z\n1,1,0\n")
    assert run("perceptron", "--truth-table", str(path))[0] == 1


def test_hopfield_demo(tmp_path):
    code, out, _ = run("hopfield", "demo", "--n", "16", "--patterns", "1", "--flip", "3",
                       "--seed", "0", "--out", str(tmp_path))
    assert code == 0
    assert "recalled" in out and "energy monotone: yes" in out
    energies = [float(line.split(",")[-1])
                for line in (tmp_path / "energy_0.csv").read_text().splitlines()[1:]]
    assert all(b <= a for a, b in zip(energies, energies[1:]))


def test_hopfield_overload_demo_fails_recall():
    code, out, _ = run("hopfield", "demo", "--n", "16", "--patterns", "8", "--flip", "1", "--seed", "0")
    assert code == 3 and "failed" in out


def test_hopfield_store_and_recall(tmp_path):
    code, out, _ = run("hopfield", "store", "--pattern", "1100110011001100", "--out", str(tmp_path))
    assert code == 0
    weights = str(tmp_path / "hopfield.json")
    code, out, _ = run("hopfield", "recall", "--weights", weights, "--probe", "1100110011001111")
    assert code == 0 and out.splitlines()[0] == "1100110011001100"
    code, out, _ = run("hopfield", "recall", "--pattern", "1010", "--probe", "1011", "--format", "csv")
    assert out.startswith("step,sweep,neuron,energy\n")


def test_usage_errors():
    assert run()[0] == 1
    assert run("bogus")[0] == 1
    assert run("hopfield", "recall", "--probe", "1010")[0] == 1
    assert run("train")[0] == 1


@pytest.mark.parametrize("argv", [
    ["train", "--formula", "(a | b) & !(a & b)", "--seed", "3", "--format", "doc"],
    ["train", "--formula", "p -> q", "--format", "csv"],
    ["perceptron", "--formula", "a & !b", "--seed", "4", "--format", "doc"],
    ["hopfield", "demo", "--patterns", "3", "--order", "random", "--seed", "9", "--format", "csv"],
    ["verify", "p -> <>(q & !r)", "--format", "doc"],
    ["compile", "!p | <>(q & r)"],
])
def test_repeat_runs_are_byte_identical(argv):
    assert run(*argv)[1] == run(*argv)[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "logicnet.cli", "compat", "p -> q", "<>(p & !q)"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and proc.stdout == "incompatible\n"
