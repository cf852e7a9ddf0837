"""Command-line entry point: ``logicnet <command> ...``.

Exit codes: 0 success/compatible, 1 usage or input error (or a failed
verification), 2 incompatible, 3 no convergence / failed recall.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import compiler, formula as fm, hopfield, network, training

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCOMPATIBLE = 2
EXIT_NOT_CONVERGED = 3


class CliError(Exception):
    pass


def _read_formula(text: str) -> fm.Formula:
    if text == "-":
        text = sys.stdin.read()
    return fm.parse(text)


def _bits(values, symbols="10"):
    one, zero = symbols
    return [one if v else zero for v in values]


def _formula_doc(f: fm.Formula):
    if isinstance(f, fm.Var):
        return {"var": f.name}
    kids = [_formula_doc(k) for k in fm.children(f)]
    return {type(f).__name__.lower(): kids[0] if len(kids) == 1 else kids}


def render_table(table: fm.TruthTable, fmt: str, label: str) -> str:
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(table.variables) + ["value"])
        for bits, value in table.rows():
            w.writerow(list(bits) + [value])
        return out.getvalue()
    if fmt == "doc":
        return json.dumps({"formula": label, "variables": list(table.variables),
                           "rows": [{"inputs": list(b), "value": v} for b, v in table.rows()]},
                          indent=2) + "\n"
    header = list(table.variables) + [label]
    widths = [max(1, len(h)) for h in header]
    lines = [" | ".join(h.center(w) for h, w in zip(header, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for bits, value in table.rows():
        cells = _bits(list(bits) + [value], "tf")
        lines.append(" | ".join(c.center(w) for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


def _write(out_dir, name: str, text: str):
    if out_dir is None:
        return
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    (path / name).write_text(text)


def _dataset(args) -> training.Dataset:
    if getattr(args, "truth_table", None):
        text = sys.stdin.read() if args.truth_table == "-" else Path(args.truth_table).read_text()
        return training.Dataset.from_csv(text)
    if getattr(args, "formula", None):
        return training.Dataset.from_truth_table(fm.truth_table(_read_formula(args.formula)))
    raise CliError("give --formula or --truth-table")


# --------------------------------------------------------------------------
# commands

def cmd_parse(args, out):
    f = _read_formula(args.formula)
    if args.format == "doc":
        out.write(json.dumps({"formula": fm.to_string(f), "ast": _formula_doc(f)}, indent=2) + "\n")
    else:
        out.write(fm.to_string(f, unicode=args.unicode) + "\n")
    return EXIT_OK


def cmd_table(args, out):
    f = _read_formula(args.formula)
    out.write(render_table(fm.truth_table(f), args.format, fm.to_string(f)))
    return EXIT_OK


def cmd_eval(args, out):
    f = _read_formula(args.formula)
    assignment = {}
    for item in args.assign:
        for part in item.split(","):
            if not part.strip():
                continue
            name, _, value = part.partition("=")
            if value.strip() not in ("0", "1"):
                raise CliError(f"bad assignment {part!r}; use name=0 or name=1")
            assignment[name.strip()] = int(value)
    extra = set(assignment) - set(fm.variables(f))
    if extra:
        raise CliError(f"unknown variables {sorted(extra)}")
    out.write(f"{fm.evaluate(f, assignment)}\n")
    return EXIT_OK


def cmd_compile(args, out):
    f = _read_formula(args.formula)
    text = network.serialize(compiler.compile_formula(f))
    _write(args.out, "network.json", text)
    out.write(text)
    return EXIT_OK


def cmd_verify(args, out):
    f = _read_formula(args.formula)
    report = compiler.verify(f)
    if args.format == "doc":
        out.write(report.to_json())
    else:
        if args.raw:
            out.write(report.activation_table())
        status = "pass" if report.passed else "FAIL"
        out.write(f"{status}: {report.agreeing}/{len(report.rows)} rows agree; "
                  f"max distance {report.max_distance:.6g} "
                  f"(continuous {report.max_distance_continuous:.6g})\n")
    _write(args.out, "verify.json", report.to_json())
    return EXIT_OK if report.passed else EXIT_USAGE


def cmd_compat(args, out):
    verdict = fm.compatible(_read_formula(args.claim), _read_formula(args.possibility))
    out.write(verdict.value + "\n")
    return EXIT_OK if verdict is fm.Verdict.COMPATIBLE else EXIT_INCOMPATIBLE


def cmd_train(args, out):
    data = _dataset(args)
    topology = tuple(int(v) for v in args.topology.split(","))
    spec = training.TrainSpec(topology, args.rate, args.epochs, args.target_error,
                              args.seed, args.init_scale)
    try:
        report = training.train_backprop(spec, data)
    except training.TrainingDiverged as exc:
        out.write(f"diverged: {exc}\n")
        _write(args.out, "report.json", exc.report.to_json())
        return EXIT_NOT_CONVERGED
    _write(args.out, "report.json", report.to_json())
    _write(args.out, "loss.csv", report.loss_csv())
    _write(args.out, "network.json", network.serialize(report.network))
    if args.format == "doc":
        out.write(report.to_json())
    elif args.format == "csv":
        out.write(report.loss_csv())
    else:
        bits = network.binarize(network.forward(report.network, data.inputs)).ravel()
        state = "converged" if report.converged else "not converged"
        out.write(f"{state} after {report.epochs} epochs; loss {report.final_loss:.6g}; "
                  f"max error {report.max_error:.6g}\n")
        out.write("outputs: " + "".join(str(int(b)) for b in bits) + "\n")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_perceptron(args, out):
    data = _dataset(args)
    report = training.train_perceptron(data, args.rate, args.epochs, seed=args.seed)
    _write(args.out, "perceptron.json", report.to_json())
    if args.format == "doc":
        out.write(report.to_json())
    else:
        state = "converged" if report.converged else "not converged"
        out.write(f"{state} after {report.epochs} epochs; {report.misclassified} misclassified; "
                  f"weights {report.weights.tolist()} bias {report.bias}\n")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def _patterns(args):
    values = list(args.pattern or [])
    if args.patterns_file:
        values += [line.strip() for line in Path(args.patterns_file).read_text().splitlines()
                   if line.strip()]
    if not values:
        raise CliError("give --pattern (repeatable) or --patterns-file")
    return values


def cmd_hopfield_store(args, out):
    net = hopfield.store(_patterns(args))
    text = net.to_json()
    _write(args.out, "hopfield.json", text)
    out.write(text)
    return EXIT_OK


def cmd_hopfield_recall(args, out):
    if args.weights:
        net = hopfield.HopfieldNet.from_document(json.loads(Path(args.weights).read_text()))
    else:
        net = hopfield.store(_patterns(args))
    r = hopfield.recall(net, args.probe, order=args.order, max_sweeps=args.max_sweeps, seed=args.seed)
    _write(args.out, "energy.csv", r.energy_csv())
    if args.format == "csv":
        out.write(r.energy_csv())
    else:
        out.write(f"{hopfield.to_bitstring(r.state)}\n")
        out.write(f"sweeps {r.sweeps}; flips {r.flips}; energy {r.energies[0]!r} -> {r.energies[-1]!r}\n")
    return EXIT_OK if r.converged else EXIT_NOT_CONVERGED


def cmd_hopfield_demo(args, out):
    net, outcomes = hopfield.demo(args.n, args.patterns, args.flip, args.seed, args.order,
                                  args.max_sweeps)
    monotone = all(all(b <= a for a, b in zip(o.recall.energies, o.recall.energies[1:]))
                   for o in outcomes)
    if args.format == "csv":
        lines = ["pattern,step,sweep,neuron,energy"]
        for o in outcomes:
            for row in o.recall.energy_csv().splitlines()[1:]:
                lines.append(f"{o.pattern},{row}")
        out.write("\n".join(lines) + "\n")
    else:
        for o in outcomes:
            status = "recalled" if o.recovered else "failed"
            out.write(f"pattern {o.pattern}: flipped {list(o.flipped)} -> {status} "
                      f"in {o.recall.sweeps} sweeps\n")
        out.write(f"energy monotone: {'yes' if monotone else 'NO'}\n")
    for o in outcomes:
        _write(args.out, f"energy_{o.pattern}.csv", o.recall.energy_csv())
    ok = all(o.recovered for o in outcomes) and monotone
    return EXIT_OK if ok else EXIT_NOT_CONVERGED


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logicnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, formats=("text", "csv", "doc"), default="text"):
        sp.add_argument("--format", choices=formats, default=default)
        sp.add_argument("--out", help="directory for file outputs")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("parse", help="parse and pretty-print a formula")
    sp.add_argument("formula", help="formula text, or - for stdin")
    sp.add_argument("--unicode", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_parse)

    sp = sub.add_parser("table", help="truth table of a formula")
    sp.add_argument("formula")
    common(sp)
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("eval", help="evaluate under an assignment")
    sp.add_argument("formula")
    sp.add_argument("--assign", action="append", default=[], help="p=1,q=0")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("compile", help="emit the compiled network document")
    sp.add_argument("formula")
    common(sp, default="doc")
    sp.set_defaults(func=cmd_compile)

    sp = sub.add_parser("verify", help="check the compiled network against the truth table")
    sp.add_argument("formula")
    sp.add_argument("--raw", action="store_true", help="print the activation table")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("compat", help="compatibility of a claim with <>possibility")
    sp.add_argument("claim")
    sp.add_argument("possibility")
    common(sp)
    sp.set_defaults(func=cmd_compat)

    sp = sub.add_parser("train", help="train a sigmoid network by backpropagation")
    sp.add_argument("--formula")
    sp.add_argument("--truth-table", help="CSV: variable columns then y")
    sp.add_argument("--topology", default="2,2,1")
    sp.add_argument("--rate", type=float, default=0.5)
    sp.add_argument("--epochs", type=int, default=20000)
    sp.add_argument("--target-error", type=float, default=0.4)
    sp.add_argument("--init-scale", type=float, default=1.0)
    common(sp)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("perceptron", help="train a single threshold unit")
    sp.add_argument("--formula")
    sp.add_argument("--truth-table")
    sp.add_argument("--rate", type=float, default=1.0)
    sp.add_argument("--epochs", type=int, default=1000)
    common(sp)
    sp.set_defaults(func=cmd_perceptron)

    hp = sub.add_parser("hopfield", help="Hopfield associative memory")
    hsub = hp.add_subparsers(dest="action", required=True)

    def patterns(sp):
        sp.add_argument("--pattern", action="append", help="0/1 or +/- string; repeatable")
        sp.add_argument("--patterns-file")

    sp = hsub.add_parser("store")
    patterns(sp)
    common(sp, default="doc")
    sp.set_defaults(func=cmd_hopfield_store)

    sp = hsub.add_parser("recall")
    patterns(sp)
    sp.add_argument("--weights", help="document written by 'hopfield store'")
    sp.add_argument("--probe", required=True)
    sp.add_argument("--order", choices=("ascending", "random"), default="ascending")
    sp.add_argument("--max-sweeps", type=int, default=100)
    common(sp)
    sp.set_defaults(func=cmd_hopfield_recall)

    sp = hsub.add_parser("demo")
    sp.add_argument("--n", type=int, default=16)
    sp.add_argument("--patterns", type=int, default=1)
    sp.add_argument("--flip", type=int, default=3)
    sp.add_argument("--order", choices=("ascending", "random"), default="ascending")
    sp.add_argument("--max-sweeps", type=int, default=100)
    common(sp)
    sp.set_defaults(func=cmd_hopfield_demo)
    return p


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except fm.ParseError as exc:
        err.write(f"parse error: {exc}\n")
    except (CliError, fm.FormulaError, compiler.CompileError, network.NetworkError,
            training.TrainingError, hopfield.HopfieldError, OSError) as exc:
        err.write(f"error: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
