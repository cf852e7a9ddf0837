"""Compile propositional formulas to sigmoid networks and check them against truth tables."""

from .formula import (And, Implies, Not, Or, ParseError, Possibly, TruthTable, Var, Verdict,
                      compatible, evaluate, parse, satisfiable, to_string, truth_table)
from .network import Layer, Network, Sigmoid, Step, Trace, binarize, forward
from .compiler import compile_formula, compile_incompatibility_probe, verify

__version__ = "0.1.0"
