"""Compatibility of a claim with a possibility.

A claim is incompatible with <>g when the claim and g can never hold
together. For p -> q that is exactly the row p = 1, q = 0, which is also
where the incompatibility probe network fires.
"""

import numpy as np

from logicnet import compatible, compile_incompatibility_probe, forward, parse, truth_table
from logicnet.network import binarize

claim = parse("p -> q")
for text in ("<>(p & !q)", "<>(!p | q)", "<>(q & !p)"):
    print(f"{claim} vs {text}: {compatible(claim, parse(text)).value}")

rows = truth_table(claim)
probe = compile_incompatibility_probe(claim)
fires = binarize(forward(probe, rows.inputs)).ravel()
print("\n p q | p -> q | probe")
for (bits, value), f in zip(rows.rows(), fires):
    print(f" {bits[0]} {bits[1]} |   {value}    |   {f}")
print("\nprobe is the complement of the implication:", bool(np.all(fires == 1 - rows.outputs)))
