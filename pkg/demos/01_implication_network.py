"""Build the implication network by hand, then let the compiler do it.

The network for p -> q uses two first-layer neurons: one negates p, the
other passes q through unchanged. A disjunction neuron on the second
layer combines them.
"""

import numpy as np

from logicnet import compile_formula, forward, parse, verify
from logicnet.network import Layer, Network, Sigmoid, binarize

rows = np.array([[1, 1], [1, 0], [0, 1], [0, 0]], dtype=float)

# bias 5, weight -10 on p: fires when p is off
negate_p = ([-10.0, 0.0], 5.0)
# bias -10, weight 20 on q: copies q with the same margin
pass_q = ([0.0, 20.0], -10.0)
by_hand = Network(("p", "q"), (
    Layer([negate_p[0], pass_q[0]], [negate_p[1], pass_q[1]], Sigmoid()),
    Layer([[10.0, 10.0]], [-5.0], Sigmoid()),
))

compiled = compile_formula(parse("p -> q"))
print("compiler reproduces the hand-wired weights:", compiled == by_hand)

trace = forward(by_hand, rows, binarize_hidden=True)
hidden = binarize(trace.activations[0])
print("\n p q | a1 a2 | h(x)   raw")
for x, a, out in zip(rows.astype(int), hidden, trace.output[:, 0]):
    print(f" {x[0]} {x[1]} |  {a[0]}  {a[1]} |  {int(out >= 0.5)}   {out:.6f}")

report = verify(parse("p -> q"))
print(f"\nevery row agrees with the truth table: {report.passed}")
print(f"worst distance from a target bit: {report.max_distance:.6f}")

# deeper formulas are padded with pass-through neurons so each connection spans one layer
f = parse("!p | <>(q & r)")
net = compile_formula(f)
print(f"\n{f} compiles to layer widths {net.widths} and verifies: {verify(f).passed}")
