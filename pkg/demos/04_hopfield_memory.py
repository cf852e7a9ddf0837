"""Associative recall and what happens when the memory is overloaded.

One stored pattern comes back from a probe with three bits flipped, and
the energy never rises along the way. With eight patterns in sixteen
neurons, some patterns are no longer fixed points, so even a one-bit
corruption can settle somewhere else.
"""

import numpy as np

from logicnet.hopfield import demo, to_bitstring

net, (outcome,) = demo(n=16, n_patterns=1, flips=3, seed=0)
r = outcome.recall
print(f"flipped bits {list(outcome.flipped)}; recalled: {outcome.recovered} in {r.sweeps} sweeps")
print(f"energy {r.energies[0]:.3f} -> {r.energies[-1]:.3f}, "
      f"never increasing: {bool(np.all(np.diff(r.energies) <= 0))}")
print("state", to_bitstring(r.state))

print()
for n_patterns in (1, 2, 3, 8):
    _, outcomes = demo(n=16, n_patterns=n_patterns, flips=1, seed=0)
    ok = sum(o.recovered for o in outcomes)
    print(f"{n_patterns} stored patterns: {ok}/{n_patterns} recalled from one-bit corruption")
