"""A single threshold unit cannot learn XOR; a 2-2-1 sigmoid network can.

The perceptron keeps cycling with at least one row wrong. Backpropagation
on a hidden layer of two units finds a solution for most seeds.
"""

from logicnet import parse, truth_table
from logicnet.network import binarize, forward
from logicnet.training import Dataset, TrainSpec, train_backprop, train_perceptron

xor = Dataset.from_truth_table(truth_table(parse("(a | b) & !(a & b)")))
orr = Dataset.from_truth_table(truth_table(parse("a | b")))

p = train_perceptron(orr)
print(f"perceptron on OR: {p.misclassified} wrong after {p.epochs} epochs")
for seed in range(3):
    p = train_perceptron(xor, seed=seed)
    print(f"perceptron on XOR (seed {seed}): {p.misclassified} wrong after {p.epochs} epochs")

print()
for seed in range(10):
    r = train_backprop(TrainSpec((2, 2, 1), learning_rate=0.5, seed=seed), xor)
    bits = "".join(str(b) for b in binarize(forward(r.network, xor.inputs)).ravel())
    state = "converged" if r.converged else "stuck    "
    print(f"backprop seed {seed}: {state} epochs {r.epochs:5d}  loss {r.final_loss:.4f}  outputs {bits}")
