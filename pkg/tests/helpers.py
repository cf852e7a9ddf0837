"""Shared fixtures-as-functions for the test modules."""

import numpy as np

from logicnet import formula as fm
from logicnet.training import Dataset, TrainSpec, init_network


def xor_data():
    return Dataset.from_truth_table(fm.truth_table(fm.parse("(a | b) & !(a & b)")))


def table_data(text):
    return Dataset.from_truth_table(fm.truth_table(fm.parse(text)))


def random_configuration(seed):
    """A seeded (network, dataset) pair with a random topology and real-valued data."""
    rng = np.random.default_rng(seed)
    depth = int(rng.integers(1, 4))
    topology = tuple(int(v) for v in rng.integers(1, 5, size=depth + 1))
    n = int(rng.integers(1, 9))
    data = Dataset(rng.uniform(-1, 1, size=(n, topology[0])), rng.uniform(0, 1, size=(n, topology[-1])))
    spec = TrainSpec(topology, seed=seed, init_scale=float(rng.uniform(0.5, 2.0)))
    return init_network(spec), data
