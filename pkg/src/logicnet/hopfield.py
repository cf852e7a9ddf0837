"""Binary Hopfield associative memory.

States are bipolar (+1/-1). Storage uses the Hebbian outer-product rule
``W = (1/N) sum_mu x^mu (x^mu)^T`` with the diagonal zeroed, energy is
``E(s) = -1/2 s^T W s``, and recall updates one neuron at a time with
``s_i <- sign(sum_j W_ij s_j)``, leaving ``s_i`` alone when the field is
exactly zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np


class HopfieldError(ValueError):
    pass


def as_bipolar(pattern) -> np.ndarray:
    """Accept ``"0110"``, ``"+--+"``, ``"1,-1,1"`` or a sequence of 0/1 or +-1."""
    if isinstance(pattern, str):
        text = pattern.strip()
        if "," in text:
            values = [int(v) for v in text.split(",")]
        else:
            table = {"0": -1, "1": 1, "-": -1, "+": 1}
            try:
                values = [table[c] for c in text]
            except KeyError as exc:
                raise HopfieldError(f"bad pattern character {exc.args[0]!r}") from None
    else:
        values = list(pattern)
    arr = np.array(values, dtype=np.int64)
    if arr.ndim != 1 or len(arr) == 0:
        raise HopfieldError("pattern must be a non-empty vector")
    if set(np.unique(arr)) <= {0, 1} and not np.any(arr == -1):
        arr = 2 * arr - 1
    if not set(np.unique(arr)) <= {-1, 1}:
        raise HopfieldError("pattern entries must be 0/1 or -1/+1")
    return arr


def to_bitstring(state) -> str:
    return "".join("1" if v > 0 else "0" for v in state)


@dataclass(frozen=True, eq=False)
class HopfieldNet:
    weights: np.ndarray
    state: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        s = np.array(self.state, dtype=np.int64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise HopfieldError(f"weights must be square, got {w.shape}")
        if not np.array_equal(w, w.T):
            raise HopfieldError("weights must be symmetric")
        if np.any(np.diag(w) != 0):
            raise HopfieldError("weights must have a zero diagonal")
        if s.shape != (w.shape[0],) or not np.all(np.abs(s) == 1):
            raise HopfieldError("state must be a +-1 vector of length N")
        w.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "state", s)

    @property
    def size(self) -> int:
        return len(self.state)

    def with_state(self, state) -> "HopfieldNet":
        return HopfieldNet(self.weights, as_bipolar(state))

    def to_document(self) -> dict:
        return {"size": self.size, "weights": self.weights.tolist(),
                "state": self.state.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_document(cls, doc: dict) -> "HopfieldNet":
        try:
            return cls(doc["weights"], doc["state"])
        except (KeyError, TypeError) as exc:
            raise HopfieldError(f"malformed Hopfield document: {exc}") from None


def store(patterns: Sequence, n: Optional[int] = None) -> HopfieldNet:
    """Hebbian storage; the returned net's state is the first pattern."""
    ps = [as_bipolar(p) for p in patterns]
    if not ps:
        raise HopfieldError("need at least one pattern")
    n = len(ps[0]) if n is None else n
    if any(len(p) != n for p in ps):
        raise HopfieldError(f"all patterns must have length {n}")
    x = np.array(ps, dtype=np.float64)
    w = x.T @ x / n
    np.fill_diagonal(w, 0.0)
    return HopfieldNet(w, ps[0])


def energy(net: HopfieldNet, state=None) -> float:
    s = net.state if state is None else np.asarray(state, dtype=np.float64)
    return float(-0.5 * s @ net.weights @ s)


@dataclass(frozen=True, eq=False)
class Recall:
    state: np.ndarray
    sweeps: int
    flips: int
    converged: bool
    # energy before any update, then after every single-neuron update
    energies: Tuple[float, ...]
    # (sweep, neuron) for each entry of energies[1:]
    steps: Tuple[Tuple[int, int], ...]

    def energy_csv(self) -> str:
        lines = ["step,sweep,neuron,energy", f"0,0,,{self.energies[0]!r}"]
        for k, ((sweep, i), e) in enumerate(zip(self.steps, self.energies[1:]), start=1):
            lines.append(f"{k},{sweep},{i},{e!r}")
        return "\n".join(lines) + "\n"


def recall(net: HopfieldNet, probe, order: str = "ascending", max_sweeps: int = 100,
           seed: int = 0) -> Recall:
    """Asynchronous recall from ``probe``.

    ``order`` is ``"ascending"`` (neurons 0..N-1 every sweep) or
    ``"random"`` (a fresh seeded permutation every sweep). Stops after the
    first sweep that changes nothing, or after ``max_sweeps``.
    """
    s = as_bipolar(probe).astype(np.float64)
    if len(s) != net.size:
        raise HopfieldError(f"probe length {len(s)} != network size {net.size}")
    if order not in ("ascending", "random"):
        raise HopfieldError(f"unknown update order {order!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    w = net.weights
    e = float(-0.5 * s @ w @ s)
    energies: List[float] = [e]
    steps: List[Tuple[int, int]] = []
    flips = 0
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        sweeps += 1
        idx = range(net.size) if order == "ascending" else rng.permutation(net.size)
        changed = False
        for i in idx:
            i = int(i)
            h = float(w[i] @ s)
            if h != 0.0 and np.sign(h) != s[i]:
                s[i] = -s[i]
                # zero diagonal: flipping s_i changes E by -2 |h_i|
                e = float(-0.5 * s @ w @ s)
                changed = True
                flips += 1
            energies.append(e)
            steps.append((sweeps, i))
        if not changed:
            converged = True
            break
    return Recall(s.astype(np.int64), sweeps, flips, converged, tuple(energies), tuple(steps))


def random_patterns(count: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.choice(np.array([-1, 1]), size=(count, n))


def corrupt(pattern, flips: int, rng: np.random.Generator) -> np.ndarray:
    """Copy of ``pattern`` with ``flips`` distinct positions negated."""
    p = as_bipolar(pattern).copy()
    idx = rng.choice(len(p), size=flips, replace=False)
    p[idx] = -p[idx]
    return p


@dataclass(frozen=True)
class DemoOutcome:
    pattern: int
    flipped: Tuple[int, ...]
    recovered: bool
    recall: Recall


def demo(n: int = 16, n_patterns: int = 1, flips: int = 3, seed: int = 0,
         order: str = "ascending", max_sweeps: int = 100) -> Tuple[HopfieldNet, List[DemoOutcome]]:
    """Store random patterns, corrupt each one and try to recall it.

    With ``n_patterns`` well under ``0.14 n`` every pattern should come
    back; past that load recall starts to fail.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    patterns = rng.choice(np.array([-1, 1]), size=(n_patterns, n))
    net = store(patterns)
    outcomes = []
    for mu, x in enumerate(patterns):
        idx = np.sort(rng.choice(n, size=flips, replace=False))
        probe = x.copy()
        probe[idx] = -probe[idx]
        r = recall(net, probe, order=order, max_sweeps=max_sweeps, seed=seed + mu)
        outcomes.append(DemoOutcome(mu, tuple(int(i) for i in idx),
                                    bool(np.array_equal(r.state, x)), r))
    return net, outcomes
