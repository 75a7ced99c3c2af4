"""Holdout/development/validation splits and random half-partitions."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

N_HOLDOUTS = 3
N_FOLDS = 5


def _frozen(a) -> np.ndarray:
    a = np.sort(np.asarray(a, dtype=np.int64))
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SplitPlan:
    n: int
    seed: int
    holdouts: tuple[np.ndarray, ...]
    developments: tuple[np.ndarray, ...]
    folds: tuple[tuple[np.ndarray, ...], ...]

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "seed": self.seed,
            "holdouts": [h.tolist() for h in self.holdouts],
            "developments": [d.tolist() for d in self.developments],
            "folds": [[f.tolist() for f in fs] for fs in self.folds],
        }

    @classmethod
    def from_json(cls, obj) -> "SplitPlan":
        return cls(
            obj["n"], obj["seed"],
            tuple(_frozen(h) for h in obj["holdouts"]),
            tuple(_frozen(d) for d in obj["developments"]),
            tuple(tuple(_frozen(f) for f in fs) for fs in obj["folds"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)
            fh.write("\n")


def make_split_plan(n: int, seed: int) -> SplitPlan:
    """Three random holdout thirds; each complement is cut into five folds.

    Rows are dealt round-robin from a shuffled permutation, so set sizes
    differ by at most one and the first sets receive the remainder.
    """
    # smallest n whose development sets still give every fold a row
    if n - -(-n // N_HOLDOUTS) < N_FOLDS:
        raise ValueError(f"{n} rows is too few for {N_HOLDOUTS} holdouts x {N_FOLDS} folds")
    ss = np.random.SeedSequence(seed)
    outer, *inner = ss.spawn(1 + N_HOLDOUTS)
    perm = np.random.default_rng(outer).permutation(n)
    holdouts = [perm[h::N_HOLDOUTS] for h in range(N_HOLDOUTS)]
    developments, folds = [], []
    everything = np.arange(n)
    for h, hold in enumerate(holdouts):
        dev = np.setdiff1d(everything, hold)
        shuffled = np.random.default_rng(inner[h]).permutation(dev)
        developments.append(_frozen(dev))
        folds.append(tuple(_frozen(shuffled[v::N_FOLDS]) for v in range(N_FOLDS)))
    return SplitPlan(n, seed, tuple(_frozen(h) for h in holdouts),
                     tuple(developments), tuple(folds))


@dataclass(frozen=True, eq=False)
class HalfPartitionSet:
    n: int
    seed: int
    pairs: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __len__(self):
        return len(self.pairs)


def make_half_partitions(n: int, p: int = 10, seed: int = 0) -> HalfPartitionSet:
    """``p`` random splits of ``range(n)`` into I (ceil(n/2)) and J (floor(n/2))."""
    if n < 2:
        raise ValueError(f"need at least 2 rows to split in halves, got {n}")
    if p < 1:
        raise ValueError("p must be >= 1")
    rng = np.random.default_rng(seed)
    size_i = (n + 1) // 2
    pairs = []
    for _ in range(p):
        perm = rng.permutation(n)
        pairs.append((_frozen(perm[:size_i]), _frozen(perm[size_i:])))
    return HalfPartitionSet(n, seed, tuple(pairs))
