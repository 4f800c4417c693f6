"""Cross-validation edge splits with negative sampling and adjacency masking.

A fold partitions the graph's dyads into train/validation/test positives
(the test blocks tile the edge set across folds) and samples an equal
number of negatives per phase, uniformly from the non-edges and disjoint
across phases.  Negatives live in the split so every model scores the
identical dyads.  For undirected graphs all bookkeeping is done on
canonical (i < j) dyads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .features import FeatureMatrix
from .graph import Graph

PHASES = ("train", "val", "test")


class SplitError(ValueError):
    """Raised when a split cannot be constructed as requested."""


def _dyad_array(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("dyad list must have shape (n, 2)")
    return arr


@dataclass(frozen=True)
class EdgeSplit:
    """One cross-validation fold of positive and negative dyads."""

    fold_index: int
    seed: int
    train_pos: np.ndarray
    val_pos: np.ndarray
    test_pos: np.ndarray
    train_neg: np.ndarray
    val_neg: np.ndarray
    test_neg: np.ndarray

    def __post_init__(self):
        for name in ("train_pos", "val_pos", "test_pos",
                     "train_neg", "val_neg", "test_neg"):
            object.__setattr__(self, name, _dyad_array(getattr(self, name)))

    def positives(self, phase: str) -> np.ndarray:
        self._check_phase(phase)
        return getattr(self, f"{phase}_pos")

    def negatives(self, phase: str) -> np.ndarray:
        self._check_phase(phase)
        return getattr(self, f"{phase}_neg")

    def heldout_dyads(self) -> np.ndarray:
        """All val/test dyads (positives and negatives), stacked."""
        return np.concatenate(
            [self.val_pos, self.test_pos, self.val_neg, self.test_neg], axis=0
        )

    @staticmethod
    def _check_phase(phase):
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}")

    def to_dict(self) -> dict:
        d = {"fold_index": self.fold_index, "seed": self.seed}
        for name in ("train_pos", "val_pos", "test_pos",
                     "train_neg", "val_neg", "test_neg"):
            d[name] = getattr(self, name).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EdgeSplit":
        return cls(
            fold_index=int(d["fold_index"]),
            seed=int(d["seed"]),
            train_pos=d["train_pos"],
            val_pos=d["val_pos"],
            test_pos=d["test_pos"],
            train_neg=d["train_neg"],
            val_neg=d["val_neg"],
            test_neg=d["test_neg"],
        )


def save_splits(path, splits: list[EdgeSplit]) -> None:
    """Write fold manifests as JSON for bit-exact reruns."""
    payload = {"folds": [s.to_dict() for s in splits]}
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_splits(path) -> list[EdgeSplit]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [EdgeSplit.from_dict(d) for d in payload["folds"]]


def _edge_codes(g: Graph) -> np.ndarray:
    """Sorted int64 codes i*N + j of the canonical edges."""
    n = g.n_nodes
    edges = g.canonical_edges()
    if not edges:
        return np.empty(0, dtype=np.int64)
    arr = np.array(sorted(edges), dtype=np.int64)
    return arr[:, 0] * n + arr[:, 1]


def _sample_negative_codes(g: Graph, n_needed: int, rng) -> np.ndarray:
    """Uniform non-edge dyads without replacement, by rejection sampling.

    Fails (with counts) when the graph is too dense for the request or
    the 100x attempt cap is exhausted.
    """
    n = g.n_nodes
    edge_codes = _edge_codes(g)
    n_pairs = n * (n - 1) if g.directed else n * (n - 1) // 2
    n_free = n_pairs - edge_codes.size
    if n_free < n_needed:
        raise SplitError(
            f"cannot sample {n_needed} negative dyads: only {n_free} non-edges exist"
        )
    if n_needed == 0:
        return np.empty(0, dtype=np.int64)

    max_attempts = 100 * n_needed
    attempts = 0
    accepted: list[np.ndarray] = []
    accepted_sorted = np.empty(0, dtype=np.int64)
    n_have = 0
    while n_have < n_needed and attempts < max_attempts:
        batch = min(max(2 * (n_needed - n_have), 64), max_attempts - attempts)
        i = rng.integers(0, n, size=batch)
        j = rng.integers(0, n, size=batch)
        attempts += batch
        ok = i != j
        i, j = i[ok], j[ok]
        if not g.directed:
            i, j = np.minimum(i, j), np.maximum(i, j)
        codes = i * n + j
        # first occurrence within the batch, in draw order
        _, first = np.unique(codes, return_index=True)
        codes = codes[np.sort(first)]
        fresh = ~np.isin(codes, edge_codes, assume_unique=False)
        fresh &= ~np.isin(codes, accepted_sorted)
        codes = codes[fresh][: n_needed - n_have]
        if codes.size:
            accepted.append(codes)
            n_have += codes.size
            accepted_sorted = np.sort(np.concatenate(accepted))
    if n_have < n_needed:
        raise SplitError(
            f"negative sampling exhausted {attempts} attempts "
            f"(cap {max_attempts}) with {n_have}/{n_needed} dyads found"
        )
    return np.concatenate(accepted)


def _codes_to_dyads(codes: np.ndarray, n: int) -> np.ndarray:
    out = np.empty((codes.size, 2), dtype=np.int64)
    out[:, 0] = codes // n
    out[:, 1] = codes % n
    return out


def split_edges(g: Graph, n_folds: int, val_fraction: float, seed: int) -> list[EdgeSplit]:
    """Shuffle the edges by ``seed`` and tile them into ``n_folds`` test blocks.

    Per fold, block f is test, ``round(val_fraction * E)`` edges of the
    remainder are validation and the rest train; negatives (one per
    positive) are sampled per fold from the non-edges, disjoint across
    the three phases.
    """
    if n_folds < 2:
        raise SplitError("n_folds must be >= 2")
    if not 0.0 <= val_fraction < 0.8:
        raise SplitError("val_fraction must lie in [0, 0.8)")
    edges = np.array(sorted(g.canonical_edges()), dtype=np.int64)
    n_edges = edges.shape[0]
    if n_edges < n_folds:
        raise SplitError(f"graph has {n_edges} edges, needs >= {n_folds}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n_edges)
    shuffled = edges[order]
    blocks = np.array_split(np.arange(n_edges), n_folds)
    n_val = int(round(val_fraction * n_edges))

    splits = []
    for fold, block in enumerate(blocks):
        in_test = np.zeros(n_edges, dtype=bool)
        in_test[block] = True
        test_pos = shuffled[in_test]
        remainder = shuffled[~in_test]
        val_pos = remainder[:n_val]
        train_pos = remainder[n_val:]

        fold_rng = np.random.default_rng([seed, fold])
        codes = _sample_negative_codes(g, n_edges, fold_rng)
        negs = _codes_to_dyads(codes, g.n_nodes)
        n_test, n_valp = test_pos.shape[0], val_pos.shape[0]
        splits.append(EdgeSplit(
            fold_index=fold,
            seed=seed,
            train_pos=train_pos,
            val_pos=val_pos,
            test_pos=test_pos,
            train_neg=negs[n_test + n_valp:],
            val_neg=negs[n_test:n_test + n_valp],
            test_neg=negs[:n_test],
        ))
    return splits


def check_split(g: Graph, split: EdgeSplit) -> None:
    """Validate the split invariants against its graph; raises on violation."""
    n = g.n_nodes
    canonical = g.canonical_edges()

    def codes(arr):
        return set((arr[:, 0] * n + arr[:, 1]).tolist())

    pos_sets = [codes(split.positives(p)) for p in PHASES]
    neg_sets = [codes(split.negatives(p)) for p in PHASES]
    if set().union(*pos_sets) != {i * n + j for i, j in canonical}:
        raise SplitError("positive phases do not cover the edge set")
    for a in range(3):
        for b in range(a + 1, 3):
            if pos_sets[a] & pos_sets[b]:
                raise SplitError("positive phases overlap")
            if neg_sets[a] & neg_sets[b]:
                raise SplitError("negative phases overlap")
    edge_code_set = {i * n + j for i, j in canonical}
    for p, s in zip(PHASES, neg_sets):
        if s & edge_code_set:
            raise SplitError(f"{p} negatives intersect the edge set")
        if len(s) != len(codes(split.positives(p))):
            raise SplitError(f"{p} negatives do not match positives in size")
    for arr in (split.train_neg, split.val_neg, split.test_neg):
        if arr.size and (arr[:, 0] == arr[:, 1]).any():
            raise SplitError("negative dyads contain a self-loop")


def masked_adjacency(g: Graph, split: EdgeSplit, phase: str) -> FeatureMatrix:
    """Dense N x N adjacency restricted to the phase-visible edges.

    train: train positives only; val: train + val; test: every edge.
    Rows serve as the structure-based node features.
    """
    EdgeSplit._check_phase(phase)
    parts = [split.train_pos]
    if phase in ("val", "test"):
        parts.append(split.val_pos)
    if phase == "test":
        parts.append(split.test_pos)
    dyads = np.concatenate(parts, axis=0)
    values = np.zeros((g.n_nodes, g.n_nodes))
    if dyads.size:
        values[dyads[:, 0], dyads[:, 1]] = 1.0
        if not g.directed:
            values[dyads[:, 1], dyads[:, 0]] = 1.0
    return FeatureMatrix(values=values, kind="structure")


def structure_features(g: Graph, split: EdgeSplit):
    """Per-phase masked adjacency rows, the structure-based feature."""
    from .features import PhaseFeatures

    return PhaseFeatures(
        train=masked_adjacency(g, split, "train"),
        val=masked_adjacency(g, split, "val"),
        test=masked_adjacency(g, split, "test"),
    )
