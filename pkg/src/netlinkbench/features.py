"""Node feature construction and perturbation.

Features are dense N x F real matrices tagged with their provenance
(structure rows, external attributes, or a K-means cluster label).  The
perturbations used by the noise experiment (per-row entry shuffling,
scalar label randomization) are deterministic given a seed and operate
on copies.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

FEATURE_KINDS = ("structure", "attribute", "clustered")


class FeatureError(ValueError):
    """Raised for malformed feature files or invalid feature inputs."""


@dataclass(frozen=True)
class FeatureMatrix:
    """N x F real feature matrix with a provenance tag."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise FeatureError(f"feature matrix must be 2-D, got {values.ndim}-D")
        if not np.all(np.isfinite(values)):
            raise FeatureError("feature matrix contains non-finite entries")
        if self.kind not in FEATURE_KINDS:
            raise FeatureError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "values", values)

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class PhaseFeatures:
    """Per-phase feature matrices for split-aware inputs.

    Structure-based features differ across train/val/test because the
    masked adjacency progressively reveals held-out links; static
    features repeat the same matrix.
    """

    train: FeatureMatrix
    val: FeatureMatrix
    test: FeatureMatrix

    @classmethod
    def static(cls, fm: FeatureMatrix) -> "PhaseFeatures":
        return cls(train=fm, val=fm, test=fm)

    def for_phase(self, phase: str) -> FeatureMatrix:
        if phase not in ("train", "val", "test"):
            raise ValueError(f"unknown phase {phase!r}")
        return getattr(self, phase)


@dataclass(frozen=True)
class KmeansResult:
    assignments: np.ndarray  # (N,) int cluster per row
    centroids: np.ndarray    # (k, F)
    inertia: float


def _as_values(X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    return np.asarray(X, dtype=np.float64)


def _sq_dists(x, centroids):
    # ||x - c||^2 via the expanded form; clip tiny negatives from cancellation
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * x @ centroids.T
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_init(x, k, rng):
    """Seed k centroids by D^2-weighted sampling."""
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    min_d2 = _sq_dists(x, centroids[:1])[:, 0]
    for c in range(1, k):
        total = min_d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=min_d2 / total))
        centroids[c] = x[idx]
        min_d2 = np.minimum(min_d2, _sq_dists(x, centroids[c : c + 1])[:, 0])
    return centroids


def _lloyd(x, centroids, max_iter):
    """Lloyd iterations to an assignment fixpoint; returns a local optimum."""
    n, k = x.shape[0], centroids.shape[0]
    assignments = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        d2 = _sq_dists(x, centroids)
        new_assign = np.argmin(d2, axis=1)
        min_d2 = d2[np.arange(n), new_assign]
        # re-seed empty clusters from the farthest point
        counts = np.bincount(new_assign, minlength=k)
        for c in np.flatnonzero(counts == 0):
            idx = int(np.argmax(min_d2))
            centroids[c] = x[idx]
            new_assign[idx] = c
            min_d2[idx] = 0.0
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for c in range(k):
            members = x[assignments == c]
            if len(members):
                centroids[c] = members.mean(axis=0)
    d2 = _sq_dists(x, centroids)
    assignments = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(n), assignments].sum())
    return assignments, centroids, inertia


def kmeans(X, k: int, seed, max_iter: int = 300, n_init: int = 10) -> KmeansResult:
    """Best-of-``n_init`` K-means with k-means++ seeding.

    ``k`` is reduced (with a warning) when the data has fewer distinct
    rows than requested clusters.
    """
    x = _as_values(X)
    if x.shape[0] == 0:
        raise FeatureError("kmeans needs at least one row")
    if k < 1:
        raise FeatureError("kmeans needs k >= 1")
    n_distinct = np.unique(x, axis=0).shape[0]
    if k > n_distinct:
        logger.warning("kmeans: reducing k from %d to %d distinct rows", k, n_distinct)
        k = n_distinct

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        centroids = _kmeanspp_init(x, k, rng)
        assignments, centroids, inertia = _lloyd(x, centroids.copy(), max_iter)
        if best is None or inertia < best.inertia:
            best = KmeansResult(assignments, centroids, inertia)
    return best


def clustered_feature(X, k: int, seed) -> FeatureMatrix:
    """Reduce features to the single K-means cluster label (F = 1)."""
    result = kmeans(X, k, seed)
    values = result.assignments.astype(np.float64).reshape(-1, 1)
    return FeatureMatrix(values=values, kind="clustered")


def _select_nodes(n: int, rho: float, rng) -> np.ndarray:
    if not 0.0 <= rho <= 1.0:
        raise FeatureError(f"rho must be in [0, 1], got {rho}")
    n_pick = math.ceil(rho * n)
    if n_pick == 0:
        return np.empty(0, dtype=np.int64)
    return np.sort(rng.choice(n, size=n_pick, replace=False))


def shuffle_features(X: FeatureMatrix, rho: float, seed, return_nodes: bool = False):
    """Independently permute the entries of ceil(rho*N) random rows.

    Unselected rows are bit-identical to the input; each selected row
    keeps its multiset of values.
    """
    rng = np.random.default_rng(seed)
    values = X.values.copy()
    selected = _select_nodes(values.shape[0], rho, rng)
    for i in selected:
        values[i] = values[i, rng.permutation(values.shape[1])]
    out = FeatureMatrix(values=values, kind=X.kind)
    if return_nodes:
        return out, selected
    return out


def randomize_scalar(labels: np.ndarray, rho: float, Z: int,
                     seed, return_nodes: bool = False):
    """Replace ceil(rho*N) random labels by uniform draws from [0, Z).

    Replacement values may coincide with the originals.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if Z < 1:
        raise FeatureError("Z must be >= 1")
    if labels.size and (labels.min() < 0 or labels.max() >= Z):
        raise FeatureError(f"labels must lie in [0, {Z})")
    rng = np.random.default_rng(seed)
    out = labels.copy()
    selected = _select_nodes(labels.shape[0], rho, rng)
    if selected.size:
        out[selected] = rng.integers(0, Z, size=selected.size)
    if return_nodes:
        return out, selected
    return out


def _split_cells(line: str) -> list[str]:
    return [c.strip() for c in line.split(",")] if "," in line else line.split()


def load_features(path, graph=None) -> FeatureMatrix:
    """Read a numeric CSV (comma or whitespace separated) of node features.

    An optional leading node-id column is matched against the graph's
    id map; otherwise rows are taken in node order.  Row count must
    match the graph when one is given.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FeatureError(f"cannot read features {path}: {exc}") from exc

    rows = []
    ids = []
    has_ids = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = _split_cells(line)
        if has_ids is None:
            try:
                float(cells[0])
                has_ids = False
            except ValueError:
                has_ids = True
        if has_ids:
            if len(cells) < 2:
                raise FeatureError(f"{path}:{lineno}: id row needs >= 1 feature")
            ids.append(cells[0])
            cells = cells[1:]
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise FeatureError(f"{path}:{lineno}: non-numeric cell ({exc})") from exc

    if not rows:
        raise FeatureError(f"{path}: no feature rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise FeatureError(f"{path}: inconsistent column counts {sorted(widths)}")
    values = np.asarray(rows, dtype=np.float64)

    if has_ids:
        if graph is None or graph.node_ids is None:
            raise FeatureError(f"{path}: id column present but no id map available")
        id_map = {tok: idx for idx, tok in enumerate(graph.node_ids)}
        ordered = np.empty_like(values)
        seen = np.zeros(len(id_map), dtype=bool)
        for tok, row in zip(ids, values):
            if tok not in id_map:
                raise FeatureError(f"{path}: unknown node id {tok!r}")
            ordered[id_map[tok]] = row
            seen[id_map[tok]] = True
        if not seen.all():
            raise FeatureError(f"{path}: features missing for {int((~seen).sum())} node(s)")
        values = ordered

    if graph is not None and values.shape[0] != graph.n_nodes:
        raise FeatureError(
            f"{path}: {values.shape[0]} feature rows but graph has {graph.n_nodes} nodes"
        )
    return FeatureMatrix(values=values, kind="attribute")
