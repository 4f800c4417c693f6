"""Binary graph container, edge-list / label loaders and dataset statistics.

Graphs are immutable: a node count, a directedness flag and a set of
ordered dyads (i, j) with i != j.  Undirected graphs store both
orientations of every edge, so ``average_degree`` is ``len(edges) / n``
for both conventions.  Loaders re-index arbitrary node ids densely in
order of first appearance and keep the mapping for traceability.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


class EdgeListError(ValueError):
    """Raised for unreadable or malformed edge-list / label files."""


@dataclass(frozen=True)
class Graph:
    """Binary graph with no self-loops.

    ``edges`` holds ordered dyads.  For undirected graphs the set is
    closed under (i, j) <-> (j, i); use :meth:`canonical_edges` to get
    one representative per undirected pair.
    """

    n_nodes: int
    directed: bool
    edges: frozenset[tuple[int, int]]
    node_ids: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_nodes < 0:
            raise ValueError("n_nodes must be nonnegative")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {i}) not allowed")
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes):
                raise ValueError(f"edge ({i}, {j}) out of range [0, {self.n_nodes})")
        if not self.directed:
            for i, j in self.edges:
                if (j, i) not in self.edges:
                    raise ValueError(
                        f"undirected graph misses reverse of ({i}, {j})"
                    )

    @property
    def n_edges(self) -> int:
        """Number of stored ordered dyads."""
        return len(self.edges)

    def canonical_edges(self) -> set[tuple[int, int]]:
        """Edges with one representative per dyad (i < j if undirected)."""
        if self.directed:
            return set(self.edges)
        return {(i, j) for i, j in self.edges if i < j}

    def edge_array(self) -> np.ndarray:
        """Sorted (E, 2) int array of the stored ordered dyads."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        arr = np.array(sorted(self.edges), dtype=np.int64)
        return arr

    def adjacency(self) -> np.ndarray:
        """Dense N x N binary adjacency matrix."""
        a = np.zeros((self.n_nodes, self.n_nodes))
        if self.edges:
            arr = self.edge_array()
            a[arr[:, 0], arr[:, 1]] = 1.0
        return a

    @classmethod
    def from_pairs(cls, n_nodes: int, directed: bool,
                   pairs, node_ids=None) -> "Graph":
        """Build a graph from an iterable of (i, j) pairs.

        Duplicates are merged; for undirected graphs both orientations
        are stored.  Self-loops raise (use the loader to drop them).
        """
        edges = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            edges.add((i, j))
            if not directed:
                edges.add((j, i))
        return cls(n_nodes=n_nodes, directed=directed,
                   edges=frozenset(edges), node_ids=node_ids)


def load_edge_list(path, directed: bool) -> Graph:
    """Read a whitespace-separated "src dst" file into a :class:`Graph`.

    Node ids may be arbitrary tokens; they are re-indexed densely in
    order of first appearance ("#"-prefixed lines are comments).
    Duplicate edges are merged and self-loops dropped with a warning.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EdgeListError(f"cannot read edge list {path}: {exc}") from exc

    index: dict[str, int] = {}
    pairs: list[tuple[int, int]] = []
    n_self_loops = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(
                f"{path}:{lineno}: expected 'src dst', got {raw!r}"
            )
        src, dst = parts
        i = index.setdefault(src, len(index))
        j = index.setdefault(dst, len(index))
        if i == j:
            n_self_loops += 1
            continue
        pairs.append((i, j))
    if n_self_loops:
        logger.warning("%s: dropped %d self-loop(s)", path, n_self_loops)

    node_ids = tuple(sorted(index, key=index.get))
    return Graph.from_pairs(len(index), directed, pairs, node_ids=node_ids)


def load_labels(path, graph: Graph | None = None) -> np.ndarray:
    """Read a "node_id label" file into a dense int label array.

    Label tokens are densified to 0..C-1 in order of first appearance.
    When ``graph`` carries a node-id map the first column is matched
    against it; otherwise ids must be integers in [0, N).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise EdgeListError(f"cannot read labels {path}: {exc}") from exc

    id_map = None
    if graph is not None and graph.node_ids is not None:
        id_map = {tok: idx for idx, tok in enumerate(graph.node_ids)}

    entries: dict[int, int] = {}
    classes: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(
                f"{path}:{lineno}: expected 'node_id label', got {raw!r}"
            )
        tok, cls = parts
        if id_map is not None:
            if tok not in id_map:
                raise EdgeListError(f"{path}:{lineno}: unknown node id {tok!r}")
            node = id_map[tok]
        else:
            node = int(tok)
        entries[node] = classes.setdefault(cls, len(classes))

    n = graph.n_nodes if graph is not None else (max(entries) + 1 if entries else 0)
    if len(entries) != n:
        raise EdgeListError(
            f"{path}: labels cover {len(entries)} nodes, expected {n}"
        )
    labels = np.empty(n, dtype=np.int64)
    for node, cls in entries.items():
        if not 0 <= node < n:
            raise EdgeListError(f"{path}: node index {node} out of range")
        labels[node] = cls
    return labels


def average_degree(g: Graph) -> float:
    """Average degree: |arcs|/N directed, 2|edges|/N undirected.

    Both conventions reduce to ``len(g.edges) / N`` because undirected
    graphs store both orientations.
    """
    if g.n_nodes < 1:
        raise ValueError("average_degree needs at least one node")
    return len(g.edges) / g.n_nodes


def edge_homophily(g: Graph, labels: np.ndarray) -> float:
    """Fraction of edges whose endpoints share a class label."""
    labels = np.asarray(labels)
    if labels.shape != (g.n_nodes,):
        raise ValueError(
            f"labels cover {labels.shape[0]} nodes, graph has {g.n_nodes}"
        )
    if not g.edges:
        raise ValueError("edge_homophily undefined on an empty graph")
    arr = g.edge_array()
    return float(np.mean(labels[arr[:, 0]] == labels[arr[:, 1]]))


def graph_stats(g: Graph, labels: np.ndarray | None = None,
                features: np.ndarray | None = None) -> dict:
    """Dataset statistics row: N, average degree, homophily h, feature dim F.

    Missing columns are reported as None (rendered "-" by the CLI).
    """
    stats = {
        "n_nodes": g.n_nodes,
        "avg_degree": average_degree(g),
        "homophily": edge_homophily(g, labels) if labels is not None else None,
        "n_features": int(features.shape[1]) if features is not None else None,
    }
    return stats
