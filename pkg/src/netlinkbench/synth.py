"""Synthetic networks with planted overlapping communities.

Nodes carry Dirichlet membership vectors (one outgoing, one incoming for
directed graphs); a Gamma-distributed K x K affinity matrix sets the
edge density between communities (diagonal-only when assortative).  The
affinity is rescaled by a single bisection-calibrated constant so the
expected number of binary edges matches the requested average degree,
then the adjacency is drawn dyad-wise from a clipped Poisson.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

STRUCTURES = ("assortative", "disassortative")

BISECT_LO = 1e-9
BISECT_HI = 1e9
BISECT_RTOL = 1e-6


class GenerationError(ValueError):
    """Raised when a synthetic configuration cannot be realized."""


@dataclass(frozen=True)
class SynthConfig:
    n_nodes: int
    n_communities: int
    target_avg_degree: float
    structure: str
    alpha: float = 0.05
    gamma_shape: float = 1.0
    gamma_rate: float = 1.0
    directed: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_communities <= self.n_nodes:
            raise GenerationError("need N >= K >= 1")
        if self.target_avg_degree <= 0:
            raise GenerationError("target_avg_degree must be positive")
        if self.alpha <= 0:
            raise GenerationError("alpha must be positive")
        if self.structure not in STRUCTURES:
            raise GenerationError(f"structure must be one of {STRUCTURES}")


@dataclass(frozen=True)
class GroundTruth:
    """Planted parameters of a generated network.

    ``W`` is the calibrated affinity actually used for sampling;
    ``density_scale`` is the constant it was multiplied by (the raw
    Gamma draw is W / density_scale).
    """

    U: np.ndarray
    V: np.ndarray
    W: np.ndarray
    density_scale: float


def sample_memberships(n: int, k: int, alpha: float, rng,
                       directed: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Rows drawn from a symmetric Dirichlet via normalized Gamma draws.

    U and V are independent; undirected mode returns V = U.  Rows whose
    Gamma draws all underflow to zero are resampled.
    """
    if alpha <= 0:
        raise GenerationError("alpha must be positive")

    def draw():
        raw = rng.gamma(alpha, 1.0, size=(n, k))
        sums = raw.sum(axis=1)
        while np.any(sums == 0.0):
            dead = np.flatnonzero(sums == 0.0)
            raw[dead] = rng.gamma(alpha, 1.0, size=(dead.size, k))
            sums = raw.sum(axis=1)
        return raw / sums[:, None]

    u = draw()
    v = u if not directed else draw()
    return u, v


def sample_affinity(k: int, structure: str, shape: float, rate: float, rng) -> np.ndarray:
    """K x K community affinity: i.i.d. Gamma entries, diagonal-only if assortative."""
    if structure not in STRUCTURES:
        raise GenerationError(f"structure must be one of {STRUCTURES}")
    if structure == "assortative":
        return np.diag(rng.gamma(shape, 1.0 / rate, size=k))
    return rng.gamma(shape, 1.0 / rate, size=(k, k))


def rate_matrix(U, V, W) -> np.ndarray:
    """Dyad rate M[i, j] = sum_{k,l} U[i,k] V[j,l] W[k,l] (diagonal included)."""
    return U @ W @ V.T


def expected_rate(U, V, W, i: int, j: int) -> float:
    """Bilinear Poisson rate for one dyad."""
    return float(U[i] @ W @ V[j])


def _offdiag_rates(U, V, W, directed: bool) -> np.ndarray:
    m = rate_matrix(U, V, W)
    if not directed:
        m = 0.5 * (m + m.T)
    np.fill_diagonal(m, 0.0)
    return m


def calibrate_density(U, V, W, target_avg_degree: float,
                      directed: bool = True) -> tuple[np.ndarray, float]:
    """Scale W so the expected clipped edge count is N * target_avg_degree.

    Solves sum_{i != j} (1 - exp(-c * M_ij)) = N * <k> for c by bisection
    on [1e-9, 1e9] to relative tolerance 1e-6; returns (c * W, c).
    """
    n = U.shape[0]
    if target_avg_degree >= n - 1:
        raise GenerationError(
            f"target degree {target_avg_degree} unreachable with {n} nodes"
        )
    m = _offdiag_rates(U, V, W, directed)
    target_arcs = n * target_avg_degree
    n_reachable = np.count_nonzero(m)
    if n_reachable <= target_arcs:
        raise GenerationError(
            f"target of {target_arcs:.1f} expected arcs exceeds the "
            f"{n_reachable} dyads with positive rate"
        )

    def expected_arcs(c):
        return float(np.sum(-np.expm1(-c * m)))

    lo, hi = BISECT_LO, BISECT_HI
    if expected_arcs(lo) > target_arcs:
        raise GenerationError("target density below the bisection bracket")
    if expected_arcs(hi) < target_arcs:
        raise GenerationError("target density above the bisection bracket")
    while (hi - lo) > BISECT_RTOL * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if expected_arcs(mid) < target_arcs:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    return c * W, c


def generate(cfg: SynthConfig) -> tuple[Graph, GroundTruth]:
    """Sample one network and its planted parameters, deterministically."""
    rng = np.random.default_rng(cfg.seed)
    u, v = sample_memberships(cfg.n_nodes, cfg.n_communities, cfg.alpha, rng,
                              directed=cfg.directed)
    w = sample_affinity(cfg.n_communities, cfg.structure,
                        cfg.gamma_shape, cfg.gamma_rate, rng)
    w_scaled, scale = calibrate_density(u, v, w, cfg.target_avg_degree,
                                        directed=cfg.directed)
    m = _offdiag_rates(u, v, w_scaled, cfg.directed)

    if cfg.directed:
        a = np.minimum(rng.poisson(m), 1)
        src, dst = np.nonzero(a)
        pairs = np.column_stack([src, dst])
    else:
        iu = np.triu_indices(cfg.n_nodes, k=1)
        draws = np.minimum(rng.poisson(m[iu]), 1)
        hit = draws > 0
        pairs = np.column_stack([iu[0][hit], iu[1][hit]])

    g = Graph.from_pairs(cfg.n_nodes, cfg.directed, pairs)
    return g, GroundTruth(U=u, V=v, W=w_scaled, density_scale=scale)


def gt_scalar_feature(gt: GroundTruth) -> np.ndarray:
    """Hard community label per node: argmax of U, lowest index on ties."""
    return np.argmax(gt.U, axis=1).astype(np.int64)


def save_edge_list(path, g: Graph) -> None:
    """Write "src dst" lines, sorted, one stored dyad per line."""
    arr = g.edge_array()
    lines = [f"{i} {j}" for i, j in arr]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")


def save_labels(path, labels: np.ndarray) -> None:
    lines = [f"{i} {int(c)}" for i, c in enumerate(labels)]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""),
                          encoding="utf-8")


def save_ground_truth(out_dir, gt: GroundTruth, cfg: SynthConfig) -> None:
    """CSV triplet (U, V, W) plus a JSON sidecar with config and scale."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.savetxt(out_dir / "U.csv", gt.U, delimiter=",", fmt="%.17g")
    np.savetxt(out_dir / "V.csv", gt.V, delimiter=",", fmt="%.17g")
    np.savetxt(out_dir / "W.csv", gt.W, delimiter=",", fmt="%.17g")
    sidecar = {"config": asdict(cfg), "density_scale": gt.density_scale}
    (out_dir / "ground_truth.json").write_text(
        json.dumps(sidecar, indent=1, sort_keys=True), encoding="utf-8"
    )


def load_ground_truth(out_dir) -> tuple[GroundTruth, SynthConfig]:
    out_dir = Path(out_dir)
    u = np.loadtxt(out_dir / "U.csv", delimiter=",", ndmin=2)
    v = np.loadtxt(out_dir / "V.csv", delimiter=",", ndmin=2)
    w = np.loadtxt(out_dir / "W.csv", delimiter=",", ndmin=2)
    sidecar = json.loads((out_dir / "ground_truth.json").read_text(encoding="utf-8"))
    cfg = SynthConfig(**sidecar["config"])
    return GroundTruth(U=u, V=v, W=w, density_scale=sidecar["density_scale"]), cfg
