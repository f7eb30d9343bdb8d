"""Random geometric wireless topologies with interface conflict graphs.

Nodes are placed uniformly in a square sized so the point density matches
the requested value; links form between nodes within unit distance. The
conflict graph is the line graph of the connectivity graph (two links
conflict iff they share an endpoint, i.e. one radio per node).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

RATE_LOW = 10.0
RATE_HIGH = 42.0
RATE_NOISE_STD = 3.0
RATE_TRUNC = 9


class GenerationError(RuntimeError):
    """Raised when no connected placement is found within the retry cap."""


@dataclass
class NetworkInstance:
    """A static wireless network: geometry, links, conflicts, link rates.

    Immutable after construction; safe to share across parallel runs.
    Directed link d is encoded as 2*e (u->v) or 2*e+1 (v->u) for
    undirected link e = (u, v) with u < v.
    """

    positions: np.ndarray          # (N, 2) float
    links: np.ndarray              # (E, 2) int, u < v
    conflict_adjacency: list       # per link, int array of conflicting links
    long_term_rates: np.ndarray    # (E,) float in [10, 42]
    seed: int
    side: float

    # derived lookup tables, filled in __post_init__
    neighbors: list = field(default_factory=list, repr=False)
    out_dir_ids: list = field(default_factory=list, repr=False)
    dir_sender: np.ndarray = None
    dir_receiver: np.ndarray = None
    dir_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = len(self.positions)
        self.neighbors = [[] for _ in range(n)]
        self.out_dir_ids = [[] for _ in range(n)]
        for e, (u, v) in enumerate(self.links):
            self.neighbors[u].append(v)
            self.neighbors[v].append(u)
            self.out_dir_ids[u].append(2 * e)
            self.out_dir_ids[v].append(2 * e + 1)
        self.neighbors = [np.array(x, dtype=np.int64) for x in self.neighbors]
        self.out_dir_ids = [np.array(x, dtype=np.int64) for x in self.out_dir_ids]
        ndir = 2 * len(self.links)
        self.dir_sender = np.empty(ndir, dtype=np.int64)
        self.dir_receiver = np.empty(ndir, dtype=np.int64)
        self.dir_sender[0::2] = self.links[:, 0]
        self.dir_receiver[0::2] = self.links[:, 1]
        self.dir_sender[1::2] = self.links[:, 1]
        self.dir_receiver[1::2] = self.links[:, 0]
        self.dir_index = {}
        for e, (u, v) in enumerate(self.links):
            self.dir_index[(int(u), int(v))] = 2 * e
            self.dir_index[(int(v), int(u))] = 2 * e + 1

    @property
    def node_count(self) -> int:
        return len(self.positions)

    @property
    def link_count(self) -> int:
        return len(self.links)

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": int(self.seed),
                "side": float(self.side),
                "positions": self.positions.tolist(),
                "links": self.links.tolist(),
                "long_term_rates": self.long_term_rates.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "NetworkInstance":
        d = json.loads(text)
        links = np.array(d["links"], dtype=np.int64).reshape(-1, 2)
        return cls(
            positions=np.array(d["positions"], dtype=float),
            links=links,
            conflict_adjacency=line_graph_adjacency(links),
            long_term_rates=np.array(d["long_term_rates"], dtype=float),
            seed=int(d["seed"]),
            side=float(d["side"]),
        )


@dataclass
class RateSample:
    """Per-link realized rates for one slot (one value per undirected link)."""

    slot: int
    rates: np.ndarray  # (E,) int, >= 1


@dataclass
class BiasTable:
    """Shortest-path biases B[i, c] under rate-derived edge weights."""

    B: np.ndarray            # (N, N) float, B[i, c]
    edge_weights: np.ndarray  # (E,) float


def line_graph_adjacency(links: np.ndarray) -> list:
    """Conflict adjacency under the interface model: links sharing a node."""
    n_links = len(links)
    incident = {}
    for e, (u, v) in enumerate(links):
        incident.setdefault(int(u), []).append(e)
        incident.setdefault(int(v), []).append(e)
    adj = [set() for _ in range(n_links)]
    for es in incident.values():
        for a in es:
            for b in es:
                if a != b:
                    adj[a].add(b)
    return [np.array(sorted(s), dtype=np.int64) for s in adj]


def _links_within_unit(positions: np.ndarray, side: float) -> np.ndarray:
    diff = positions[:, None, :] - positions[None, :, :]
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    u, v = np.nonzero(np.triu(dist2 <= 1.0, k=1))
    return np.stack([u, v], axis=1).astype(np.int64)


def _is_connected(n: int, links: np.ndarray) -> bool:
    if n == 1:
        return True
    if len(links) == 0:
        return False
    m = csr_matrix(
        (np.ones(len(links)), (links[:, 0], links[:, 1])), shape=(n, n)
    )
    ncomp, _ = connected_components(m, directed=False)
    return ncomp == 1


def generate_network(
    node_count: int, density: float, seed: int, max_tries: int = 1000
) -> NetworkInstance:
    """Generate a connected random geometric network.

    Positions are resampled wholesale (advancing the RNG) until the unit-disk
    graph is connected, preserving the uniform point process conditioned on
    connectivity. Long-term link rates ~ U(10, 42) are drawn once the
    placement is accepted. Deterministic for a fixed seed.
    """
    if node_count < 2:
        raise ValueError("node_count must be >= 2")
    if density <= 0:
        raise ValueError("density must be positive")
    rng = np.random.default_rng(seed)
    side = float(np.sqrt(node_count / density))
    for _ in range(max_tries):
        positions = rng.uniform(0.0, side, size=(node_count, 2))
        links = _links_within_unit(positions, side)
        if _is_connected(node_count, links):
            rates = rng.uniform(RATE_LOW, RATE_HIGH, size=len(links))
            return NetworkInstance(
                positions=positions,
                links=links,
                conflict_adjacency=line_graph_adjacency(links),
                long_term_rates=rates,
                seed=seed,
                side=side,
            )
    raise GenerationError(
        f"no connected placement in {max_tries} tries "
        f"(node_count={node_count}, density={density})"
    )


def _clamped_rates(long_term: np.ndarray, raw: np.ndarray) -> np.ndarray:
    base = np.rint(long_term)
    r = np.rint(raw)
    r = np.clip(r, base - RATE_TRUNC, base + RATE_TRUNC)
    return np.maximum(r, 1).astype(np.int64)


def sample_link_rates(network: NetworkInstance, slot: int, rng) -> RateSample:
    """One realized rate per undirected link: round(N(r_e, 3)) clamped to
    round(r_e) +/- 9 and floored at 1."""
    raw = rng.normal(network.long_term_rates, RATE_NOISE_STD)
    return RateSample(slot=slot, rates=_clamped_rates(network.long_term_rates, raw))


def sample_rate_matrix(network: NetworkInstance, steps: int, rng) -> np.ndarray:
    """(steps, E) realized rates, one independent draw per link per step."""
    raw = rng.normal(
        network.long_term_rates, RATE_NOISE_STD, size=(steps, network.link_count)
    )
    return _clamped_rates(
        np.broadcast_to(network.long_term_rates, raw.shape), raw
    )


def compute_biases(network: NetworkInstance) -> BiasTable:
    """All-pairs shortest paths under edge weights mean(r)*max(r)/r_e."""
    r = network.long_term_rates
    weights = r.mean() * r.max() / r
    n = network.node_count
    m = csr_matrix(
        (weights, (network.links[:, 0], network.links[:, 1])), shape=(n, n)
    )
    dist = shortest_path(m, directed=False)
    if not np.all(np.isfinite(dist)):
        raise RuntimeError("disconnected network handed to compute_biases")
    return BiasTable(B=dist, edge_weights=weights)
