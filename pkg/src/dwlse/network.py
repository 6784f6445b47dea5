"""Undirected sensor-network topologies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx
import numpy as np


class TopologyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    """Connected undirected graph over nodes ``0..J-1``.

    ``adjacency`` is a symmetric boolean matrix with an empty diagonal.
    ``positions`` (optional, ``(J, 2)`` in meters) records where geometric
    generation placed the nodes.
    """

    adjacency: np.ndarray
    positions: np.ndarray | None = None

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1] or adj.shape[0] < 1:
            raise TopologyError(f"adjacency must be a non-empty square matrix, got {adj.shape}")
        if np.any(np.diag(adj)):
            raise TopologyError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise TopologyError("adjacency must be symmetric")
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)
        if self.positions is not None:
            pos = np.array(self.positions, dtype=float)
            if pos.shape != (adj.shape[0], 2):
                raise TopologyError(f"positions must have shape ({adj.shape[0]}, 2)")
            pos.flags.writeable = False
            object.__setattr__(self, "positions", pos)
        if not nx.is_connected(self.graph()):
            raise TopologyError("topology is not connected")

    def __eq__(self, other):
        if not isinstance(other, NetworkTopology):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    @property
    def laplacian(self) -> np.ndarray:
        a = self.adjacency.astype(float)
        return np.diag(a.sum(axis=1)) - a

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(s, j)`` with ``s < j``, sorted."""
        s, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(s.tolist(), j.tolist()))

    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.adjacency.shape[0]))
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]]) -> NetworkTopology:
        adj = np.zeros((node_count, node_count), dtype=bool)
        for s, j in edges:
            if not (0 <= s < node_count and 0 <= j < node_count):
                raise TopologyError(f"edge ({s}, {j}) out of range for {node_count} nodes")
            adj[s, j] = adj[j, s] = True
        return cls(adj)

    @classmethod
    def line(cls, node_count: int) -> NetworkTopology:
        return cls.from_edges(node_count, ((i, i + 1) for i in range(node_count - 1)))

    @classmethod
    def star(cls, leaves: int) -> NetworkTopology:
        """Hub node 0 connected to ``leaves`` leaf nodes."""
        return cls.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)))

    @classmethod
    def complete(cls, node_count: int) -> NetworkTopology:
        return cls(~np.eye(node_count, dtype=bool))


def neighbors(topo: NetworkTopology, s: int) -> set[int]:
    """Nodes adjacent to ``s`` (never ``s`` itself)."""
    if not 0 <= s < topo.node_count:
        raise IndexError(f"node {s} out of range for {topo.node_count} nodes")
    return set(np.flatnonzero(topo.adjacency[s]).tolist())


def max_degree(topo: NetworkTopology) -> int:
    return int(topo.degrees.max())


def generate_geometric(
    node_count: int,
    radius: float,
    region: tuple[float, float] = (10_000.0, 8_000.0),
    seed: int = 0,
    max_retries: int = 1000,
) -> NetworkTopology:
    """Random geometric graph, redrawn until connected.

    Nodes are uniform in ``[0, width] x [0, height]`` and linked when their
    distance is at most ``radius``. Deterministic for a given seed.
    """
    if node_count < 1:
        raise TopologyError("node_count must be at least 1")
    if radius <= 0:
        raise TopologyError("radius must be positive")
    rng = np.random.default_rng(seed)
    width, height = region
    for _ in range(max_retries):
        pos = rng.uniform((0.0, 0.0), (width, height), size=(node_count, 2))
        dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
        adj = dist <= radius
        np.fill_diagonal(adj, False)
        if nx.is_connected(nx.from_numpy_array(adj.astype(int))):
            return NetworkTopology(adj, pos)
    raise TopologyError(
        f"no connected graph with {node_count} nodes, radius {radius} in region "
        f"{width}x{height} after {max_retries} draws"
    )


def to_edge_list(topo: NetworkTopology) -> str:
    """One ``"s j"`` line per edge, 0-based ids."""
    return "".join(f"{s} {j}\n" for s, j in topo.edges())


def from_edge_list(text: str, node_count: int | None = None) -> NetworkTopology:
    edges = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            s, j = line.split()
            edges.append((int(s), int(j)))
    if node_count is None:
        node_count = 1 + max((max(e) for e in edges), default=0)
    return NetworkTopology.from_edges(node_count, edges)
