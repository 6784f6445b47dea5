import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dwlse.network import (
    NetworkTopology,
    TopologyError,
    from_edge_list,
    generate_geometric,
    max_degree,
    neighbors,
    to_edge_list,
)

from conftest import bfs_reachable


def test_line_neighbors():
    topo = NetworkTopology.line(3)
    assert neighbors(topo, 1) == {0, 2}
    assert neighbors(topo, 0) == {1}
    assert max_degree(topo) == 2


def test_complete_graph():
    topo = NetworkTopology.complete(4)
    assert all(len(neighbors(topo, s)) == 3 for s in range(4))
    assert max_degree(NetworkTopology.complete(7)) == 6


def test_star_degree():
    assert max_degree(NetworkTopology.star(19)) == 19


def test_neighbor_out_of_range():
    with pytest.raises(IndexError):
        neighbors(NetworkTopology.line(3), 3)


@pytest.mark.parametrize(
    "adj, msg",
    [
        ([[True]], "self-loops"),
        ([[False, True], [False, False]], "symmetric"),
        ([[False, False], [False, False]], "not connected"),
    ],
)
def test_invalid_topologies(adj, msg):
    with pytest.raises(TopologyError, match=msg):
        NetworkTopology(np.array(adj))


def test_single_node():
    topo = generate_geometric(1, 100.0, seed=0)
    assert topo.node_count == 1 and topo.edges() == []
    assert max_degree(topo) == 0


def test_two_nodes_within_radius():
    topo = generate_geometric(2, 20_000.0, (10_000.0, 8_000.0), seed=4)
    assert topo.edges() == [(0, 1)]


def test_reference_geometric_graph():
    topo = generate_geometric(20, 2000.0, (10_000.0, 8_000.0), seed=1)
    assert bfs_reachable(topo.adjacency) == set(range(20))
    for s, j in topo.edges():
        assert np.linalg.norm(topo.positions[s] - topo.positions[j]) <= 2000.0
    assert max_degree(topo) >= 1


def test_geometric_infeasible():
    with pytest.raises(TopologyError, match="no connected graph"):
        generate_geometric(30, 1.0, (1000.0, 1000.0), seed=0, max_retries=5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), J=st.integers(1, 15), radius=st.floats(0.35, 1.5))
def test_geometric_properties(seed, J, radius):
    topo = generate_geometric(J, radius, (1.0, 1.0), seed=seed)
    assert bfs_reachable(topo.adjacency) == set(range(J))
    for s in range(J):
        for j in neighbors(topo, s):
            assert s in neighbors(topo, j)
            assert s != j
    again = generate_geometric(J, radius, (1.0, 1.0), seed=seed)
    np.testing.assert_array_equal(again.adjacency, topo.adjacency)


def test_edge_list_round_trip():
    topo = generate_geometric(12, 0.5, (1.0, 1.0), seed=3)
    text = to_edge_list(topo)
    assert all(len(line.split()) == 2 for line in text.splitlines())
    assert from_edge_list(text, 12) == topo
    assert to_edge_list(NetworkTopology.line(3)) == "0 1\n1 2\n"
