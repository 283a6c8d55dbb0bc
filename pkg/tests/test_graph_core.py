import math

import numpy as np
import pytest

from trifree.graph_core import (DegenerateThresholds, EdgePartition, Graph, bucket_index, bucket_indices,
                                candidate_masks, compute_bucketing, find_triangle_in_edges,
                                local_bucket_candidates, read_graph, read_partition, thresholds_from_degree,
                                write_graph, write_partition)

from conftest import complete, cycle, star


def test_graph_normalises_edges():
    g = Graph(4, [(2, 1), (1, 2), (0, 3)])
    assert g.edge_array.tolist() == [[0, 3], [1, 2]]
    assert g.deg.tolist() == [1, 1, 1, 1]
    assert g.has_edge(2, 1) and not g.has_edge(0, 1)


@pytest.mark.parametrize("edges", [[(0, 0)], [(0, 5)], [(-1, 2)]])
def test_graph_rejects_bad_edges(edges):
    with pytest.raises(ValueError):
        Graph(5, edges)


def test_partition_must_cover_graph():
    g = cycle(4)
    with pytest.raises(ValueError):
        EdgePartition(g, [g.edge_array[:2]])


def test_partition_rejects_non_edges():
    g = cycle(4)
    with pytest.raises(ValueError):
        EdgePartition(g, [g.edge_array, [(0, 2)]])


def test_partition_disjointness_claim():
    g = cycle(4)
    with pytest.raises(ValueError):
        EdgePartition(g, [g.edge_array, g.edge_array[:1]], no_duplication=True)
    p = EdgePartition(g, [g.edge_array, g.edge_array[:1]])
    assert not p.no_duplication
    assert p.multiplicity().tolist() == [2, 1, 1, 1]


def test_local_degrees_and_neighbors():
    g = star(4)
    p = EdgePartition(g, [[(0, 1), (0, 2)], [(0, 3), (0, 4)]])
    assert p.local_degrees[:, 0].tolist() == [2, 2]
    assert p.neighbors(2, 0).tolist() == [3, 4]


def test_bucket_index_small_values():
    assert bucket_index(0) == 0
    assert [bucket_index(x) for x in (1, 2, 3)] == [1, 1, 2]


def test_bucket_index_27():
    # 3^3 <= 27 < 3^4
    assert bucket_index(27) == 4


def test_bucket_indices_match_scalar():
    xs = np.arange(0, 500)
    assert bucket_indices(xs).tolist() == [bucket_index(int(x)) for x in xs]


def test_bucketing_empty_graph():
    b = compute_bucketing(Graph(5))
    assert b[0] == frozenset(range(5))


def test_bucketing_cycle():
    b = compute_bucketing(cycle(5))
    assert b[1] == frozenset(range(5))


def test_bucketing_star():
    b = compute_bucketing(star(9))
    assert b[3] == {0}
    assert b[1] == frozenset(range(1, 10))


def test_candidates_k1_cover_bucket():
    g = Graph(30, [(0, i) for i in range(1, 11)] + [(1, 2)])
    p = EdgePartition(g, [g.edge_array])
    b = compute_bucketing(g)
    for i in range(1, len(b)):
        assert b[i] <= local_bucket_candidates(p, 1, i)


def test_candidates_split_vertex():
    # degree 10 split 5/5 over k=2: window [9/2, 27] holds 5
    g = star(10)
    p = EdgePartition(g, [[(0, i) for i in range(1, 6)], [(0, i) for i in range(6, 11)]])
    i = bucket_index(10)
    assert i == 3
    assert 0 in local_bucket_candidates(p, 1, i)
    assert 0 in local_bucket_candidates(p, 2, i)


def test_candidates_empty_part():
    g = star(3)
    p = EdgePartition(g, [g.edge_array, []])
    assert all(not local_bucket_candidates(p, 2, i) for i in range(1, 6))


def test_candidate_masks_shape():
    g = star(3)
    p = EdgePartition(g, [g.edge_array, []])
    assert candidate_masks(p, 1).shape == (2, 4)


def test_thresholds_example():
    th = thresholds_from_degree(10000, 100, 1.0)
    assert th.d_h == pytest.approx(1000)
    assert th.d_l == pytest.approx(50 / math.log2(10000))
    assert th.d_l == pytest.approx(3.76, abs=0.01)


@pytest.mark.parametrize("eps", [0.0, -1.0, 1.5])
def test_thresholds_reject_bad_epsilon(eps):
    with pytest.raises(ValueError):
        thresholds_from_degree(100, 4, eps)


def test_thresholds_degenerate():
    with pytest.raises(DegenerateThresholds):
        thresholds_from_degree(4, 10 ** 6, 1.0)


def test_find_triangle_in_edges():
    assert find_triangle_in_edges([(0, 1), (1, 2), (0, 2)]) == (0, 1, 2)
    assert find_triangle_in_edges(cycle(5).edge_array.tolist()) is None
    assert find_triangle_in_edges(complete(4).edge_array.tolist()) == (0, 1, 2)


def test_file_round_trip(tmp_path):
    g = complete(5)
    p = EdgePartition(g, [g.edge_array[:6], g.edge_array[4:]])
    write_graph(tmp_path / "g.txt", g)
    write_partition(tmp_path / "p.txt", p)
    g2 = read_graph(tmp_path / "g.txt")
    p2 = read_partition(tmp_path / "p.txt", g2)
    assert g2 == g
    assert all(np.array_equal(p.part(j), p2.part(j)) for j in (1, 2))


def test_partition_file_lists_holders(tmp_path):
    g = Graph(3, [(0, 1), (1, 2)])
    p = EdgePartition(g, [[(0, 1)], [(0, 1), (1, 2)]])
    write_partition(tmp_path / "p.txt", p)
    assert (tmp_path / "p.txt").read_text() == "0 1 1,2\n1 2 2\n"


def test_read_graph_checks_header(tmp_path):
    (tmp_path / "g.txt").write_text("3 2\n0 1\n")
    with pytest.raises(ValueError):
        read_graph(tmp_path / "g.txt")
