import itertools
import math

import numpy as np
import pytest

from trifree.graph_core import Graph
from trifree.instance_gen import (GeneratorSpec, MalformedMatching, PartitionStrategy, bhm_parity,
                                  embed_sparse, gen_bhm_reduction, gen_bipartite_random, gen_disjoint_triangles,
                                  gen_tripartite_mu, generate, mu_player_inputs, partition_edges)
from trifree.oracle import enumerate_triangles, exact_distance_to_triangle_free, greedy_triangle_packing

from conftest import complete


def perfect_matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for idx, partner in enumerate(rest):
        for tail in perfect_matchings(rest[:idx] + rest[idx + 1:]):
            yield [(first, partner)] + tail


def test_single_triangle():
    g = gen_disjoint_triangles(1)
    assert g == complete(3)


def test_fifty_triangles_packing():
    g = gen_disjoint_triangles(50, seed=3)
    assert greedy_triangle_packing(g).packing_size == 50
    assert len(enumerate_triangles(g)) == 50


def test_padding_arithmetic():
    g = gen_disjoint_triangles(2, pad=4)
    assert g.n == 10 and g.average_degree == pytest.approx(1.2)


def test_bipartite_is_triangle_free():
    for s in range(5):
        assert enumerate_triangles(gen_bipartite_random(120, 8, seed=s)) == []


def test_bipartite_density():
    g = gen_bipartite_random(100, 4, seed=0)
    assert 180 <= g.m <= 220
    assert abs(g.average_degree - 4) <= 0.4


def test_bipartite_empty():
    assert gen_bipartite_random(50, 0, seed=0).m == 0


def test_bipartite_rejects_impossible_density():
    with pytest.raises(ValueError):
        gen_bipartite_random(10, 9)


def test_mu_parts():
    s = 30
    g = gen_tripartite_mu(s, 0.5, seed=1)
    assert g.n == 3 * s
    side = g.edge_array // s
    assert (side[:, 0] != side[:, 1]).all()
    x1, x2, x3 = mu_player_inputs(g, s)
    assert len(x1) + len(x2) + len(x3) == g.m


def test_mu_small_gamma_is_sparse():
    assert gen_tripartite_mu(50, 1e-6, seed=0).m == 0


def test_mu_edge_count():
    s, gamma = 400, 0.9
    expected = 3 * s * s * gamma / math.sqrt(s)
    g = gen_tripartite_mu(s, gamma, seed=0)
    assert abs(g.m - expected) <= 0.05 * expected


@pytest.mark.parametrize("gamma", [0.0, 1.0, 2.0])
def test_mu_rejects_gamma(gamma):
    with pytest.raises(ValueError):
        gen_tripartite_mu(10, gamma)
    with pytest.raises(ValueError):
        GeneratorSpec("tripartite_mu", {"gamma": gamma})


def test_bhm_smallest_gadget():
    g, alice, bob = gen_bhm_reduction([0, 0], [(0, 1)], [0])
    assert g.n == 5
    assert len(enumerate_triangles(g)) == 1
    g, _, _ = gen_bhm_reduction([0, 0], [(0, 1)], [1])
    assert enumerate_triangles(g) == []


def test_bhm_parts():
    g, alice, bob = gen_bhm_reduction([1, 0, 0, 1], [(0, 3), (1, 2)], [0, 1])
    assert len(alice) == 4 and len(bob) == 4
    assert g.m == 8


@pytest.mark.parametrize("matching", [[(0, 0)], [(0, 1), (1, 2)], [(0, 5)]])
def test_bhm_bad_matching(matching):
    with pytest.raises(MalformedMatching):
        gen_bhm_reduction([0, 0], matching, [0])


def test_bhm_exhaustive_m3():
    m = 3
    for x in itertools.product((0, 1), repeat=2 * m):
        for matching in perfect_matchings(list(range(2 * m))):
            for w in itertools.product((0, 1), repeat=m):
                parity = bhm_parity(x, matching, w)
                if len(set(parity)) != 1:
                    continue
                g = gen_bhm_reduction(x, matching, w)[0]
                assert len(enumerate_triangles(g)) == (m if parity[0] == 0 else 0)


def test_embed_identity_and_degree():
    g = complete(3)
    assert embed_sparse(g, 3) == g
    e = embed_sparse(g, 300)
    assert e.average_degree == pytest.approx(6 / 300)
    with pytest.raises(ValueError):
        embed_sparse(g, 2)


def test_embed_keeps_distance(rng):
    for _ in range(20):
        g = Graph(6, [e for e in itertools.combinations(range(6), 2) if rng.random() < 0.5])
        assert exact_distance_to_triangle_free(embed_sparse(g, 40)) == exact_distance_to_triangle_free(g)
        assert enumerate_triangles(embed_sparse(g, 40)) == enumerate_triangles(g)


@pytest.mark.parametrize("kind", ["random_assign", "round_robin", "duplicate_to_all", "vertex_owner"])
def test_single_player_gets_everything(kind):
    g = gen_disjoint_triangles(5, seed=1)
    p = partition_edges(g, PartitionStrategy(kind, 1, 0))
    assert np.array_equal(p.part(1), g.edge_array)
    assert p.no_duplication == (kind != "duplicate_to_all")


def test_round_robin_sizes():
    g = gen_disjoint_triangles(2)
    p = partition_edges(g, PartitionStrategy("round_robin", 3))
    assert [len(p.part(j)) for j in (1, 2, 3)] == [2, 2, 2]


def test_duplicate_mean_multiplicity():
    g = gen_bipartite_random(400, 50, seed=0)
    assert g.m == 10 ** 4
    p = partition_edges(g, PartitionStrategy("duplicate_to_all", 4, 0))
    mean = p.multiplicity().mean()
    assert 2.0 <= mean <= 2.3
    assert mean == pytest.approx(2 / (1 - 2 ** -4), abs=0.05)


def test_vertex_owner_groups_by_smaller_endpoint():
    g = gen_bipartite_random(60, 6, seed=2)
    p = partition_edges(g, PartitionStrategy("vertex_owner", 3, 1))
    owner = {}
    for j in (1, 2, 3):
        for u, _ in p.part(j).tolist():
            assert owner.setdefault(u, j) == j


def test_strategy_validation():
    with pytest.raises(ValueError):
        PartitionStrategy("everyone", 2)
    with pytest.raises(ValueError):
        PartitionStrategy("round_robin", 0)


def test_generate_dispatch():
    assert generate(GeneratorSpec("disjoint_triangles", {"t": 3}, 1)).m == 9
    g = generate(GeneratorSpec("disjoint_triangles", seed=1), n=300, d=2)
    assert g.n == 300 and g.m == 300
    assert generate(GeneratorSpec("bipartite_random", seed=1), n=100, d=4).m == 200
    neg = generate(GeneratorSpec("bhm_reduction", {"parity": 1}, 0), n=41)
    assert neg.n == 41 and enumerate_triangles(neg) == []
    pos = generate(GeneratorSpec("bhm_reduction", {"parity": 0, "m": 5}, 0))
    assert len(enumerate_triangles(pos)) == 5
    emb = generate(GeneratorSpec("embedded_dense", {"inner": {"family": "tripartite_mu",
                                                             "params": {"side_size": 20}}}, 0), n=500)
    assert emb.n == 500
    with pytest.raises(ValueError):
        GeneratorSpec("lattice")
