import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trifree.comm_runtime import Encoding, RandomTape, run_protocol
from trifree.graph_core import EdgePartition, Graph
from trifree.instance_gen import (PartitionStrategy, gen_bipartite_random, gen_disjoint_triangles,
                                  gen_tripartite_mu, partition_edges)
from trifree.simultaneous_protocol import (SimConfig, SimHigh, SimLow, SimOblivious, guess_range, high_cap,
                                           high_sample_size, low_cap, low_probabilities, sim_high, sim_low,
                                           sim_oblivious)


@pytest.fixture(scope="module")
def triangles():
    g = gen_disjoint_triangles(100, seed=0)
    return g, partition_edges(g, PartitionStrategy("random_assign", 4, 0))


@pytest.fixture(scope="module")
def dense_far():
    # n = 3000 with average degree close to sqrt(n)
    return gen_tripartite_mu(1000, 0.9, seed=0)


@pytest.mark.parametrize("make", [lambda d: SimHigh(d=d), lambda d: SimLow(d=d), lambda d: SimOblivious()])
def test_triangle_free_inputs(make):
    for s in range(10):
        g = gen_bipartite_random(300, 6, seed=s)
        p = partition_edges(g, PartitionStrategy("duplicate_to_all", 4, s))
        assert not run_protocol(p, make(g.average_degree), tape=s).found


def test_high_per_player_bound(dense_far):
    g = dense_far
    cfg = SimConfig()
    d = g.average_degree
    cap = high_cap(g.n, d, high_sample_size(g.n, d, cfg), cfg)
    enc = Encoding(g.n)
    for s in range(20):
        p = partition_edges(g, PartitionStrategy("random_assign", 4, s))
        out = sim_high(p, cfg, d, RandomTape(s))
        for j in range(1, 5):
            assert out.ledger.sent_by(j) <= cap * 2 * math.ceil(math.log2(g.n)) + enc.count(cap)


def test_high_success_dense(dense_far):
    g = dense_far
    found = 0
    for s in range(200):
        p = partition_edges(g, PartitionStrategy("random_assign", 4, s))
        found += sim_high(p, SimConfig(), g.average_degree, RandomTape(s)).found
    assert found >= 170


def test_high_needs_degree():
    with pytest.raises(ValueError):
        SimHigh()


def test_low_clamps_when_degree_small():
    p1, _ = low_probabilities(1000, 2.0, SimConfig())
    assert p1 == 1.0


def test_low_degenerates_to_r_edges(triangles):
    # with S = V every edge at an R vertex is sent
    g, p = triangles
    tape = RandomTape(5)
    proto = SimLow(d=2.0)
    sent = np.concatenate([m[0] for j in range(1, 5) for m in proto.message(p.part(j), g.n, 4, tape)])
    r_mask = tape.uniform("simlow-R", np.arange(g.n)) < low_probabilities(g.n, 2.0, SimConfig())[1]
    expect = g.edge_array[r_mask[g.edge_array[:, 0]] | r_mask[g.edge_array[:, 1]]]
    assert sorted(map(tuple, sent.tolist())) == sorted(map(tuple, expect.tolist()))


def test_low_success(triangles):
    g, p = triangles
    found = sum(sim_low(p, SimConfig(), g.average_degree, RandomTape(s)).found for s in range(200))
    assert found >= 170


def test_low_cap_formula():
    cfg = SimConfig(delta=0.1)
    c = 8 / 0.9
    assert low_cap(400, 4, cfg) == math.ceil(2 * c * c * (20 + 4) * 20)


def test_oblivious_empty_part_sends_nothing_useful():
    g = Graph(6, [(0, 1)])
    p = EdgePartition(g, [g.edge_array, []])
    out = sim_oblivious(p, SimConfig(), RandomTape(0))
    assert out.ledger.sent_by(2) == Encoding(6).edge_list(0)


@given(st.floats(1.0, 5000.0), st.floats(0.5, 1.0), st.integers(1, 16))
def test_guess_ladder_covers_degree(d, ratio, k):
    # a player's own estimate never exceeds d since its part is a subset of E
    n = 10 ** 5
    m_j = max(1, math.floor(ratio * d * n / 2))
    rng = guess_range(1, m_j, n, k, 1 / 3)
    if not rng.d_bar <= d <= 2 * rng.d_bar:
        return
    assert any(d <= g < 2 * d for g in rng.guesses)


def test_oblivious_success_sparse(triangles):
    g, p = triangles
    found = sum(sim_oblivious(p, SimConfig(), RandomTape(s)).found for s in range(200))
    assert found >= 160


def test_oblivious_success_dense(dense_far):
    g = dense_far
    found = 0
    for s in range(100):
        p = partition_edges(g, PartitionStrategy("random_assign", 4, s))
        found += sim_oblivious(p, SimConfig(), RandomTape(s)).found
    assert found >= 80


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(epsilon=0)
    with pytest.raises(ValueError):
        SimConfig(delta=1.5)


@pytest.mark.parametrize("make", [lambda: SimHigh(d=2.0), lambda: SimLow(d=2.0), lambda: SimOblivious()])
def test_message_depends_only_on_own_part(make, triangles):
    g, p = triangles
    proto = make()
    tape = RandomTape(3)
    before = proto.message(p.part(1), g.n, 4, tape)
    # rebuild the partition with everyone else's edges moved to player 4
    others = np.concatenate([p.part(j) for j in (2, 3, 4)])
    q = EdgePartition(g, [p.part(1), [], [], others])
    after = proto.message(q.part(1), g.n, 4, tape)
    assert all(np.array_equal(a[0], b[0]) and a[1:] == b[1:] for a, b in zip(before, after))


@pytest.mark.parametrize("make", [lambda d: SimHigh(d=d), lambda d: SimLow(d=d), lambda d: SimOblivious()])
def test_caps_rarely_bind_on_disjoint_triangles(make):
    hits = messages = 0
    for s in range(50):
        g = gen_disjoint_triangles(100, seed=s)
        p = partition_edges(g, PartitionStrategy("random_assign", 4, s))
        out = run_protocol(p, make(g.average_degree), tape=s)
        hits += out.meta["cap_hits"]
        messages += out.meta["messages"]
    assert hits / messages <= 0.1


@pytest.mark.parametrize("k", [2, 4, 8])
def test_duplication_cost_ratio(k):
    # duplicating each edge to a random nonempty subset multiplies traffic by the mean multiplicity
    g = gen_bipartite_random(2000, 6, seed=k)
    proto = SimLow(d=g.average_degree)
    bits = {}
    for kind in ("random_assign", "duplicate_to_all"):
        total = 0
        for s in range(20):
            p = partition_edges(g, PartitionStrategy(kind, k, s))
            total += run_protocol(p, proto, tape=s).bits
        bits[kind] = total
    expected = (1 - 2.0 ** -k) / (k / 2)
    assert bits["random_assign"] / bits["duplicate_to_all"] == pytest.approx(expected, rel=0.15)


def test_run_records_constants(triangles):
    g, p = triangles
    assert sim_high(p, SimConfig(c_high=5), 2.0, RandomTape(0)).meta["c_high"] == 5
    assert sim_oblivious(p, SimConfig(), RandomTape(0)).meta["oblivious_cap"] == 8
