"""Seeded generators for far, triangle-free and lower-bound inputs, plus edge partitions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import EdgePartition, Graph

PARTITION_KINDS = ("random_assign", "round_robin", "duplicate_to_all", "vertex_owner")
FAMILIES = ("disjoint_triangles", "bipartite_random", "tripartite_mu", "bhm_reduction", "embedded_dense")


class MalformedMatching(ValueError):
    pass


def _relabel(n: int, edges: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(n)
    return perm[edges] if len(edges) else edges


def gen_disjoint_triangles(t: int, pad: int = 0, seed: int | None = None) -> Graph:
    if t < 1:
        raise ValueError("need at least one triangle")
    base = 3 * np.arange(t)[:, None]
    edges = np.concatenate([base + [0, 1], base + [0, 2], base + [1, 2]])
    n = 3 * t + pad
    if seed is not None:
        edges = _relabel(n, edges, np.random.default_rng(seed))
    return Graph(n, edges)


def gen_bipartite_random(n: int, d: float, seed: int | None = None) -> Graph:
    """Uniform bipartite graph with exactly ``round(n d / 2)`` edges between two halves."""
    left = n // 2
    right = n - left
    m = int(round(n * d / 2))
    if m > left * right or d < 0:
        raise ValueError(f"average degree {d} is not achievable on {n} vertices")
    rng = np.random.default_rng(seed)
    codes = rng.choice(left * right, size=m, replace=False) if m else np.zeros(0, np.int64)
    edges = np.stack([codes // right, left + codes % right], axis=1)
    return Graph(n, edges)


def gen_tripartite_mu(side_size: int, gamma: float, seed: int | None = None) -> Graph:
    """Sides ``U, V1, V2`` of ``side_size`` vertices; each cross pair kept with probability gamma/sqrt(side)."""
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1)")
    if side_size < 3:
        raise ValueError("side_size must be at least 3")
    s = side_size
    p = gamma / math.sqrt(s)
    rng = np.random.default_rng(seed)
    blocks = []
    for a, b in ((0, 1), (0, 2), (1, 2)):
        keep = np.flatnonzero(rng.random(s * s) < p)
        blocks.append(np.stack([a * s + keep // s, b * s + keep % s], axis=1))
    return Graph(3 * s, np.concatenate(blocks))


def mu_player_inputs(graph: Graph, side_size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split a tripartite graph into (U x V1, U x V2, V1 x V2) edge arrays."""
    side = graph.edge_array // side_size
    pick = lambda a, b: graph.edge_array[(side[:, 0] == a) & (side[:, 1] == b)]
    return pick(0, 1), pick(0, 2), pick(1, 2)


def _check_matching(matching, size: int) -> list[tuple[int, int]]:
    pairs = [tuple(map(int, p)) for p in matching]
    flat = [x for p in pairs for x in p]
    if any(len(p) != 2 for p in pairs) or sorted(flat) != list(range(size)):
        raise MalformedMatching("matching must pair up every index exactly once")
    return pairs


def bhm_vertex(i: int, bit: int) -> int:
    """Vertex id of ``(i, bit)``; the hub ``u`` is vertex 0."""
    return 1 + 2 * i + bit


def bhm_parity(x, matching, w) -> list[int]:
    pairs = _check_matching(matching, len(x))
    return [(x[a] ^ x[b] ^ wj) for (a, b), wj in zip(pairs, w)]


def gen_bhm_reduction(x, matching, w) -> tuple[Graph, np.ndarray, np.ndarray]:
    """Graph of the hidden-matching reduction together with Alice's and Bob's edges."""
    x = [int(b) for b in x]
    w = [int(b) for b in w]
    if len(x) % 2 or len(w) != len(x) // 2:
        raise MalformedMatching("need |x| = 2m and |w| = m")
    pairs = _check_matching(matching, len(x))
    alice = [(0, bhm_vertex(i, xi)) for i, xi in enumerate(x)]
    bob = []
    for (a, b), wj in zip(pairs, w):
        for bit in (0, 1):
            bob.append((bhm_vertex(a, bit), bhm_vertex(b, bit ^ wj)))
    n = 1 + 2 * len(x)
    graph = Graph(n, alice + bob)
    return graph, np.sort(np.array(alice), axis=0), np.array(sorted(tuple(sorted(e)) for e in bob))


def embed_sparse(dense: Graph, n_total: int) -> Graph:
    if n_total < dense.n:
        raise ValueError("n_total must be at least the dense graph's size")
    return Graph(n_total, dense.edge_array)


@dataclass(frozen=True)
class PartitionStrategy:
    kind: str = "random_assign"
    k: int = 4
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in PARTITION_KINDS:
            raise ValueError(f"unknown partition kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be at least 1")


def partition_edges(graph: Graph, strategy: PartitionStrategy) -> EdgePartition:
    k, m = strategy.k, graph.m
    rng = np.random.default_rng(strategy.seed)
    edges = graph.edge_array
    if strategy.kind == "duplicate_to_all":
        holds = rng.random((m, k)) < 0.5
        empty = ~holds.any(axis=1)
        while empty.any():
            holds[empty] = rng.random((int(empty.sum()), k)) < 0.5
            empty = ~holds.any(axis=1)
        return EdgePartition(graph, [edges[holds[:, j]] for j in range(k)], no_duplication=False)
    if strategy.kind == "random_assign":
        owner = rng.integers(0, k, m)
    elif strategy.kind == "round_robin":
        owner = np.arange(m) % k
    else:
        owner = rng.integers(0, k, graph.n)[edges[:, 0]] if m else np.zeros(0, np.int64)
    return EdgePartition(graph, [edges[owner == j] for j in range(k)], no_duplication=True)


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.family == "tripartite_mu" and not 0 < self.params.get("gamma", 0.5) < 1:
            raise ValueError("gamma must lie in (0, 1)")


def random_bhm_input(m: int, parity: int, rng: np.random.Generator):
    """Random ``x`` and matching, with ``w`` chosen so that every entry of Mx xor w equals ``parity``."""
    x = rng.integers(0, 2, 2 * m).tolist()
    order = rng.permutation(2 * m)
    matching = [(int(order[2 * j]), int(order[2 * j + 1])) for j in range(m)]
    w = [x[a] ^ x[b] ^ parity for a, b in matching]
    return x, matching, w


def generate(spec: GeneratorSpec, n: int | None = None, d: float | None = None) -> Graph:
    """Build one instance; ``n`` and ``d`` come from an experiment grid cell when given."""
    p = dict(spec.params)
    if n is not None:
        p.setdefault("n", n)
    if d is not None:
        p.setdefault("d", d)
    fam, seed = spec.family, spec.seed
    if fam == "disjoint_triangles":
        if "t" in p:
            t = int(p["t"])
            total = int(p.get("n", 3 * t + int(p.get("pad", 0))))
        else:
            total = int(p["n"])
            t = min(total // 3, max(1, int(round(total * float(p.get("d", 2.0)) / 6))))
        return gen_disjoint_triangles(t, total - 3 * t, seed)
    if fam == "bipartite_random":
        return gen_bipartite_random(int(p["n"]), float(p.get("d", 4.0)), seed)
    if fam == "tripartite_mu":
        side = int(p.get("side_size", int(p.get("n", 300)) // 3))
        return gen_tripartite_mu(side, float(p.get("gamma", 0.5)), seed)
    if fam == "bhm_reduction":
        m = int(p.get("m", max(1, (int(p.get("n", 5)) - 1) // 4)))
        x, matching, w = random_bhm_input(m, int(p.get("parity", 1)), np.random.default_rng(seed))
        graph = gen_bhm_reduction(x, matching, w)[0]
        return embed_sparse(graph, max(graph.n, int(p.get("n", graph.n))))
    inner = GeneratorSpec(p["inner"]["family"], p["inner"].get("params", {}), seed)
    dense = generate(inner)
    return embed_sparse(dense, int(p.get("n", dense.n)))
