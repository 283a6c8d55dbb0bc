"""Centralised brute-force ground truth used by tests and instance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, NamedTuple

import networkx as nx

from .graph_core import Bucketing, Graph

EXACT_MATCHING_LIMIT = 24
EXACT_DISTANCE_LIMIT = 24


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class FarnessCertificate:
    packing: tuple[tuple[int, int, int], ...]
    edge_count: int
    exact_distance: int | None = None

    @property
    def packing_size(self) -> int:
        return len(self.packing)

    @property
    def epsilon_lower_bound(self) -> float:
        return self.packing_size / self.edge_count if self.edge_count else 0.0


@dataclass(frozen=True)
class VeeCertificate:
    source: int
    vees: tuple[tuple[int, int], ...] = field(default_factory=tuple)
    approximate: bool = False

    @property
    def count(self) -> int:
        return len(self.vees)


class ClosedVee(NamedTuple):
    source: int
    u: int
    w: int

    @property
    def closing_edge(self) -> tuple[int, int]:
        return (min(self.u, self.w), max(self.u, self.w))


def _adj_sets(graph: Graph) -> list[set[int]]:
    return [set(graph.adjacency(v).tolist()) for v in range(graph.n)]


def enumerate_triangles(graph: Graph) -> list[tuple[int, int, int]]:
    forward = [set() for _ in range(graph.n)]
    for u, v in graph.edge_array.tolist():
        forward[u].add(v)
    out = []
    for u, v in graph.edge_array.tolist():
        for w in forward[u] & forward[v]:
            out.append((u, v, w))
    out.sort()
    return out


def _neighbourhood_graph(graph: Graph, v: int) -> nx.Graph:
    nbrs = graph.adjacency(v).tolist()
    aux = nx.Graph()
    aux.add_nodes_from(nbrs)
    aux.add_edges_from((u, w) for u, w in combinations(nbrs, 2) if graph.has_edge(u, w))
    return aux


def max_disjoint_vees(graph: Graph, v: int, exact_matching_limit: int = EXACT_MATCHING_LIMIT) -> VeeCertificate:
    """Edge-disjoint vees at ``v`` as a matching on the neighbourhood graph."""
    aux = _neighbourhood_graph(graph, v)
    if graph.deg[v] <= exact_matching_limit:
        matching = nx.max_weight_matching(aux, maxcardinality=True)
        approximate = False
    else:
        matching, used = [], set()
        for u, w in sorted(tuple(sorted(e)) for e in aux.edges):
            if u not in used and w not in used:
                matching.append((u, w))
                used.update((u, w))
        approximate = True
    vees = tuple(sorted(tuple(sorted(e)) for e in matching))
    return VeeCertificate(v, vees, approximate)


def _full_vertex_threshold(graph: Graph, v: int, epsilon: float) -> float:
    return epsilon / (12 * math.log2(graph.n)) * graph.deg[v]


def is_full_vertex(graph: Graph, v: int, epsilon: float) -> bool:
    if graph.deg[v] < 1:
        raise ValueError("vertex has no incident edges")
    return max_disjoint_vees(graph, v).count >= _full_vertex_threshold(graph, v, epsilon)


def bucket_vee_count(graph: Graph, bucketing: Bucketing, i: int) -> int:
    return sum(max_disjoint_vees(graph, v).count for v in bucketing[i])


def is_full_bucket(graph: Graph, bucketing: Bucketing, i: int, epsilon: float) -> bool:
    if graph.m == 0 or i == 0:
        return False
    need = epsilon * graph.n * graph.average_degree / (2 * math.log2(graph.n))
    return bucket_vee_count(graph, bucketing, i) >= need


def full_buckets(graph: Graph, bucketing: Bucketing, epsilon: float) -> list[int]:
    return [i for i in range(len(bucketing)) if is_full_bucket(graph, bucketing, i, epsilon)]


def greedy_triangle_packing(graph: Graph, with_exact: bool = False) -> FarnessCertificate:
    used: set[tuple[int, int]] = set()
    packing = []
    for a, b, c in enumerate_triangles(graph):
        sides = ((a, b), (a, c), (b, c))
        if used.isdisjoint(sides):
            used.update(sides)
            packing.append((a, b, c))
    exact = exact_distance_to_triangle_free(graph) if with_exact else None
    return FarnessCertificate(tuple(packing), graph.m, exact)


def exact_distance_to_triangle_free(graph: Graph, limit: int = EXACT_DISTANCE_LIMIT) -> int:
    """Minimum number of deletions that leaves no triangle."""
    if graph.m > limit:
        raise TooLarge(f"{graph.m} edges exceeds the exhaustive limit {limit}")
    triangles = [frozenset({(a, b), (a, c), (b, c)}) for a, b, c in enumerate_triangles(graph)]
    if not triangles:
        return 0
    pool = sorted(set().union(*triangles))
    for size in range(1, len(pool) + 1):
        for cut in combinations(pool, size):
            cut = set(cut)
            if all(not cut.isdisjoint(t) for t in triangles):
                return size
    raise AssertionError("unreachable: deleting every triangle edge always works")


def find_closing_edges(graph: Graph, edges: Iterable[tuple[int, int]]) -> list[ClosedVee]:
    at: dict[int, list[int]] = {}
    for u, v in edges:
        at.setdefault(int(u), []).append(int(v))
        at.setdefault(int(v), []).append(int(u))
    out = []
    for v in sorted(at):
        for u, w in combinations(sorted(set(at[v])), 2):
            if graph.has_edge(u, w):
                out.append(ClosedVee(v, u, w))
    return out
