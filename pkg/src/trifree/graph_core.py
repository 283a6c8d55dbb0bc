"""Graphs, edge partitions, degree buckets and degree thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

BUCKET_BASE = 3


def _as_edge_array(edges, n: int) -> np.ndarray:
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    arr = arr.reshape(-1, 2)
    if (arr < 0).any() or (arr >= n).any():
        raise ValueError("edge endpoint out of range")
    if (arr[:, 0] == arr[:, 1]).any():
        raise ValueError("self-loops are not allowed")
    arr = np.sort(arr, axis=1)
    codes = np.unique(arr[:, 0] * n + arr[:, 1])
    return np.stack([codes // n, codes % n], axis=1)


def _csr(n: int, edge_array: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([edge_array[:, 0], edge_array[:, 1]])
    dst = np.concatenate([edge_array[:, 1], edge_array[:, 0]])
    order = np.lexsort((dst, src))
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst[order]


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Edges are stored as a lexicographically sorted ``(m, 2)`` array with
    ``u < v`` in every row, plus a CSR adjacency.
    """

    def __init__(self, n: int, edges: Iterable = ()):
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = int(n)
        self.edge_array = _as_edge_array(edges, self.n)
        self.indptr, self.indices = _csr(self.n, self.edge_array)
        self.deg = np.diff(self.indptr)

    @property
    def m(self) -> int:
        return len(self.edge_array)

    @property
    def average_degree(self) -> float:
        return 2 * self.m / self.n if self.n else 0.0

    @cached_property
    def edges(self) -> frozenset[tuple[int, int]]:
        return frozenset(map(tuple, self.edge_array.tolist()))

    @cached_property
    def edge_codes(self) -> np.ndarray:
        return self.edge_array[:, 0] * self.n + self.edge_array[:, 1]

    def adjacency(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        nbrs = self.adjacency(u)
        pos = np.searchsorted(nbrs, v)
        return bool(pos < len(nbrs) and nbrs[pos] == v)

    def has_edges(self, us, vs) -> np.ndarray:
        us, vs = np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)
        return codes_in(np.minimum(us, vs) * self.n + np.maximum(us, vs), self.edge_codes) & (us != vs)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph) and self.n == other.n
                and np.array_equal(self.edge_array, other.edge_array))

    __hash__ = None


def codes_in(query: np.ndarray, sorted_codes: np.ndarray) -> np.ndarray:
    """Membership of ``query`` in a sorted code array."""
    if len(sorted_codes) == 0:
        return np.zeros(np.shape(query), dtype=bool)
    pos = np.searchsorted(sorted_codes, query)
    pos = np.minimum(pos, len(sorted_codes) - 1)
    return sorted_codes[pos] == query


class EdgePartition:
    """Edge sets ``E_1..E_k`` of the k players. Players are numbered from 1."""

    def __init__(self, graph: Graph, parts, no_duplication: bool | None = None):
        self.graph = graph
        n = graph.n
        self._parts = tuple(_as_edge_array(p, n) for p in parts)
        if not self._parts:
            raise ValueError("need at least one player")
        codes = [p[:, 0] * n + p[:, 1] for p in self._parts]
        for c in codes:
            if not codes_in(c, graph.edge_codes).all():
                raise ValueError("part contains a non-edge")
        covered = np.unique(np.concatenate(codes)) if codes else np.zeros(0, np.int64)
        if len(covered) != graph.m:
            raise ValueError("parts do not cover every graph edge")
        disjoint = sum(map(len, codes)) == graph.m
        if no_duplication is None:
            no_duplication = disjoint
        elif no_duplication and not disjoint:
            raise ValueError("parts overlap but no_duplication was claimed")
        self.no_duplication = bool(no_duplication)
        self._codes = tuple(codes)

    @property
    def k(self) -> int:
        return len(self._parts)

    @property
    def n(self) -> int:
        return self.graph.n

    def part(self, j: int) -> np.ndarray:
        return self._parts[j - 1]

    def part_codes(self, j: int) -> np.ndarray:
        return self._codes[j - 1]

    @cached_property
    def _part_sets(self) -> tuple[frozenset[tuple[int, int]], ...]:
        return tuple(frozenset(map(tuple, p.tolist())) for p in self._parts)

    def part_set(self, j: int) -> frozenset[tuple[int, int]]:
        return self._part_sets[j - 1]

    @cached_property
    def local_degrees(self) -> np.ndarray:
        """``(k, n)`` array whose row ``j-1`` holds ``d^j(v)``."""
        out = np.zeros((self.k, self.n), dtype=np.int64)
        for j, p in enumerate(self._parts):
            out[j] = np.bincount(p.ravel(), minlength=self.n)
        return out

    @cached_property
    def _local_csr(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        return tuple(_csr(self.n, p) for p in self._parts)

    def neighbors(self, j: int, v: int) -> np.ndarray:
        indptr, indices = self._local_csr[j - 1]
        return indices[indptr[v]:indptr[v + 1]]

    def multiplicity(self) -> np.ndarray:
        """Number of players holding each graph edge, aligned with ``graph.edge_array``."""
        out = np.zeros(self.graph.m, dtype=np.int64)
        for c in self._codes:
            out += codes_in(self.graph.edge_codes, c)
        return out

    def __repr__(self) -> str:
        return f"EdgePartition(k={self.k}, n={self.n}, no_duplication={self.no_duplication})"


def bucket_index(degree: int) -> int:
    if degree < 0:
        raise ValueError("degree must be non-negative")
    i, bound = 0, 1
    while degree >= bound:
        i += 1
        bound *= BUCKET_BASE
    return i


def bucket_indices(degrees) -> np.ndarray:
    degrees = np.asarray(degrees, dtype=np.int64)
    out = np.zeros(degrees.shape, dtype=np.int64)
    bound = 1
    while (degrees >= bound).any():
        out += degrees >= bound
        bound *= BUCKET_BASE
    return out


def bucket_lower(i: int) -> float:
    """``d^-(B_i)``; zero for the singleton bucket."""
    return 0 if i == 0 else BUCKET_BASE ** (i - 1)


def bucket_upper(i: int) -> float:
    """``d^+(B_i)``."""
    return 1 if i == 0 else BUCKET_BASE ** i


def max_bucket_count(n: int) -> int:
    return int(math.floor(math.log(n, BUCKET_BASE) + 1e-12)) + 2 if n > 0 else 1


@dataclass(frozen=True)
class Bucketing:
    buckets: tuple[frozenset[int], ...]

    def lower(self, i: int) -> float:
        return bucket_lower(i)

    def upper(self, i: int) -> float:
        return bucket_upper(i)

    def __len__(self) -> int:
        return len(self.buckets)

    def __getitem__(self, i: int) -> frozenset[int]:
        return self.buckets[i] if i < len(self.buckets) else frozenset()


def compute_bucketing(graph: Graph) -> Bucketing:
    idx = bucket_indices(graph.deg)
    count = int(idx.max()) + 1 if graph.n else 1
    return Bucketing(tuple(frozenset(np.flatnonzero(idx == i).tolist()) for i in range(count)))


def candidate_masks(partition: EdgePartition, i: int) -> np.ndarray:
    """``(k, n)`` mask of ``B~_i^j``: vertices with ``3^(i-1)/k <= d^j(v) <= 3^i``."""
    dj = partition.local_degrees
    if i == 0:
        return np.zeros_like(dj, dtype=bool)
    lo, hi = bucket_lower(i) / partition.k, bucket_upper(i)
    return (dj >= lo) & (dj <= hi) & (dj > 0)


def local_bucket_candidates(partition: EdgePartition, player: int, i: int) -> frozenset[int]:
    if not 1 <= player <= partition.k:
        raise ValueError("player out of range")
    return frozenset(np.flatnonzero(candidate_masks(partition, i)[player - 1]).tolist())


class DegenerateThresholds(ValueError):
    pass


@dataclass(frozen=True)
class DegreeThresholds:
    d_l: float
    d_h: float
    epsilon: float


def thresholds_from_degree(n: int, d: float, epsilon: float) -> DegreeThresholds:
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    if d <= 0 or n < 2:
        raise ValueError("need a graph with at least one edge")
    d_l = epsilon * d / (2 * math.log2(n))
    d_h = math.sqrt(n * d / epsilon)
    if d_l > d_h:
        raise DegenerateThresholds(f"d_l={d_l:.4g} exceeds d_h={d_h:.4g}")
    return DegreeThresholds(d_l, d_h, epsilon)


def degree_thresholds(graph: Graph, epsilon: float) -> DegreeThresholds:
    if graph.m == 0:
        raise ValueError("need a graph with at least one edge")
    return thresholds_from_degree(graph.n, graph.average_degree, epsilon)


def find_triangle_in_edges(edges) -> tuple[int, int, int] | None:
    """Return the lexicographically first triangle spanned by ``edges``, if any."""
    adj: dict[int, set[int]] = {}
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            continue
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)
    for u in sorted(adj):
        higher = sorted(w for w in adj[u] if w > u)
        for a_pos, a in enumerate(higher):
            common = adj[a].intersection(higher[a_pos + 1:])
            if common:
                return (u, a, min(common))
    return None


# text formats

def write_graph(path, graph: Graph) -> None:
    lines = [f"{graph.n} {graph.m}"] + [f"{u} {v}" for u, v in graph.edge_array.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path) -> Graph:
    rows = Path(path).read_text().split("\n")
    n, m = map(int, rows[0].split())
    edges = [tuple(map(int, r.split())) for r in rows[1:] if r.strip()]
    if len(edges) != m:
        raise ValueError(f"header says {m} edges, found {len(edges)}")
    return Graph(n, edges)


def write_partition(path, partition: EdgePartition) -> None:
    holders: dict[tuple[int, int], list[int]] = {}
    for j in range(1, partition.k + 1):
        for e in partition.part(j).tolist():
            holders.setdefault(tuple(e), []).append(j)
    lines = [f"{u} {v} {','.join(map(str, holders[(u, v)]))}"
             for u, v in partition.graph.edge_array.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_partition(path, graph: Graph, k: int | None = None) -> EdgePartition:
    parts: dict[int, list[tuple[int, int]]] = {}
    for row in Path(path).read_text().split("\n"):
        if not row.strip():
            continue
        u, v, who = row.split()
        for j in who.split(","):
            parts.setdefault(int(j), []).append((int(u), int(v)))
    k = k or max(parts)
    return EdgePartition(graph, [parts.get(j, []) for j in range(1, k + 1)])
