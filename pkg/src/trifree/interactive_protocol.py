"""Interactive triangle finder in the coordinator and blackboard models.

The search walks the degree buckets between ``d_l`` and ``d_h``. In each bucket
it draws vertices that some player suspects to be in the bucket, approximates
their degree, keeps those whose estimate fits the bucket, samples edges around
each kept vertex and asks the players for an edge closing a sampled vee.

Iterations inside a bucket are independent given the tape, so they are
simulated in vectorised blocks. Vertex draws use the law of the permutation
sampler (uniform over the union of the players' candidate sets) and degree
estimates use the exact law of the declared round of ``approx_degree``; both
shortcuts are cross-checked against the message-level primitives in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .comm_runtime import (COORDINATOR, EDGE, NONE, VERTEX, Mode, MessageLedger, Protocol,
                           RandomTape, count)
from .graph_core import (EdgePartition, bucket_lower, bucket_upper, candidate_masks, codes_in,
                         thresholds_from_degree)
from .primitives import approx_distinct, phase1_bound, phase2_plan

SQRT3 = math.sqrt(3)


@dataclass(frozen=True)
class InteractiveConfig:
    epsilon: float = 1 / 3
    delta: float = 0.1
    d_known: float | None = None
    q_samples: int | None = None
    n_candidates: int | None = None
    block: int = 65536

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def log_term(self) -> float:
        return math.log(6 / self.delta)

    def candidate_cap(self, n: int) -> int:
        if self.n_candidates is not None:
            return self.n_candidates
        return max(1, math.ceil(self.log_term * 312 * math.log2(n) ** 2 / self.epsilon ** 2))

    def sample_budget(self, n: int, k: int) -> int:
        if self.q_samples is not None:
            return self.q_samples
        return max(1, math.ceil(self.log_term * 108 * math.log2(n) ** 2 * k / self.epsilon ** 2))

    def approx_error(self, n: int, k: int) -> float:
        return self.delta / (3 * self.sample_budget(n, k))

    def edge_probability(self, n: int, d_estimate: float) -> float:
        p = 4 * math.sqrt(self.log_term) * math.sqrt(12 * math.log2(n) / (self.epsilon * d_estimate / 3))
        return min(1.0, p)

    def edge_cap(self, n: int, d_estimate: float) -> float:
        p = self.edge_probability(n, d_estimate)
        return (1 + 18 / (d_estimate * p) * self.log_term) * SQRT3 * d_estimate * p


def in_window(i: int, value) -> np.ndarray:
    return (value >= bucket_lower(i) / SQRT3) & (value <= SQRT3 * bucket_upper(i))


def sample_uniform_from_btilde(partition: EdgePartition, i: int, tape: RandomTape,
                               ledger: MessageLedger | None = None, key=("alg1",)) -> int | None:
    """Permutation-first vertex of the union of the players' candidate sets."""
    ledger = ledger or MessageLedger(partition.n, partition.k)
    masks = candidate_masks(partition, i)
    priority = tape.uniform(key + (i,), np.arange(partition.n))
    best, best_v = math.inf, None
    for j in range(1, partition.k + 1):
        mine = np.flatnonzero(masks[j - 1])
        if len(mine) == 0:
            ledger.send(j, COORDINATOR, NONE, "alg1-sample")
            continue
        v = int(mine[np.argmin(priority[mine])])
        ledger.send(j, COORDINATOR, VERTEX, "alg1-sample")
        if priority[v] < best:
            best, best_v = priority[v], v
    return best_v


def _player_samples(partition: EdgePartition, v: int, d_estimate: float, config: InteractiveConfig,
                    tape: RandomTape, key) -> list[np.ndarray | None]:
    """Each player's share of the public edge sample at ``v``; ``None`` marks a refusal."""
    n = partition.n
    p = config.edge_probability(n, d_estimate)
    cap = config.edge_cap(n, d_estimate)
    out = []
    for j in range(1, partition.k + 1):
        nbrs = partition.neighbors(j, v)
        if p < 1:
            nbrs = nbrs[tape.uniform(key + (v,), nbrs) < p]
        out.append(None if len(nbrs) > cap else nbrs)
    return out


def sample_edges(partition: EdgePartition, v: int, d_estimate: float, config: InteractiveConfig,
                 tape: RandomTape, ledger: MessageLedger | None = None, key=("alg4",)) -> frozenset[tuple[int, int]]:
    if d_estimate <= 0:
        raise ValueError("degree estimate must be positive")
    ledger = ledger or MessageLedger(partition.n, partition.k)
    shares = _player_samples(partition, v, d_estimate, config, tape, key)
    bits, union = _post_shares(shares, ledger.mode is Mode.BLACKBOARD, ledger.encoding)
    for j, b in enumerate(bits, start=1):
        ledger.charge_bits(j, COORDINATOR, b, "alg4-edges")
    return frozenset((min(v, int(u)), max(v, int(u))) for u in union)


def _post_shares(shares, blackboard: bool, enc) -> tuple[list[int], np.ndarray]:
    bits, posted = [], set()
    for nbrs in shares:
        if nbrs is None:
            bits.append(1)
            continue
        nbrs = nbrs.tolist()
        if blackboard:
            nbrs = [u for u in nbrs if u not in posted]
        bits.append(enc.edge_list(len(nbrs)))
        posted.update(nbrs)
    return bits, np.array(sorted(posted), dtype=np.int64)


@dataclass
class _Round:
    """Cost and result of one sample-broadcast-reply exchange around a vertex."""

    player_bits: np.ndarray
    broadcast_bits: int
    witness: tuple[int, int, int] | None


def _closing_exchange(partition: EdgePartition, v: int, shares, blackboard: bool, enc) -> _Round:
    k, n = partition.k, partition.n
    bits, union = _post_shares(shares, blackboard, enc)
    player_bits = np.array(bits, dtype=np.int64)
    # on a blackboard the posts are already public
    broadcast = 0 if blackboard else enc.edge_list(len(union))
    witness = None
    if len(union) <= 12:
        pairs = list(combinations(union.tolist(), 2))
        for j in range(1, k + 1):
            held = partition.part_set(j)
            closer = next((pr for pr in pairs if pr in held), None)
            player_bits[j - 1] += 1 if closer is None else enc.edge
            if closer is not None and witness is None:
                witness = (v, *closer)
        return _Round(player_bits, broadcast, witness)
    iu, iw = np.triu_indices(len(union), 1)
    codes = union[iu] * n + union[iw]
    for j in range(1, k + 1):
        hits = codes_in(codes, partition.part_codes(j))
        if hits.any():
            first = int(np.argmax(hits))
            player_bits[j - 1] += enc.edge
            if witness is None:
                witness = (v, int(union[iu[first]]), int(union[iw[first]]))
        else:
            player_bits[j - 1] += 1
    return _Round(player_bits, broadcast, witness)


def find_triangle_vee_exchange(partition: EdgePartition, v: int, d_estimate: float, config: InteractiveConfig,
                               tape: RandomTape, ledger: MessageLedger, key=("alg4",)):
    """Sample edges at one candidate, broadcast them, collect closing edges."""
    shares = _player_samples(partition, v, d_estimate, config, tape, key)
    rnd = _closing_exchange(partition, v, shares, ledger.mode is Mode.BLACKBOARD, ledger.encoding)
    ledger.broadcast(count(math.ceil(d_estimate)), "alg4-edges")
    for j, b in enumerate(rnd.player_bits, start=1):
        ledger.charge_bits(j, COORDINATOR, int(b), "alg5-broadcast")
    ledger.broadcast_bits(rnd.broadcast_bits, "alg5-broadcast")
    return rnd.witness


class _BucketSearch:
    """Vectorised run of candidate generation and the vee search in one bucket."""

    def __init__(self, partition: EdgePartition, i: int, config: InteractiveConfig,
                 tape: RandomTape, ledger: MessageLedger, search: bool = True):
        self.partition, self.i, self.config, self.tape, self.ledger = partition, i, config, tape, ledger
        self.search = search
        self.blackboard = ledger.mode is Mode.BLACKBOARD
        enc = ledger.encoding
        n, k = partition.n, partition.k
        masks = candidate_masks(partition, i)
        self.cand = np.flatnonzero(masks.any(axis=0))
        self.alg1_bits = np.where(masks.any(axis=1), enc.vertex, 1)
        self.q = config.sample_budget(n, k)
        self.cap = config.candidate_cap(n)
        tau = config.approx_error(n, k)
        if len(self.cand) == 0:
            return
        dj = partition.local_degrees[:, self.cand]
        self.phase1_bits = np.where(dj > 0, enc.msb_index, 1).T
        d_prime = np.array([phase1_bound(col) for col in dj.T.tolist()])
        deg = partition.graph.deg[self.cand]
        plans, laws = {}, {}
        rows = []
        for dp, dv in zip(d_prime.tolist(), deg.tolist()):
            if dp not in plans:
                plans[dp] = phase2_plan(dp, k, SQRT3, tau)
            if (dp, dv) not in laws:
                laws[(dp, dv)] = plans[dp].round_distribution(dv)
            rows.append((plans[dp], laws[(dp, dv)]))
        width = max(len(p.guesses) for p, _ in rows)
        s = len(self.cand)
        self.cdf = np.ones((s, width))
        self.value = np.full((s, width), np.nan)
        self.experiments = np.zeros(s, dtype=np.int64)
        for row, (plan, law) in enumerate(rows):
            L = len(plan.guesses)
            self.cdf[row, :L] = np.cumsum(law)
            self.cdf[row, L - 1:] = 1.0
            self.value[row, :L] = [plan.value(r) for r in range(L)]
            self.experiments[row] = plan.experiments
        self.width = width
        self.keep = in_window(i, self.value)

    def _random_exchange(self, pos: int, r: int, t: int) -> _Round:
        v = int(self.cand[pos])
        shares = _player_samples(self.partition, v, float(self.value[pos, r]), self.config, self.tape,
                                 ("alg4", self.i, t))
        return _closing_exchange(self.partition, v, shares, self.blackboard, self.ledger.encoding)

    def _fill(self, codes: np.ndarray) -> None:
        """Tabulate the deterministic exchange (sampling probability 1) for new codes."""
        for code in np.unique(codes[~self.ready[codes]]).tolist():
            pos, r = divmod(code, self.width)
            v = int(self.cand[pos])
            shares = _player_samples(self.partition, v, float(self.value[pos, r]), self.config, self.tape, ("alg4",))
            # the exchange only depends on which players refuse
            pattern = (pos, tuple(x is None for x in shares))
            rnd = self._by_pattern.get(pattern)
            if rnd is None:
                rnd = _closing_exchange(self.partition, v, shares, self.blackboard, self.ledger.encoding)
                self._by_pattern[pattern] = rnd
            self.tab_player[code] = rnd.player_bits
            self.tab_bcast[code] = rnd.broadcast_bits
            if rnd.witness is not None:
                self.witnesses[code] = rnd.witness
                self.tab_found[code] = True
            self.ready[code] = True

    def _prepare_tables(self) -> None:
        size = len(self.cand) * self.width
        k, n, enc = self.partition.k, self.partition.n, self.ledger.encoding
        self.ready = np.zeros(size, dtype=bool)
        self.tab_found = np.zeros(size, dtype=bool)
        self.tab_player = np.zeros((size, k), dtype=np.int64)
        self.tab_bcast = np.zeros(size, dtype=np.int64)
        self.witnesses: dict[int, tuple[int, int, int]] = {}
        self._by_pattern: dict[tuple, _Round] = {}
        flat = self.value.ravel()
        self.random_code = np.array([not np.isnan(x) and self.config.edge_probability(n, x) < 1 for x in flat])
        self.est_bits = np.array([0 if np.isnan(x) else enc.count(math.ceil(x)) for x in flat], dtype=np.int64)

    def _search_block(self, codes: np.ndarray, offsets: np.ndarray):
        """Scan kept iterations in order; return (index of first success or None, bits, witness)."""
        k = self.partition.k
        det = ~self.random_code[codes]
        self._fill(codes[det])
        found = det & self.tab_found[codes]
        first = int(np.argmax(found)) if found.any() else len(codes)
        witness = self.witnesses[int(codes[first])] if first < len(codes) else None
        player = np.zeros(k, dtype=np.int64)
        bcast = 0
        for idx in np.flatnonzero(~det[:first]).tolist():
            code = int(codes[idx])
            rnd = self._random_exchange(code // self.width, code % self.width, int(offsets[idx]))
            player += rnd.player_bits
            bcast += rnd.broadcast_bits
            if rnd.witness is not None:
                first, witness = idx, rnd.witness
                break
        upto = codes[:first + 1]
        det_upto = upto[det[:first + 1]]
        player += self.tab_player[det_upto].sum(axis=0)
        bcast += int(self.tab_bcast[det_upto].sum())
        hit = first if witness is not None else None
        return hit, player, bcast, int(self.est_bits[upto].sum()), witness

    def run(self):
        """Return ``(witness, kept candidates as (vertex, estimate) pairs)``."""
        ledger, k, enc = self.ledger, self.partition.k, self.ledger.encoding
        tag = f"alg6-bucket-{self.i}/"
        if len(self.cand) == 0:
            for j, b in enumerate(self.alg1_bits, start=1):
                ledger.charge_bits(j, COORDINATOR, int(b), tag + "alg1-sample")
            ledger.new_round()
            return None, []
        self._prepare_tables()
        done, kept_total, kept = 0, 0, []
        block_id = 0
        while done < self.q:
            size = min(self.config.block, self.q - done)
            gen = self.tape.generator("alg6", self.i, block_id)
            block_id += 1
            pos = gen.integers(0, len(self.cand), size)
            r = (gen.random(size)[:, None] >= self.cdf[pos]).sum(axis=1)
            r = np.minimum(r, self.width - 1)
            is_kept = self.keep[pos, r]
            cum = kept_total + np.cumsum(is_kept)
            stop = size
            hit_cap = np.flatnonzero(is_kept & (cum >= self.cap))
            if len(hit_cap):
                stop = int(hit_cap[0]) + 1
            witness = None
            exch_bits = np.zeros(k, dtype=np.int64)
            bcast_bits = est_bits = 0
            if self.search:
                kept_idx = np.flatnonzero(is_kept[:stop])
                hit, exch_bits, bcast_bits, est_bits, witness = self._search_block(
                    pos[kept_idx] * self.width + r[kept_idx], done + kept_idx)
                if hit is not None:
                    stop = int(kept_idx[hit]) + 1
            pos, r, is_kept = pos[:stop], r[:stop], is_kept[:stop]
            if not self.search:
                kept.extend(zip(self.cand[pos[is_kept]].tolist(), self.value[pos[is_kept], r[is_kept]].tolist()))
            kept_total += int(is_kept.sum())
            done += stop
            phase1 = self.phase1_bits[pos].sum(axis=0)
            phase2 = int((self.experiments[pos] * (r + 1)).sum())
            for j in range(1, k + 1):
                ledger.charge_bits(j, COORDINATOR, int(self.alg1_bits[j - 1]) * stop, tag + "alg1-sample")
                ledger.charge_bits(j, COORDINATOR, int(phase1[j - 1]) + phase2, tag + "alg3-candidates")
                ledger.charge_bits(j, COORDINATOR, int(exch_bits[j - 1]), tag + "alg5-broadcast")
            ledger.broadcast_bits(enc.vertex * stop, tag + "alg1-sample")
            ledger.broadcast_bits(est_bits, tag + "alg4-edges")
            ledger.broadcast_bits(bcast_bits, tag + "alg5-broadcast")
            ledger.round += 2 * stop + int((r + 1).sum()) + 2 * int(is_kept.sum())
            if witness is not None:
                return witness, kept
            if kept_total >= self.cap:
                break
        return None, kept


def get_full_candidates(partition: EdgePartition, i: int, config: InteractiveConfig, tape: RandomTape,
                        ledger: MessageLedger | None = None) -> list[tuple[int, float]]:
    ledger = ledger or MessageLedger(partition.n, partition.k)
    return _BucketSearch(partition, i, config, tape, ledger, search=False).run()[1]


def find_triangle_vee(partition: EdgePartition, i: int, config: InteractiveConfig, tape: RandomTape,
                      ledger: MessageLedger | None = None):
    ledger = ledger or MessageLedger(partition.n, partition.k)
    return _BucketSearch(partition, i, config, tape, ledger).run()[0]


def bucket_range(lo: float, hi: float) -> list[int]:
    """Buckets ``i >= 1`` with ``d^-(B_i) >= lo`` and ``d^+(B_i) <= hi``."""
    out, i = [], 1
    while bucket_upper(i) <= hi:
        if bucket_lower(i) >= lo:
            out.append(i)
        i += 1
    return out


def estimate_average_degree(partition: EdgePartition, tape: RandomTape, ledger: MessageLedger,
                            tau: float) -> float:
    """2-approximation of ``d`` from the distinct-edge count across the players."""
    held = [partition.part_codes(j) for j in range(1, partition.k + 1)]
    est = approx_distinct(held, partition.n * partition.n, 2.0, tau, tape, ledger, ("alg6-degree",),
                          "alg6-degree")
    return 2 * est.value / partition.n


def find_triangle(partition: EdgePartition, config: InteractiveConfig, tape: RandomTape,
                  ledger: MessageLedger | None = None, meta: dict | None = None):
    ledger = ledger or MessageLedger(partition.n, partition.k)
    meta = meta if meta is not None else {}
    n = partition.n
    if partition.graph.m == 0:
        return None
    if config.d_known is not None:
        th = thresholds_from_degree(n, config.d_known, config.epsilon)
        lo, hi = th.d_l, th.d_h
    else:
        d_est = estimate_average_degree(partition, tape, ledger, config.delta / 6)
        th = thresholds_from_degree(n, d_est, config.epsilon)
        lo, hi = th.d_l / 2, 2 * th.d_h
        meta["d_estimate"] = d_est
    buckets = bucket_range(lo, hi)
    meta["buckets"] = buckets
    for i in buckets:
        witness = find_triangle_vee(partition, i, config, tape, ledger)
        if witness is not None:
            meta["bucket"] = i
            return witness
    return None


class FindTriangle(Protocol):
    name = "find_triangle"
    modes = (Mode.COORDINATOR, Mode.BLACKBOARD)

    def __init__(self, config: InteractiveConfig | None = None):
        self.config = config or InteractiveConfig()

    def run(self, partition, tape, ledger, meta):
        return find_triangle(partition, self.config, tape, ledger, meta)
