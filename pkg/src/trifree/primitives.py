"""Reusable sub-protocols: edge queries, samplers, walks, degree approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .comm_runtime import (BIT, COORDINATOR, EDGE, MSB_INDEX, NONE, VERTEX, Mode,
                           MessageLedger, RandomTape, edge_list)
from .graph_core import EdgePartition, codes_in


class NoEdge(ValueError):
    pass


class DuplicationPresent(ValueError):
    pass


def _null_ledger(partition: EdgePartition) -> MessageLedger:
    return MessageLedger(partition.n, partition.k)


def query_edge(partition: EdgePartition, e, ledger: MessageLedger | None = None) -> bool:
    ledger = ledger or _null_ledger(partition)
    u, v = sorted(map(int, e))
    code = u * partition.n + v
    answer = False
    for j in range(1, partition.k + 1):
        answer |= bool(codes_in(np.array([code]), partition.part_codes(j))[0])
        ledger.send(j, COORDINATOR, BIT, "query-edge")
    for j in range(1, partition.k + 1):
        ledger.charge_bits(COORDINATOR, j, 1, "query-edge")
    return answer


def sample_adjacent_edge(partition: EdgePartition, v: int, tape: RandomTape,
                         ledger: MessageLedger | None = None, key=("adjacent",)) -> tuple[int, int] | None:
    """Uniform edge among the distinct edges at ``v``.

    The tape fixes a priority for each potential edge ``{v, u}``; every player
    reports its highest-priority incident edge and the coordinator keeps the best.
    """
    ledger = ledger or _null_ledger(partition)
    best, best_u = math.inf, None
    for j in range(1, partition.k + 1):
        nbrs = partition.neighbors(j, v)
        if len(nbrs) == 0:
            ledger.send(j, COORDINATOR, NONE, "adjacent-edge")
            continue
        pr = tape.uniform(key + (v,), nbrs)
        pos = int(np.argmin(pr))
        ledger.send(j, COORDINATOR, EDGE, "adjacent-edge")
        if pr[pos] < best:
            best, best_u = pr[pos], int(nbrs[pos])
    if best_u is None:
        return None
    return (min(v, best_u), max(v, best_u))


def sample_uniform_edge(partition: EdgePartition, tape: RandomTape,
                        ledger: MessageLedger | None = None, key=("uniform-edge",)) -> tuple[int, int] | None:
    ledger = ledger or _null_ledger(partition)
    best, best_code = math.inf, None
    for j in range(1, partition.k + 1):
        codes = partition.part_codes(j)
        if len(codes) == 0:
            ledger.send(j, COORDINATOR, NONE, "uniform-edge")
            continue
        pr = tape.uniform(key, codes)
        pos = int(np.argmin(pr))
        ledger.send(j, COORDINATOR, EDGE, "uniform-edge")
        if pr[pos] < best:
            best, best_code = pr[pos], int(codes[pos])
    if best_code is None:
        return None
    ledger.broadcast(EDGE, "uniform-edge")
    return divmod(best_code, partition.n)


def random_walk(partition: EdgePartition, start: int, steps: int, tape: RandomTape,
                ledger: MessageLedger | None = None, key=("walk",)) -> list[int]:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    ledger = ledger or _null_ledger(partition)
    path = [int(start)]
    for s in range(steps):
        e = sample_adjacent_edge(partition, path[-1], tape, ledger, key + (s,))
        if e is None:
            break
        path.append(e[0] if e[1] == path[-1] else e[1])
        ledger.broadcast(VERTEX, "walk")
    return path


def collect_induced_subgraph(partition: EdgePartition, vertices,
                             ledger: MessageLedger | None = None) -> frozenset[tuple[int, int]]:
    """Edges with both endpoints in ``vertices``; on a blackboard each edge is posted once."""
    ledger = ledger or _null_ledger(partition)
    inside = np.zeros(partition.n, dtype=bool)
    inside[list(vertices)] = True
    posted = np.zeros(0, dtype=np.int64)
    for j in range(1, partition.k + 1):
        part = partition.part(j)
        mine = partition.part_codes(j)[inside[part[:, 0]] & inside[part[:, 1]]]
        if ledger.mode is Mode.BLACKBOARD:
            mine = mine[~codes_in(mine, posted)]
        ledger.send(j, COORDINATOR, edge_list(len(mine)), "induced")
        posted = np.union1d(posted, mine)
    return frozenset(divmod(int(c), partition.n) for c in posted)


# degree approximation

@dataclass(frozen=True)
class DegreeEstimate:
    value: float
    alpha: float
    confidence: float
    phase1_bound: int
    rounds: int = 0
    declared_round: int | None = None


def msb_index(x: int) -> int:
    return int(x).bit_length() - 1


def phase1_bound(sizes) -> int:
    """``d' = sum_i 2^(I_i + 1)`` over players with a non-empty share."""
    return sum(2 ** (msb_index(s) + 1) for s in sizes if s > 0)


def gap_constant(alpha: float) -> float:
    """``beta_1(alpha) = (1 - e^-1) / (1 - e^(-1/alpha)) - 1``."""
    return (1 - math.exp(-1)) / (1 - math.exp(-1 / alpha)) - 1


@dataclass(frozen=True)
class Phase2Plan:
    guesses: tuple[float, ...]
    thresholds: tuple[float, ...]
    needs: tuple[int, ...]
    experiments: int
    floor: float
    ceiling: float

    def success_probability(self, r: int, distinct: int) -> float:
        return 1 - (1 - 1 / self.guesses[r]) ** distinct

    def round_distribution(self, distinct: int) -> np.ndarray:
        """Exact law of the declared round when the true distinct count is ``distinct``."""
        passes = np.array([stats.binom.sf(need - 1, self.experiments, self.success_probability(r, distinct))
                           for r, need in enumerate(self.needs)])
        out = np.zeros(len(self.guesses))
        alive = 1.0
        for r in range(len(self.guesses) - 1):
            out[r] = alive * passes[r]
            alive *= 1 - passes[r]
        out[-1] = alive
        return out

    def value(self, r: int) -> float:
        return min(max(self.guesses[r], self.floor), self.ceiling)


def phase2_plan(d_prime: int, k: int, alpha: float, tau: float) -> Phase2Plan:
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    floor = max(2.0, d_prime / (2 * k))
    guesses = []
    g = float(d_prime)
    while g > floor * (1 + 1e-12):
        guesses.append(g)
        g /= math.sqrt(alpha)
    guesses.append(floor)
    beta = gap_constant(alpha)
    m = math.ceil(48 / beta ** 2 * math.log(2 * len(guesses) / tau))
    thresholds = tuple((1 - (1 - 1 / g) ** g) / math.sqrt(1 + beta) for g in guesses)
    needs = tuple(math.ceil(t * m - 1e-9) for t in thresholds)
    return Phase2Plan(tuple(guesses), thresholds, needs, m, d_prime / (2 * k), float(d_prime))


def approx_distinct(held: list[np.ndarray], universe: int, alpha: float, tau: float, tape: RandomTape,
                    ledger: MessageLedger, key, tag: str = "degree") -> DegreeEstimate:
    """Approximate the number of distinct ids in ``[0, universe)`` held across the players.

    Each experiment samples every id of the universe with probability ``1/d''``;
    the tape value of an id is only evaluated where some player holds it.
    """
    sizes = [len(h) for h in held]
    if not any(sizes):
        raise NoEdge("no player holds an element")
    for j, s in enumerate(sizes, start=1):
        ledger.send(j, COORDINATOR, MSB_INDEX if s else NONE, f"{tag}-phase1")
    d_prime = phase1_bound(sizes)
    plan = phase2_plan(d_prime, len(held), alpha, tau)
    m = plan.experiments
    union = np.unique(np.concatenate([h for h in held if len(h)]))
    experiment = np.arange(m, dtype=np.int64)[:, None]
    declared, triggered = len(plan.guesses) - 1, None
    rounds = 0
    for r, g in enumerate(plan.guesses):
        rounds += 1
        u = tape.uniform(key + (r,), experiment * universe + union[None, :])
        for j in range(1, len(held) + 1):
            ledger.charge_bits(j, COORDINATOR, m, f"{tag}-phase2-round-{r}")
        # the OR of the players' hit bits is a hit anywhere on the union
        hit_any = u.min(axis=1) < 1 / g
        if hit_any.sum() >= plan.needs[r]:
            declared = triggered = r
            break
    return DegreeEstimate(plan.value(declared), alpha, 1 - tau, d_prime, rounds, triggered)


def approx_degree(partition: EdgePartition, v: int, alpha: float, tau: float, tape: RandomTape,
                  ledger: MessageLedger | None = None, key=("degree",)) -> DegreeEstimate:
    ledger = ledger or _null_ledger(partition)
    held = [partition.neighbors(j, v) for j in range(1, partition.k + 1)]
    return approx_distinct(held, partition.n, alpha, tau, tape, ledger, key + (v,), "degree")


def nodup_kept_bits(alpha: float) -> int:
    """Significant bits each player keeps so that truncation loses less than a factor alpha."""
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    return max(0, math.ceil(math.log2(1 / (alpha - 1)) - 1e-12)) + 1


def truncate_msb(x: int, keep: int) -> tuple[int, int]:
    cutoff = max(0, int(x).bit_length() - keep)
    return (x >> cutoff) << cutoff, cutoff


def approx_degree_nodup(partition: EdgePartition, v: int, alpha: float,
                        ledger: MessageLedger | None = None) -> DegreeEstimate:
    if not partition.no_duplication:
        raise DuplicationPresent("deterministic truncation needs disjoint parts")
    ledger = ledger or _null_ledger(partition)
    keep = nodup_kept_bits(alpha)
    total = 0
    sizes = partition.local_degrees[:, v]
    for j, s in enumerate(sizes.tolist(), start=1):
        if s == 0:
            ledger.send(j, COORDINATOR, NONE, "degree-nodup")
            continue
        kept, _ = truncate_msb(s, keep)
        total += kept
        ledger.charge_bits(j, COORDINATOR, keep + ledger.encoding.msb_index, "degree-nodup")
    return DegreeEstimate(float(total), alpha, 1.0, phase1_bound(sizes.tolist()))
