"""One-round protocols: every player sends one message to a referee."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .comm_runtime import RandomTape, SimultaneousProtocol, run_protocol


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 1 / 3
    delta: float = 0.1
    c_high: float = 4.0
    oblivious_cap: float = 8.0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    @property
    def c_low(self) -> float:
        return 8 / (9 * self.delta)


def high_sample_size(n: int, d: float, config: SimConfig) -> int:
    return min(n, math.ceil(config.c_high * (n * n / (config.epsilon * d)) ** (1 / 3)))


def high_cap(n: int, d: float, size: int, config: SimConfig) -> int:
    return math.ceil(size ** 2 / n ** 2 * (4 / config.delta) * n * d)


def low_probabilities(n: int, d: float, config: SimConfig) -> tuple[float, float]:
    c = config.c_low
    return min(c / d, 1.0), min(c / math.sqrt(n), 1.0)


def low_cap(n: int, d: float, config: SimConfig) -> int:
    c = config.c_low
    return math.ceil(2 * c * c * (math.sqrt(n) + d) * (2 / config.delta))


def _truncate(edges: np.ndarray, cap: int) -> tuple[np.ndarray, bool]:
    # parts are stored in lexicographic order, so a prefix is the lexicographic truncation
    if len(edges) > cap:
        return edges[:cap], True
    return edges, False


def _inside(edges: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return edges[mask[edges[:, 0]] & mask[edges[:, 1]]]


def _touching(edges: np.ndarray, r_mask: np.ndarray, s_mask: np.ndarray) -> np.ndarray:
    a, b = edges[:, 0], edges[:, 1]
    rs = r_mask | s_mask
    return edges[(r_mask[a] & rs[b]) | (r_mask[b] & rs[a])]


def _bernoulli_mask(tape: RandomTape, key, n: int, p: float) -> np.ndarray:
    return tape.uniform(key, np.arange(n)) < p


class SimHigh(SimultaneousProtocol):
    """Edges inside a public random vertex set of size about ``c (n^2/(eps d))^(1/3)``."""

    name = "sim_high"

    def __init__(self, config: SimConfig | None = None, d: float | None = None):
        self.config = config or SimConfig()
        if d is None or d <= 0:
            raise ValueError(f"{self.name} needs a positive average degree")
        self.d = d

    def message(self, edges, n, k, tape):
        d = self.d
        size = high_sample_size(n, d, self.config)
        chosen = tape.generator("simhigh").choice(n, size, replace=False)
        mask = np.zeros(n, dtype=bool)
        mask[chosen] = True
        sent, hit = _truncate(_inside(edges, mask), high_cap(n, d, size, self.config))
        return [(sent, "simhigh", hit)]

    def run(self, partition, tape, ledger, meta):
        meta["c_high"] = self.config.c_high
        return super().run(partition, tape, ledger, meta)


class SimLow(SimultaneousProtocol):
    """Edges from a public set R into R plus a denser public set S."""

    name = "sim_low"

    def __init__(self, config: SimConfig | None = None, d: float | None = None):
        self.config = config or SimConfig()
        if d is None or d <= 0:
            raise ValueError(f"{self.name} needs a positive average degree")
        self.d = d

    def message(self, edges, n, k, tape):
        p1, p2 = low_probabilities(n, self.d, self.config)
        s_mask = _bernoulli_mask(tape, "simlow-S", n, p1)
        r_mask = _bernoulli_mask(tape, "simlow-R", n, p2)
        sent, hit = _truncate(_touching(edges, r_mask, s_mask), low_cap(n, self.d, self.config))
        return [(sent, "simlow", hit)]


@dataclass(frozen=True)
class GuessRange:
    player: int
    d_bar: float
    guesses: tuple[float, ...]


def guess_range(player: int, m_j: int, n: int, k: int, epsilon: float) -> GuessRange:
    """Powers of two from the first one at or above ``d_bar`` to the first at or above ``(4k/eps) d_bar``."""
    d_bar = 2 * m_j / n
    if m_j == 0:
        return GuessRange(player, 0.0, ())
    lo = math.ceil(math.log2(d_bar) - 1e-12)
    hi = math.ceil(math.log2(4 * k / epsilon * d_bar) - 1e-12)
    return GuessRange(player, d_bar, tuple(2.0 ** e for e in range(lo, hi + 1)))


def oblivious_caps(n: int, k: int, d_bar: float, config: SimConfig) -> tuple[int, int]:
    """Per-instance edge caps for the high and low regimes."""
    scale = math.log2(n) * max(1.0, math.log2(k * math.log2(n)))
    high = math.ceil(config.oblivious_cap * (n * d_bar) ** (1 / 3) * scale)
    low = math.ceil(config.oblivious_cap * math.sqrt(n) * scale)
    return high, low


class SimOblivious(SimultaneousProtocol):
    """Runs the high or low sampler for every power-of-two degree guess a player finds plausible."""

    name = "sim_oblivious"

    def __init__(self, config: SimConfig | None = None):
        self.config = config or SimConfig()

    def message(self, edges, n, k, tape):
        cfg = self.config
        rng = guess_range(0, len(edges), n, k, cfg.epsilon)
        if not rng.guesses:
            return [(edges[:0], "simobliv-empty", False)]
        cap_high, cap_low = oblivious_caps(n, k, rng.d_bar, cfg)
        r_mask = _bernoulli_mask(tape, "simobliv-R", n, min(cfg.c_low / math.sqrt(n), 1.0))
        out = []
        for g in rng.guesses:
            exp = int(round(math.log2(g)))
            tag = f"simobliv-guess-{g:g}"
            if g >= math.sqrt(n):
                p = min(1.0, high_sample_size(n, g, cfg) / n)
                mask = _bernoulli_mask(tape, ("simobliv-high", exp), n, p)
                sent, hit = _truncate(_inside(edges, mask), cap_high)
            else:
                s_mask = _bernoulli_mask(tape, ("simobliv-low-S", exp), n, min(cfg.c_low / g, 1.0))
                sent, hit = _truncate(_touching(edges, r_mask, s_mask), cap_low)
            out.append((sent, tag, hit))
        return out

    def run(self, partition, tape, ledger, meta):
        meta["c_high"] = self.config.c_high
        meta["oblivious_cap"] = self.config.oblivious_cap
        return super().run(partition, tape, ledger, meta)


def sim_high(partition, config: SimConfig, d: float, tape: RandomTape):
    return run_protocol(partition, SimHigh(config, d), tape=tape)


def sim_low(partition, config: SimConfig, d: float, tape: RandomTape):
    return run_protocol(partition, SimLow(config, d), tape=tape)


def sim_oblivious(partition, config: SimConfig, tape: RandomTape):
    return run_protocol(partition, SimOblivious(config), tape=tape)
