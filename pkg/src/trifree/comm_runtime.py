"""Message passing runtime: shared random tape, bit-exact ledger, protocol runner.

Players are numbered ``1..k``. Id ``0`` is the coordinator (or referee, or the
blackboard). Broadcasts in blackboard mode use receiver ``ALL``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import zlib
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph_core import EdgePartition

COORDINATOR = 0
ALL = -1
MASK64 = (1 << 64) - 1


class ModeMismatch(ValueError):
    pass


class UnverifiedWitness(RuntimeError):
    pass


class Mode(enum.Enum):
    COORDINATOR = "coordinator"
    BLACKBOARD = "blackboard"
    SIMULTANEOUS = "simultaneous"
    ONE_WAY_THREE = "one_way_three"


# shared randomness

def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


class RandomTape:
    """Public random tape seen identically by every endpoint.

    Draws are addressed by a key (protocol step first, then any sub-indices),
    so the value of a draw never depends on which endpoint asks or when.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64

    @staticmethod
    def _key(key) -> tuple[int, ...]:
        if not isinstance(key, tuple):
            key = (key,)
        return tuple(zlib.crc32(p.encode()) if isinstance(p, str) else int(p) & MASK64 for p in key)

    def _seed_sequence(self, key) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=self._key(key))

    def generator(self, *key) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self._seed_sequence(key)))

    def uniform(self, key, ids) -> np.ndarray:
        """Uniform ``[0, 1)`` value for each id, a fixed function of (seed, key, id)."""
        salt = self._seed_sequence(key).generate_state(1, np.uint64)[0]
        ids = np.asarray(ids, dtype=np.int64).astype(np.uint64)
        with np.errstate(over="ignore"):
            h = _splitmix64(ids * np.uint64(0xD1B54A32D192ED03) ^ salt)
        return (h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def child_seed(self, *key) -> int:
        return int(self._seed_sequence(key).generate_state(1, np.uint64)[0])


# payload encodings

class Payload(NamedTuple):
    kind: str
    size: int = 0


BIT = Payload("bit")
VERTEX = Payload("vertex")
EDGE = Payload("edge")
MSB_INDEX = Payload("msb")
NONE = Payload("none")


def count(c: int) -> Payload:
    return Payload("count", int(c))


def edge_list(length: int) -> Payload:
    return Payload("edges", int(length))


def _gamma(x: int) -> int:
    return 2 * (x.bit_length() - 1) + 1


@dataclass(frozen=True)
class Encoding:
    n: int

    @property
    def vertex(self) -> int:
        return max(1, math.ceil(math.log2(self.n))) if self.n > 1 else 1

    @property
    def edge(self) -> int:
        return 2 * self.vertex

    @property
    def msb_index(self) -> int:
        return max(1, math.ceil(math.log2(1 + self.vertex)))

    def count(self, c: int) -> int:
        """``ceil(log2(c+1))`` value bits plus an Elias-gamma prefix holding their number."""
        if c < 0:
            raise ValueError("counts are non-negative")
        width = int(c).bit_length()
        return width + _gamma(width + 1)

    def edge_list(self, length: int) -> int:
        return length * self.edge + self.count(length)

    def bits(self, payload: Payload) -> int:
        kind = payload.kind
        if kind in ("bit", "none"):
            return 1
        if kind == "vertex":
            return self.vertex
        if kind == "edge":
            return self.edge
        if kind == "msb":
            return self.msb_index
        if kind == "count":
            return self.count(payload.size)
        if kind == "edges":
            return self.edge_list(payload.size)
        raise ValueError(f"unknown payload kind {kind!r}")


# ledger

class LedgerEntry(NamedTuple):
    round: int
    sender: int
    receiver: int
    bits: int
    tag: str


class MessageLedger:
    def __init__(self, n: int, k: int, mode: Mode = Mode.COORDINATOR):
        self.encoding = Encoding(n)
        self.k = k
        self.mode = mode
        self.entries: list[LedgerEntry] = []
        self.round = 1
        self._by_sender: dict[int, int] = defaultdict(int)
        self.total = 0

    def new_round(self) -> None:
        if self.mode in (Mode.SIMULTANEOUS, Mode.ONE_WAY_THREE):
            raise ModeMismatch("one-shot modes have a single sending round")
        self.round += 1

    def charge_bits(self, sender: int, receiver: int, bits: int, tag: str = "") -> None:
        if self.mode in (Mode.SIMULTANEOUS, Mode.ONE_WAY_THREE) and (
                sender == COORDINATOR or receiver != COORDINATOR):
            raise ModeMismatch("one-shot modes only carry player-to-referee messages")
        bits = int(bits)
        if bits < 0:
            raise ValueError("negative bit count")
        if bits == 0:
            return
        self.entries.append(LedgerEntry(self.round, sender, receiver, bits, tag))
        self._by_sender[sender] += bits
        self.total += bits

    def send(self, sender: int, receiver: int, payload: Payload, tag: str = "", repeat: int = 1) -> int:
        bits = self.encoding.bits(payload) * repeat
        self.charge_bits(sender, receiver, bits, tag)
        return bits

    def broadcast(self, payload: Payload, tag: str = "", repeat: int = 1) -> int:
        """Coordinator to every player: charged per player, or once on a blackboard."""
        bits = self.encoding.bits(payload) * repeat
        return self.broadcast_bits(bits, tag)

    def broadcast_bits(self, bits: int, tag: str = "") -> int:
        if self.mode is Mode.BLACKBOARD:
            self.charge_bits(COORDINATOR, ALL, bits, tag)
            return bits
        for j in range(1, self.k + 1):
            self.charge_bits(COORDINATOR, j, bits, tag)
        return bits * self.k

    def sent_by(self, sender: int) -> int:
        return self._by_sender.get(sender, 0)

    @property
    def totals(self) -> dict[int, int]:
        return dict(self._by_sender)

    @property
    def rounds(self) -> int:
        return max((e.round for e in self.entries), default=0)

    def bits_by_tag(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for e in self.entries:
            out[e.tag] += e.bits
        return dict(out)

    def to_csv(self, stream=None) -> str:
        buf = stream if stream is not None else io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["round", "sender", "receiver", "bits", "tag"])
        writer.writerows(self.entries)
        return buf.getvalue() if stream is None else ""


# verdicts and runs

@dataclass(frozen=True)
class TriangleFound:
    witness: tuple[int, int, int]
    found = True


@dataclass(frozen=True)
class NoTriangleFound:
    found = False


Verdict = TriangleFound | NoTriangleFound


@dataclass
class ProtocolOutcome:
    verdict: Verdict
    ledger: MessageLedger
    meta: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.verdict.found

    @property
    def bits(self) -> int:
        return self.ledger.total


class Protocol:
    """A protocol maps (partition, tape, ledger) to a witness triple or ``None``."""

    name = "protocol"
    modes: tuple[Mode, ...] = (Mode.COORDINATOR,)

    def run(self, partition: EdgePartition, tape: RandomTape, ledger: MessageLedger, meta: dict):
        raise NotImplementedError

    @property
    def simultaneous(self) -> bool:
        return Mode.SIMULTANEOUS in self.modes


class SimultaneousProtocol(Protocol):
    """One-shot protocol. Each player's message sees only its own part and the tape."""

    modes = (Mode.SIMULTANEOUS,)

    def message(self, edges: np.ndarray, n: int, k: int, tape: RandomTape) -> list[tuple[np.ndarray, str, bool]]:
        """Return ``(edge array, tag, cap_hit)`` sub-messages for one player."""
        raise NotImplementedError

    def referee(self, received: np.ndarray):
        from .graph_core import find_triangle_in_edges
        return find_triangle_in_edges(received.tolist())

    def run(self, partition, tape, ledger, meta):
        received = []
        cap_hits = messages = 0
        for j in range(1, partition.k + 1):
            for edges, tag, hit in self.message(partition.part(j), partition.n, partition.k, tape):
                ledger.send(j, COORDINATOR, edge_list(len(edges)), tag)
                received.append(edges)
                cap_hits += bool(hit)
                messages += 1
        meta["cap_hits"] = cap_hits
        meta["messages"] = messages
        union = np.unique(np.concatenate(received), axis=0) if received else np.zeros((0, 2), np.int64)
        meta["received_edges"] = len(union)
        return self.referee(union)


class EchoProtocol(SimultaneousProtocol):
    """Every player sends a single bit."""

    name = "echo"
    modes = (Mode.SIMULTANEOUS, Mode.COORDINATOR, Mode.BLACKBOARD)

    def run(self, partition, tape, ledger, meta):
        for j in range(1, partition.k + 1):
            ledger.send(j, COORDINATOR, BIT, "echo")
        return None


def verify_witness(partition: EdgePartition, witness) -> TriangleFound:
    a, b, c = sorted(int(x) for x in witness)
    g = partition.graph
    if not (a != b != c and g.has_edge(a, b) and g.has_edge(a, c) and g.has_edge(b, c)):
        raise UnverifiedWitness(f"{(a, b, c)} is not a triangle of the input graph")
    return TriangleFound((a, b, c))


def run_protocol(partition: EdgePartition, protocol: Protocol, mode: Mode | str = None,
                 tape: RandomTape | int = 0) -> ProtocolOutcome:
    if mode is None:
        mode = protocol.modes[0]
    mode = Mode(mode)
    if mode not in protocol.modes:
        raise ModeMismatch(f"{protocol.name} does not run in {mode.value} mode")
    if not isinstance(tape, RandomTape):
        tape = RandomTape(tape)
    ledger = MessageLedger(partition.n, partition.k, mode)
    meta: dict = {}
    witness = protocol.run(partition, tape, ledger, meta)
    verdict = NoTriangleFound() if witness is None else verify_witness(partition, witness)
    return ProtocolOutcome(verdict, ledger, meta)
