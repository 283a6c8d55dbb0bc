"""Symmetrization: run a k-player one-shot protocol on a 3-player input."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .comm_runtime import Mode, Protocol, ProtocolOutcome, RandomTape, Verdict, run_protocol
from .graph_core import EdgePartition, Graph


class NotSimultaneous(ValueError):
    pass


@dataclass(frozen=True)
class EmbedAssignment:
    i: int
    j: int
    k: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("the two embedded players must differ")
        if not (1 <= self.i <= self.k and 1 <= self.j <= self.k):
            raise ValueError("player ids lie in 1..k")


def embed_input(X, i: int, j: int, k: int, n: int | None = None) -> EdgePartition:
    """Player ``i`` gets X1, player ``j`` gets X2 and every other player gets X3."""
    EmbedAssignment(i, j, k)
    x1, x2, x3 = (np.asarray(x, dtype=np.int64).reshape(-1, 2) for x in X)
    union = np.concatenate([x1, x2, x3])
    if n is None:
        n = int(union.max()) + 1 if len(union) else 1
    graph = Graph(n, union)
    parts = [x1 if p == i else x2 if p == j else x3 for p in range(1, k + 1)]
    return EdgePartition(graph, parts)


def symmetrize_run(protocol: Protocol, X, k: int, tape: RandomTape | int,
                   n: int | None = None) -> tuple[Verdict, int, ProtocolOutcome]:
    """Returns the referee's verdict, the bits sent by the two embedded players, and the full run."""
    if not protocol.simultaneous:
        raise NotSimultaneous(f"{protocol.name} is not a one-shot protocol")
    if not isinstance(tape, RandomTape):
        tape = RandomTape(tape)
    i, j = (int(x) + 1 for x in tape.generator("symmetrize").choice(k, 2, replace=False))
    outcome = run_protocol(embed_input(X, i, j, k, n), protocol, Mode.SIMULTANEOUS, tape)
    outcome.meta["embedded"] = (i, j)
    return outcome.verdict, outcome.ledger.sent_by(i) + outcome.ledger.sent_by(j), outcome
