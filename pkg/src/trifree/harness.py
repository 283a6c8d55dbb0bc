"""Experiment runner: grids of (n, d, k) cells, Monte-Carlo trials, CSV output and log-log fits."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .comm_runtime import EchoProtocol, Mode, Protocol, RandomTape, run_protocol
from .instance_gen import FAMILIES, GeneratorSpec, PartitionStrategy, generate, partition_edges
from .interactive_protocol import FindTriangle, InteractiveConfig
from .simultaneous_protocol import SimConfig, SimHigh, SimLow, SimOblivious

TRIAL_COLUMNS = ("cell", "trial", "protocol", "mode", "n", "d", "k", "seed", "edges",
                 "negative", "found", "bits", "rounds", "cap_hits")
SUMMARY_COLUMNS = ("cell", "n", "d", "k", "trials", "success_rate", "mean_bits", "max_bits",
                   "mean_rounds", "cap_hit_rate")


class ConfigError(ValueError):
    pass


class InsufficientPoints(ValueError):
    pass


def _find_triangle(eps, delta, d):
    return FindTriangle(InteractiveConfig(epsilon=eps, delta=delta, d_known=d))


PROTOCOLS = {
    "find_triangle": _find_triangle,
    "find_triangle_oblivious": lambda eps, delta, d: FindTriangle(InteractiveConfig(epsilon=eps, delta=delta)),
    "sim_high": lambda eps, delta, d: SimHigh(SimConfig(epsilon=eps, delta=delta), d),
    "sim_low": lambda eps, delta, d: SimLow(SimConfig(epsilon=eps, delta=delta), d),
    "sim_oblivious": lambda eps, delta, d: SimOblivious(SimConfig(epsilon=eps, delta=delta)),
    "echo": lambda eps, delta, d: EchoProtocol(),
}


def make_protocol(protocol_id: str, epsilon: float, delta: float, d: float | None) -> Protocol:
    if protocol_id not in PROTOCOLS:
        raise ConfigError(f"unknown protocol {protocol_id!r}; choose from {sorted(PROTOCOLS)}")
    return PROTOCOLS[protocol_id](epsilon, delta, d)


def known_negative(spec: GeneratorSpec) -> bool:
    """True when the family only produces triangle-free graphs."""
    if spec.family == "bipartite_random":
        return True
    if spec.family == "bhm_reduction":
        return int(spec.params.get("parity", 1)) == 1
    return False


def resolve_degree(d, n: int) -> float:
    """Grid degrees are numbers or the string ``"sqrt"`` for ``sqrt(n)``."""
    if isinstance(d, str):
        if d != "sqrt":
            raise ConfigError(f"degree must be a number or 'sqrt', got {d!r}")
        return math.sqrt(n)
    return float(d)


@dataclass
class ExperimentConfig:
    protocol: str
    generator: dict
    grid: list[dict]
    partition: str = "random_assign"
    epsilon: float = 1 / 3
    delta: float = 0.1
    trials: int = 1
    seed: int = 0
    out: str | None = None
    mode: str | None = None
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.grid:
            raise ConfigError("grid must be nonempty")
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"unknown protocol {self.protocol!r}")
        if self.generator.get("family") not in FAMILIES:
            raise ConfigError(f"unknown generator family {self.generator.get('family')!r}")
        try:
            PartitionStrategy(self.partition, 1)
            GeneratorSpec(self.generator["family"], self.generator.get("params", {}))
            if self.mode is not None:
                Mode(self.mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        for cell in self.grid:
            if not {"n", "k"} <= set(cell):
                raise ConfigError(f"grid cell {cell} needs n and k")
            resolve_degree(cell.get("d", 2.0), int(cell["n"]))
        if not 0 < self.epsilon <= 1 or not 0 < self.delta < 1:
            raise ConfigError("epsilon must lie in (0, 1] and delta in (0, 1)")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        try:
            return cls(**data).validate()
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class CellSummary:
    cell: int
    n: int
    d: float
    k: int
    trials: int
    success_rate: float
    mean_bits: float
    max_bits: int
    mean_rounds: float
    cap_hit_rate: float


@dataclass
class ScalingFit:
    slope: float
    stderr: float
    intercept: float
    points: int


@dataclass
class ExperimentResult:
    rows: list[dict]
    cells: list[CellSummary]
    fits: dict[int, ScalingFit] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRIAL_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in TRIAL_COLUMNS])
        buf.write("\n# summary\n")
        writer.writerow(SUMMARY_COLUMNS)
        for cell in self.cells:
            writer.writerow([_fmt(getattr(cell, c)) for c in SUMMARY_COLUMNS])
        if self.fits:
            buf.write("\n# fits\n")
            writer.writerow(("k", "slope", "stderr", "intercept", "points"))
            for k, fit in sorted(self.fits.items()):
                writer.writerow([k, _fmt(fit.slope), _fmt(fit.stderr), _fmt(fit.intercept), fit.points])
        return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(round(x, 10))
    return str(x)


def trial_seed(master: int, cell: int, trial: int) -> int:
    """Counter-based per-trial seed."""
    ss = np.random.SeedSequence(master, spawn_key=(cell, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_trial(config: ExperimentConfig, cell_index: int, trial: int) -> dict:
    cell = config.grid[cell_index]
    n, k = int(cell["n"]), int(cell["k"])
    d = resolve_degree(cell.get("d", 2.0), n)
    seed = trial_seed(config.seed, cell_index, trial)
    gen_seed, part_seed, tape_seed = np.random.SeedSequence(seed).generate_state(3, dtype=np.uint64).tolist()
    spec = GeneratorSpec(config.generator["family"], config.generator.get("params", {}), gen_seed)
    graph = generate(spec, n, d)
    partition = partition_edges(graph, PartitionStrategy(config.partition, k, part_seed))
    protocol = make_protocol(config.protocol, config.epsilon, config.delta, graph.average_degree or None)
    outcome = run_protocol(partition, protocol, config.mode, RandomTape(tape_seed))
    return {
        "cell": cell_index, "trial": trial, "protocol": config.protocol,
        "mode": (config.mode or protocol.modes[0].value), "n": graph.n, "d": d, "k": k,
        "seed": seed, "edges": graph.m, "negative": known_negative(spec), "found": outcome.found,
        "bits": outcome.bits, "rounds": outcome.ledger.rounds,
        "cap_hits": int(outcome.meta.get("cap_hits", 0)),
    }


def _run_trial_args(args):
    return run_trial(*args)


def summarize(rows: list[dict]) -> list[CellSummary]:
    out = []
    for cell in sorted({r["cell"] for r in rows}):
        rs = [r for r in rows if r["cell"] == cell]
        bits = np.array([r["bits"] for r in rs], dtype=float)
        negative = rs[0]["negative"]
        # on triangle-free inputs a correct run reports nothing
        success = np.mean([r["found"] != negative for r in rs])
        out.append(CellSummary(
            cell, rs[0]["n"], rs[0]["d"], rs[0]["k"], len(rs), float(success), float(bits.mean()),
            int(bits.max()), float(np.mean([r["rounds"] for r in rs])),
            float(np.mean([r["cap_hits"] > 0 for r in rs]))))
    return out


def fit_scaling(points) -> ScalingFit:
    """Least squares on ``(log2 n, log2 bits)``."""
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 4:
        raise InsufficientPoints(f"need at least 4 points, got {len(pts)}")
    if any(a <= 0 or b <= 0 for a, b in pts):
        raise ValueError("points must be positive")
    x = np.log2([a for a, _ in pts])
    y = np.log2([b for _, b in pts])
    if np.ptp(y) == 0:
        return ScalingFit(0.0, 0.0, float(y[0]), len(pts))
    res = stats.linregress(x, y)
    return ScalingFit(float(res.slope), float(res.stderr), float(res.intercept), len(pts))


def fit_cells(cells: list[CellSummary]) -> dict[int, ScalingFit]:
    """One slope of mean bits against n per value of k, where there are enough distinct n."""
    fits = {}
    for k in sorted({c.k for c in cells}):
        pts = [(c.n, c.mean_bits) for c in cells if c.k == k and c.mean_bits > 0]
        if len({p[0] for p in pts}) >= 4:
            fits[k] = fit_scaling(pts)
    return fits


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    config.validate()
    jobs = [(config, c, t) for c in range(len(config.grid)) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            rows = list(pool.map(_run_trial_args, jobs, chunksize=4))
    else:
        rows = [run_trial(*job) for job in jobs]
    rows.sort(key=lambda r: (r["cell"], r["trial"]))
    cells = summarize(rows)
    result = ExperimentResult(rows, cells, fit_cells(cells))
    if config.out:
        Path(config.out).write_text(result.to_csv())
    return result


def read_trial_rows(path) -> list[dict]:
    """Trial rows of a harness CSV (everything before the summary block)."""
    text = Path(path).read_text().split("\n\n", 1)[0]
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(TRIAL_COLUMNS) - set(rows[0]):
        raise ValueError(f"{path} is not a harness CSV")
    out = []
    for r in rows:
        out.append({"cell": int(r["cell"]), "trial": int(r["trial"]), "n": int(r["n"]),
                    "d": float(r["d"]), "k": int(r["k"]), "bits": int(r["bits"]),
                    "rounds": int(r["rounds"]), "cap_hits": int(r["cap_hits"]),
                    "found": r["found"] == "1", "negative": r["negative"] == "1"})
    return out
