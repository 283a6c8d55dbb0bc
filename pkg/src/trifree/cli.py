"""Command line entry point: ``trifree gen | run | fit``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .graph_core import write_graph, write_partition
from .harness import (ConfigError, ExperimentConfig, InsufficientPoints, PROTOCOLS, fit_scaling,
                      read_trial_rows, resolve_degree)
from .instance_gen import FAMILIES, PARTITION_KINDS, GeneratorSpec, PartitionStrategy, generate, partition_edges

MODES = ("coordinator", "blackboard", "simultaneous")


def _load_config(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    for name in ("seed", "out", "trials", "protocol", "mode"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return ExperimentConfig.from_dict(data)


def cmd_gen(args) -> int:
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
        generator = cfg["generator"]
        cell = cfg.get("grid", [{}])[0]
        partition = cfg.get("partition", "random_assign")
    else:
        generator = {"family": args.family, "params": {}}
        cell, partition = {}, args.partition
    n = args.n if args.n is not None else cell.get("n")
    k = args.k if args.k is not None else cell.get("k", 4)
    d = args.d if args.d is not None else cell.get("d", 2.0)
    spec = GeneratorSpec(generator["family"], generator.get("params", {}), args.seed)
    graph = generate(spec, n, resolve_degree(d, n) if n is not None else None)
    part = partition_edges(graph, PartitionStrategy(partition, int(k), args.seed))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(out / "graph.txt", graph)
    write_partition(out / "partition.txt", part)
    print(f"wrote n={graph.n} m={graph.m} k={part.k} to {out}")
    return 0


def cmd_run(args) -> int:
    from .harness import run_experiment

    config = _load_config(args)
    result = run_experiment(config)
    if not config.out:
        sys.stdout.write(result.to_csv())
    for cell in result.cells:
        print(f"cell {cell.cell}: n={cell.n} k={cell.k} success={cell.success_rate:.3f} "
              f"mean_bits={cell.mean_bits:.1f}", file=sys.stderr)
    return 0


def cmd_fit(args) -> int:
    rows = read_trial_rows(args.csv)
    by_k: dict[int, dict[int, list[int]]] = {}
    for r in rows:
        by_k.setdefault(r["k"], {}).setdefault(r["n"], []).append(r["bits"])
    lines = ["k,slope,stderr,points"]
    for k, per_n in sorted(by_k.items()):
        pts = [(n, sum(b) / len(b)) for n, b in sorted(per_n.items())]
        fit = fit_scaling(pts)
        lines.append(f"{k},{fit.slope!r},{fit.stderr!r},{fit.points}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trifree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write graph and partition files")
    gen.add_argument("--config")
    gen.add_argument("--family", choices=FAMILIES, default="disjoint_triangles")
    gen.add_argument("--partition", choices=PARTITION_KINDS, default="random_assign")
    gen.add_argument("--n", type=int)
    gen.add_argument("--d")
    gen.add_argument("--k", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")
    gen.set_defaults(func=cmd_gen)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--trials", type=int)
    run.add_argument("--protocol", choices=sorted(PROTOCOLS))
    run.add_argument("--mode", choices=MODES)
    run.set_defaults(func=cmd_run)

    fit = sub.add_parser("fit", help="fit log-log slopes of mean bits against n")
    fit.add_argument("csv")
    fit.add_argument("--out")
    fit.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "d", None) is not None and args.d != "sqrt":
        args.d = float(args.d)
    try:
        return args.func(args)
    except (ConfigError, InsufficientPoints, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
