"""Command-line front end: single trials, sweeps, offline trace verification.

Every emitted record carries the master seed and the tool version, so a run
can be reproduced from the record alone. Run output is byte-deterministic
for a fixed configuration; wall-clock timing is only included on request.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, engine, oracle, problem, topology
from .engine import SimulationError, TrialConfig, TrialResult

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_CAP = 3

logger = logging.getLogger(__name__)

_RUN_CSV_COLUMNS = [
    "seed",
    "n",
    "diameter_bound",
    "terminated",
    "termination_round",
    "first_converge",
    "last_converge",
    "mean_converge",
    "converge_window",
    "q_tasks_num",
    "q_tasks_den",
    "graph_retries",
    "verified",
]


def _pi_upper_arg(text: str):
    if text == "auto":
        return None
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qratio",
        description="Quantized ratio consensus load balancer: simulate, sweep, verify.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logging"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one or more trials and verify them")
    run.add_argument("--nodes", type=int, help="network size for a generated graph")
    run.add_argument("--edge-prob", type=float, default=0.5, help="directed edge probability")
    run.add_argument("--graph-file", help="edge-list file instead of a generated graph")
    run.add_argument("--instance-file", help="instance file instead of a generated one")
    run.add_argument(
        "--pi-upper",
        type=_pi_upper_arg,
        default=1000,
        help="demand scaling constant; 'auto' picks the smallest power of ten >= total capacity",
    )
    run.add_argument("--capacities", default="alt:100,300", help="alt:a,b | list:... | uniform:lo,hi | const:c")
    run.add_argument("--loads", help="list:... | uniform:lo,hi | const:c (overrides --load-min/max)")
    run.add_argument("--load-min", type=int, help="uniform load lower bound (default 1)")
    run.add_argument("--load-max", type=int, help="uniform load upper bound (default 100)")
    run.add_argument("--utils", default="zeros", help="zeros | list:... | uniform:lo,hi | const:c")
    run.add_argument("--seed", type=int, default=0, help="master seed; trial t uses seed + t")
    run.add_argument("--trials", type=int, default=1, help="number of trials to run")
    run.add_argument("--max-rounds", type=int, help="round cap (default scales with size)")
    run.add_argument("--diameter", type=int, help="diameter upper bound override for the stopping windows")
    run.add_argument("--eps", type=float, default=0.05, help="epsilon for the reported bounds")
    run.add_argument("--snapshot", action="store_true", help="record full per-round states")
    run.add_argument("--timing", action="store_true", help="include wall-clock seconds in the output")
    run.add_argument("--graph-retries", type=int, default=50, help="regeneration cap for disconnected draws")
    run.add_argument("--workers", type=int, default=1, help="process pool size across trials")
    run.add_argument("--out", help="output path (default: stdout)")
    run.add_argument("--format", choices=["json", "csv"], default="json")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="aggregate trials across network sizes")
    sweep.add_argument("--sizes", required=True, help="comma-separated network sizes")
    sweep.add_argument("--trials", type=int, default=50, help="trials per size")
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--edge-prob", type=float, default=0.5)
    sweep.add_argument("--pi-upper", type=_pi_upper_arg, default=1000)
    sweep.add_argument("--capacities", default="alt:100,300")
    sweep.add_argument("--loads", help="generative load spec (uniform/const)")
    sweep.add_argument("--load-min", type=int)
    sweep.add_argument("--load-max", type=int)
    sweep.add_argument("--utils", default="zeros")
    sweep.add_argument("--max-rounds", type=int)
    sweep.add_argument("--diameter", type=int)
    sweep.add_argument("--graph-retries", type=int, default=50)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", help="output path (default: stdout)")
    sweep.add_argument("--format", choices=["csv", "json"], default="csv")
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="re-verify a previously emitted JSON record")
    verify.add_argument("--trace-file", required=True)
    verify.add_argument("--eps", type=float, default=0.05)
    verify.set_defaults(func=cmd_verify)

    return parser


def _load_spec_from_args(args) -> str:
    if args.loads:
        return args.loads
    lo = args.load_min if args.load_min is not None else 1
    hi = args.load_max if args.load_max is not None else 100
    return f"uniform:{lo},{hi}"


def _base_config_from_args(args) -> TrialConfig:
    graph = None
    if args.graph_file:
        graph = topology.load_digraph(Path(args.graph_file).read_text(encoding="utf-8"))
    instance = None
    if getattr(args, "instance_file", None):
        instance = problem.load_instance(Path(args.instance_file).read_text(encoding="utf-8"))
    nodes = args.nodes if hasattr(args, "nodes") else None
    if graph is not None:
        if nodes is not None and nodes != graph.node_count:
            raise ValueError(f"--nodes {nodes} contradicts graph file with {graph.node_count} nodes")
        nodes = graph.node_count
    if instance is not None and nodes is None and graph is None:
        nodes = instance.n
    if graph is None and nodes is None:
        raise ValueError("need a graph source: --nodes or --graph-file")
    return TrialConfig(
        seed=args.seed,
        nodes=nodes,
        edge_prob=args.edge_prob,
        graph=graph,
        instance=instance,
        load_spec=_load_spec_from_args(args),
        cap_spec=args.capacities,
        util_spec=args.utils,
        pi_upper=args.pi_upper,
        diameter=args.diameter,
        max_rounds=args.max_rounds,
        snapshot=getattr(args, "snapshot", False),
        graph_retries=args.graph_retries,
    )


def _config_echo(args, base: TrialConfig, command: str) -> dict:
    return {
        "command": command,
        "seed": args.seed,
        "trials": args.trials,
        "nodes": base.nodes,
        "edge_prob": base.edge_prob,
        "graph_file": getattr(args, "graph_file", None),
        "instance_file": getattr(args, "instance_file", None),
        "load_spec": base.load_spec,
        "cap_spec": base.cap_spec,
        "util_spec": base.util_spec,
        "pi_upper": base.pi_upper,
        "diameter": base.diameter,
        "max_rounds": base.max_rounds,
        "snapshot": base.snapshot,
        "graph_retries": base.graph_retries,
        "eps": getattr(args, "eps", None),
        "workers": args.workers,
    }


def _run_strict(cfgs, workers: int) -> list[TrialResult]:
    if workers <= 1:
        return [engine.run_trial(cfg) for cfg in cfgs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(engine.run_trial, cfg) for cfg in cfgs]
        return [f.result() for f in futures]


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _run_csv(results: list[TrialResult], verified: list[bool]) -> str:
    lines = [",".join(_RUN_CSV_COLUMNS)]
    for res, ok in zip(results, verified):
        row = [
            res.seed,
            res.n,
            res.diameter_bound,
            int(res.terminated),
            res.termination_round if res.termination_round is not None else "",
            res.first_converge_round,
            res.last_converge_round,
            f"{res.mean_converge_round():.6f}",
            res.converge_window,
            res.q_tasks_num,
            res.q_tasks_den,
            res.graph_retries,
            int(ok),
        ]
        lines.append(",".join(str(c) for c in row))
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    if args.trials < 1:
        raise ValueError("--trials must be >= 1")
    base = _base_config_from_args(args)
    cfgs = [replace(base, seed=args.seed + t) for t in range(args.trials)]
    results = _run_strict(cfgs, args.workers)
    reports = [
        oracle.verify_trial(res, res.instance, eps=args.eps) for res in results
    ]
    all_pass = all(r.passed for r in reports)
    record = {
        "version": __version__,
        "config": _config_echo(args, base, "run"),
        "trials": [res.to_dict(include_timing=args.timing) for res in results],
        "verification": {
            "all_pass": all_pass,
            "reports": [rep.to_dict() for rep in reports],
        },
        "sweep": None,
    }
    if args.format == "json":
        _emit(json.dumps(record, sort_keys=True, indent=2) + "\n", args.out)
    else:
        _emit(_run_csv(results, [r.passed for r in reports]), args.out)
    if any(not res.terminated for res in results):
        return EXIT_CAP
    if not all_pass:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"bad --sizes list {args.sizes!r}") from None
    if not sizes:
        raise ValueError("--sizes must name at least one size")
    base = _base_config_from_args_sweep(args)
    stats = engine.run_sweep(sizes, args.trials, base, workers=args.workers)
    if args.format == "csv":
        _emit(stats.to_csv(), args.out)
    else:
        record = {
            "version": __version__,
            "config": {**_config_echo(args, base, "sweep"), "sizes": sizes},
            "trials": [],
            "verification": None,
            "sweep": stats.to_dict(),
        }
        _emit(json.dumps(record, sort_keys=True, indent=2) + "\n", args.out)
    if any(row.failures for row in stats.rows):
        return EXIT_VERIFY
    if any(row.terminated < row.completed for row in stats.rows):
        return EXIT_CAP
    return EXIT_OK


def _base_config_from_args_sweep(args) -> TrialConfig:
    return TrialConfig(
        seed=args.seed,
        nodes=None,
        edge_prob=args.edge_prob,
        load_spec=_load_spec_from_args(args),
        cap_spec=args.capacities,
        util_spec=args.utils,
        pi_upper=args.pi_upper,
        diameter=args.diameter,
        max_rounds=args.max_rounds,
        snapshot=False,
        graph_retries=args.graph_retries,
    )


def _deep_snapshot_checks(trial: dict, result: TrialResult) -> bool:
    """Recompute conservation and final answers from raw per-round states."""
    snaps = trial.get("snapshots") or []
    if not snaps:
        return True
    ok = True
    for snap in snaps:
        if sum(snap["y"]) != result.expected_sum_y or sum(snap["z"]) != result.expected_sum_z:
            print(f"  snapshot round {snap['round']}: mass sums drifted", file=sys.stderr)
            ok = False
        if len(set(snap["stopped"])) > 1:
            print(f"  snapshot round {snap['round']}: stop flags disagree", file=sys.stderr)
            ok = False
    final = snaps[-1]
    if final["q_state"] != result.qs:
        print("  final snapshot q_state disagrees with the recorded answers", file=sys.stderr)
        ok = False
    return ok


def cmd_verify(args) -> int:
    try:
        record = json.loads(Path(args.trace_file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read trace: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not isinstance(record, dict) or not isinstance(record.get("trials"), list):
        print("error: record has no trials[] array", file=sys.stderr)
        return EXIT_CONFIG
    if record.get("version") != __version__:
        print(
            f"warning: trace version {record.get('version')!r} differs from "
            f"{__version__!r}; running a best-effort check",
            file=sys.stderr,
        )
    if not record["trials"]:
        print("error: record contains zero trials", file=sys.stderr)
        return EXIT_CONFIG
    all_pass = True
    for idx, trial in enumerate(record["trials"]):
        try:
            result = TrialResult.from_dict(trial)
        except (KeyError, TypeError, ValueError) as exc:
            print(f"error: trial {idx} is not readable: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if result.instance is None:
            print(f"error: trial {idx} carries no instance; cannot verify", file=sys.stderr)
            return EXIT_CONFIG
        report = oracle.verify_trial(result, result.instance, eps=args.eps)
        ok = report.passed and _deep_snapshot_checks(trial, result)
        status = "PASS" if ok else "FAIL"
        print(f"trial seed={result.seed}: {status}")
        if not ok:
            print(f"  report: {json.dumps(report.to_dict(), sort_keys=True)}", file=sys.stderr)
        all_pass = all_pass and ok
    return EXIT_OK if all_pass else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (
        ValueError,
        OSError,
        topology.GraphFormatError,
        problem.InstanceFormatError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SimulationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
