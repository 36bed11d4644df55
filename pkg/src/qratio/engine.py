"""Deterministic synchronous simulation: round loop, trials, and sweeps.

A round is a barrier: every node's outgoing messages are collected before
any node absorbs its inbox. Randomness comes from per-node counter-based
streams keyed by (master seed, node id), so a trial's outcome is a pure
function of its TrialConfig regardless of scheduling.
"""

from __future__ import annotations

import json
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from . import problem, protocol, topology
from .problem import ProblemInstance
from .topology import Digraph

__all__ = [
    "ConservationError",
    "SimulationError",
    "Simulation",
    "SizeStats",
    "SweepStats",
    "TrialConfig",
    "TrialResult",
    "convergence_stats",
    "default_max_rounds",
    "instance_stream",
    "make_caps",
    "make_loads",
    "make_utils",
    "node_stream",
    "run_sweep",
    "run_trial",
]

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
# Mass magnitudes must stay well inside int64 for the vectorized piece math.
_MASS_LIMIT = 1 << 62

_warned_capacity_bounds: set[tuple[int, int]] = set()


class SimulationError(RuntimeError):
    """A protocol invariant failed mid-trial; indicates a bug, not bad input."""


class ConservationError(SimulationError):
    """Mass sums drifted from the initial totals."""


def node_stream(seed: int, node: int) -> np.random.Generator:
    """Independent per-node generator keyed by (seed, node id).

    Counter-based (Philox), so construction is cheap and streams for
    different nodes never overlap.
    """
    return np.random.Generator(np.random.Philox(key=((node + 1) << 64) | (seed & _MASK64)))


def instance_stream(seed: int) -> np.random.Generator:
    """Generator for instance-level draws (loads, random capacities)."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


# ---------------------------------------------------------------------------
# scenario specs


def _parse_spec(spec: str) -> tuple[str, str]:
    kind, _, payload = spec.partition(":")
    return kind.strip(), payload.strip()


def _parse_int_list(payload: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in payload.split(",") if tok.strip() != ""]
    except ValueError:
        raise ValueError(f"bad {what} list {payload!r}") from None


def _spec_values(spec: str, n: int, rng: np.random.Generator, what: str) -> tuple[int, ...]:
    kind, payload = _parse_spec(spec)
    if kind == "list":
        values = _parse_int_list(payload, what)
        if len(values) != n:
            raise ValueError(f"{what} list has {len(values)} entries for {n} nodes")
        return tuple(values)
    if kind == "const":
        return (int(payload),) * n
    if kind == "uniform":
        bounds = _parse_int_list(payload, what)
        if len(bounds) != 2 or bounds[0] > bounds[1]:
            raise ValueError(f"{what} uniform spec needs 'uniform:lo,hi' with lo <= hi")
        return tuple(int(v) for v in rng.integers(bounds[0], bounds[1], size=n, endpoint=True))
    if kind == "alt":
        pair = _parse_int_list(payload, what)
        if len(pair) != 2:
            raise ValueError(f"{what} alt spec needs 'alt:a,b'")
        return tuple(pair[j % 2] for j in range(n))
    raise ValueError(f"unknown {what} spec {spec!r}")


def make_loads(spec: str, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Loads from a spec string: list:..., const:c, or uniform:lo,hi (inclusive)."""
    return _spec_values(spec, n, rng, "load")


def make_caps(spec: str, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Capacities from a spec string; alt:a,b alternates by node index parity."""
    return _spec_values(spec, n, rng, "capacity")


def make_utils(spec: str, n: int, rng: np.random.Generator) -> tuple[int, ...]:
    """Utilizations from a spec string; 'zeros' is the common default."""
    if _parse_spec(spec)[0] == "zeros":
        return (0,) * n
    return _spec_values(spec, n, rng, "utilization")


def default_max_rounds(diameter_bound: int, n: int) -> int:
    """Generous cap, far above observed behavior; hitting it is reported."""
    return 100 * diameter_bound * max(1, math.ceil(math.log2(max(2, n))))


# ---------------------------------------------------------------------------
# configuration and results


@dataclass(frozen=True)
class TrialConfig:
    """One trial: where the graph and instance come from, plus the knobs.

    Either pass concrete ``graph`` / ``instance`` objects or leave them None
    to generate from (nodes, edge_prob) and the scenario spec strings. The
    instance draw order is loads, then capacities, then utilizations, all
    from one stream, so specs stay reproducible.
    """

    seed: int
    nodes: int | None = None
    edge_prob: float = 0.5
    graph: Digraph | None = None
    instance: ProblemInstance | None = None
    load_spec: str = "uniform:1,100"
    cap_spec: str = "alt:100,300"
    util_spec: str = "zeros"
    pi_upper: int | None = None
    diameter: int | None = None
    max_rounds: int | None = None
    snapshot: bool = False
    graph_retries: int = 50


@dataclass
class TrialResult:
    """Everything observable about one finished (or capped) trial."""

    seed: int
    n: int
    diameter_bound: int
    graph_edges: int
    max_out_degree: int
    graph_retries: int
    terminated: bool
    termination_round: int | None
    rounds_run: int
    first_converge_round: int
    last_converge_round: int
    converge_rounds: list[int]
    qs: list[int]
    total_share: list[int] | None
    incremental: list[int] | None
    q_tasks_num: int
    q_tasks_den: int
    expected_sum_y: int
    expected_sum_z: int
    round_sums: list[list[int]]
    simultaneous_stop: bool
    window_checks: int
    wall_seconds: float
    instance: ProblemInstance | None = None
    snapshots: list[dict[str, Any]] | None = None

    def mean_converge_round(self) -> float:
        return sum(self.converge_rounds) / len(self.converge_rounds)

    @property
    def converge_window(self) -> int:
        return self.last_converge_round - self.first_converge_round

    def to_dict(self, include_timing: bool = False, include_snapshots: bool = True) -> dict:
        d: dict[str, Any] = {
            "seed": self.seed,
            "n": self.n,
            "diameter_bound": self.diameter_bound,
            "graph_edges": self.graph_edges,
            "max_out_degree": self.max_out_degree,
            "graph_retries": self.graph_retries,
            "terminated": self.terminated,
            "termination_round": self.termination_round,
            "rounds_run": self.rounds_run,
            "first_converge": self.first_converge_round,
            "last_converge": self.last_converge_round,
            "mean_converge": self.mean_converge_round(),
            "converge_window": self.converge_window,
            "converge_rounds": list(self.converge_rounds),
            "q_tasks_num": self.q_tasks_num,
            "q_tasks_den": self.q_tasks_den,
            "nodes": [
                {
                    "id": j + 1,
                    "qs": self.qs[j],
                    "total_share": None if self.total_share is None else self.total_share[j],
                    "incremental": None if self.incremental is None else self.incremental[j],
                }
                for j in range(self.n)
            ],
            "conservation": {
                "expected_y": self.expected_sum_y,
                "expected_z": self.expected_sum_z,
                "round_sums": [list(rs) for rs in self.round_sums],
            },
            "simultaneous_stop": self.simultaneous_stop,
            "window_checks": self.window_checks,
        }
        if self.instance is not None:
            d["instance"] = {
                "loads": list(self.instance.loads),
                "utils": list(self.instance.utils),
                "caps": list(self.instance.caps),
                "pi_upper": self.instance.pi_upper,
                "diameter_bound": self.instance.diameter_bound,
            }
        if include_timing:
            d["wall_seconds"] = self.wall_seconds
        if include_snapshots and self.snapshots is not None:
            d["snapshots"] = self.snapshots
        return d

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing=include_timing), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialResult":
        nodes = d["nodes"]
        inst = None
        if "instance" in d:
            spec = d["instance"]
            inst = ProblemInstance(
                loads=tuple(spec["loads"]),
                utils=tuple(spec["utils"]),
                caps=tuple(spec["caps"]),
                pi_upper=spec["pi_upper"],
                diameter_bound=spec.get("diameter_bound"),
            )
        shares = [nd.get("total_share") for nd in nodes]
        incr = [nd.get("incremental") for nd in nodes]
        cons = d.get("conservation", {})
        return cls(
            seed=d.get("seed", 0),
            n=len(nodes),
            diameter_bound=d.get("diameter_bound", 1),
            graph_edges=d.get("graph_edges", 0),
            max_out_degree=d.get("max_out_degree", 1),
            graph_retries=d.get("graph_retries", 0),
            terminated=d.get("terminated", False),
            termination_round=d.get("termination_round"),
            rounds_run=d.get("rounds_run", 0),
            first_converge_round=d.get("first_converge", 0),
            last_converge_round=d.get("last_converge", 0),
            converge_rounds=list(d.get("converge_rounds", [0] * len(nodes))),
            qs=[nd["qs"] for nd in nodes],
            total_share=None if any(s is None for s in shares) else shares,
            incremental=None if any(x is None for x in incr) else incr,
            q_tasks_num=d["q_tasks_num"],
            q_tasks_den=d["q_tasks_den"],
            expected_sum_y=cons.get("expected_y", 0),
            expected_sum_z=cons.get("expected_z", 0),
            round_sums=[list(rs) for rs in cons.get("round_sums", [])],
            simultaneous_stop=d.get("simultaneous_stop", False),
            window_checks=d.get("window_checks", 0),
            wall_seconds=d.get("wall_seconds", 0.0),
            instance=inst,
            snapshots=d.get("snapshots"),
        )


# ---------------------------------------------------------------------------
# the round loop


class Simulation:
    """Synchronous round loop over an instance and a strongly connected graph.

    Asserts, every round, exact mass conservation and z >= 1 everywhere; at
    every window boundary, that the propagated extrema equal the global
    extrema of the window-start values and that the stopping decision is
    unanimous. Violations raise, they are never papered over.
    """

    def __init__(
        self,
        inst: ProblemInstance,
        g: Digraph,
        seed: int,
        *,
        snapshot: bool = False,
    ) -> None:
        n = g.node_count
        if n < 2:
            raise ValueError("simulation needs at least 2 nodes")
        if inst.n != n:
            raise ValueError(f"instance has {inst.n} nodes but graph has {n}")
        if not g.is_strongly_connected():
            raise ValueError("graph must be strongly connected")
        self.inst = inst
        self.g = g
        self.seed = seed
        self.states = [protocol.init_node(j, inst, g) for j in range(n)]
        self.diameter_bound = self.states[0].diameter_bound
        self.rngs = [node_stream(seed, j) for j in range(n)]
        self.targets = [
            np.concatenate(([j], g.out_neighbors(j).astype(np.int64))) for j in range(n)
        ]
        self.expected_sum_y = sum(s.y for s in self.states)
        self.expected_sum_z = sum(s.z for s in self.states)
        if abs(self.expected_sum_y) >= _MASS_LIMIT or self.expected_sum_z >= _MASS_LIMIT:
            raise ValueError("total mass too large for exact int64 piece arithmetic")
        if min(g.in_degree(j) for j in range(n)) < 1:
            raise ValueError("strongly connected graph must have in-degree >= 1 everywhere")
        self.k = 0
        self.terminated_round: int | None = None
        self.converge_round = [0] * n
        self.round_sums: list[list[int]] = []
        self.window_checks = 0
        self._win_max: np.ndarray | None = None
        self._win_min: np.ndarray | None = None
        self.snapshots: list[dict[str, Any]] | None = [] if snapshot else None
        if snapshot:
            self._record_snapshot()

    @property
    def terminated(self) -> bool:
        return self.terminated_round is not None

    def _record_snapshot(self) -> None:
        assert self.snapshots is not None
        self.snapshots.append(
            {
                "round": self.k,
                "y": [s.y for s in self.states],
                "z": [s.z for s in self.states],
                "y_state": [s.y_state for s in self.states],
                "z_state": [s.z_state for s in self.states],
                "q_state": [s.q_state for s in self.states],
                "window_max": [s.window_max for s in self.states],
                "window_min": [s.window_min for s in self.states],
                "stopped": [s.stopped for s in self.states],
            }
        )

    def run_round(self) -> dict[str, Any]:
        """Advance one synchronous round; returns a small per-round report."""
        if self.terminated:
            raise SimulationError("all nodes already stopped")
        k = self.k + 1
        n = self.g.node_count
        d = self.diameter_bound
        states = self.states

        # window restart (first round of each window)
        if k % d == 1 % d:
            for s in states:
                protocol.window_start(s)
            self._win_max = np.fromiter((s.window_max for s in states), np.int64, n)
            self._win_min = np.fromiter((s.window_min for s in states), np.int64, n)

        # synchronous extrema broadcast and combine, from a snapshot of this
        # round's values (vectorized equivalent of per-node combining)
        hi = np.fromiter((s.window_max for s in states), np.int64, n)
        lo = np.fromiter((s.window_min for s in states), np.int64, n)
        indptr = self.g._in_indptr
        new_hi = np.maximum(hi, np.maximum.reduceat(hi[self.g._in_flat], indptr[:-1]))
        new_lo = np.minimum(lo, np.minimum.reduceat(lo[self.g._in_flat], indptr[:-1]))
        for j, s in enumerate(states):
            s.window_max = int(new_hi[j])
            s.window_min = int(new_lo[j])

        # event-triggered state refresh, split, and barriered delivery
        y_acc = np.zeros(n, dtype=np.int64)
        z_acc = np.zeros(n, dtype=np.int64)
        changed: list[int] = []
        for j, s in enumerate(states):
            if s.z > 1:
                old_q = s.q_state
                protocol.update_state_vars(s)
                if s.q_state != old_q:
                    self.converge_round[j] = k
                    changed.append(j)
                y_parts, z_parts = protocol.split_mass_pieces(
                    s.y, s.z, self.rngs[j], len(self.targets[j])
                )
                nz = np.nonzero(z_parts)[0]
                tgt = self.targets[j][nz]
                y_acc[tgt] += y_parts[nz]
                z_acc[tgt] += z_parts[nz]
            else:
                y_acc[j] += s.y
                z_acc[j] += s.z

        sum_y = int(y_acc.sum())
        sum_z = int(z_acc.sum())
        if sum_y != self.expected_sum_y or sum_z != self.expected_sum_z:
            raise ConservationError(
                f"round {k}: mass sums ({sum_y}, {sum_z}) != initial "
                f"({self.expected_sum_y}, {self.expected_sum_z}); "
                f"y={[int(v) for v in y_acc]} z={[int(v) for v in z_acc]}"
            )
        for j, s in enumerate(states):
            s.y = int(y_acc[j])
            s.z = int(z_acc[j])
            if s.z < 1:
                raise SimulationError(f"round {k}: node {j} lost its last piece (z={s.z})")
        self.round_sums.append([sum_y, sum_z])

        terminated = False
        if k % d == 0:
            assert self._win_max is not None and self._win_min is not None
            gmax = int(self._win_max.max())
            gmin = int(self._win_min.min())
            for j, s in enumerate(states):
                if s.window_max != gmax or s.window_min != gmin:
                    raise SimulationError(
                        f"round {k}: node {j} extrema ({s.window_max}, {s.window_min}) "
                        f"did not reach the window-global ({gmax}, {gmin})"
                    )
            self.window_checks += 1
            decisions = [protocol.check_termination(s, k) for s in states]
            if any(decisions) != all(decisions):
                raise SimulationError(f"round {k}: stopping decision was not unanimous")
            terminated = decisions[0]
            if terminated:
                self.terminated_round = k

        self.k = k
        if self.snapshots is not None:
            self._record_snapshot()
        return {
            "round": k,
            "sum_y": sum_y,
            "sum_z": sum_z,
            "changed_qs": changed,
            "terminated": terminated,
        }


# ---------------------------------------------------------------------------
# trials and sweeps


def _resolve_graph(cfg: TrialConfig) -> tuple[Digraph, int]:
    if cfg.graph is not None:
        if not cfg.graph.is_strongly_connected():
            raise ValueError("supplied graph is not strongly connected")
        return cfg.graph, 0
    if cfg.nodes is None:
        raise ValueError("graph source missing: set nodes or pass a graph")
    for retry in range(cfg.graph_retries + 1):
        g = topology.generate_random_digraph(cfg.nodes, cfg.edge_prob, cfg.seed + retry)
        if g.is_strongly_connected():
            if retry:
                logger.info("graph for seed %d regenerated %d time(s)", cfg.seed, retry)
            return g, retry
    raise ValueError(
        f"no strongly connected draw for n={cfg.nodes}, p={cfg.edge_prob} "
        f"within {cfg.graph_retries} retries of seed {cfg.seed}"
    )


def _resolve_instance(cfg: TrialConfig, g: Digraph) -> ProblemInstance:
    if cfg.instance is not None:
        inst = cfg.instance
        if inst.n != g.node_count:
            raise ValueError(f"instance has {inst.n} nodes but graph has {g.node_count}")
    else:
        rng = instance_stream(cfg.seed)
        n = g.node_count
        loads = make_loads(cfg.load_spec, n, rng)
        caps = make_caps(cfg.cap_spec, n, rng)
        utils = make_utils(cfg.util_spec, n, rng)
        pi_upper = cfg.pi_upper if cfg.pi_upper is not None else problem.default_pi_upper(caps)
        inst = ProblemInstance(loads=loads, utils=utils, caps=caps, pi_upper=pi_upper)
    true_diameter = g.diameter()
    bound = cfg.diameter if cfg.diameter is not None else (inst.diameter_bound or true_diameter)
    if bound < true_diameter:
        raise ValueError(f"diameter bound {bound} is below the true diameter {true_diameter}")
    if inst.diameter_bound != bound:
        inst = replace(inst, diameter_bound=bound)
    return inst


def run_trial(cfg: TrialConfig) -> TrialResult:
    """Run one trial to termination or the round cap; deterministic per cfg.

    Hitting the cap is reported (terminated=False), never raised; invariant
    violations raise SimulationError.
    """
    t0 = time.perf_counter()
    g, retries = _resolve_graph(cfg)
    inst = _resolve_instance(cfg, g)
    if not problem.check_feasibility(inst):
        raise ValueError("infeasible instance: total demand exceeds available capacity")
    if not inst.capacity_bound_ok:
        key = (inst.pi_upper, inst.total_capacity)
        if key not in _warned_capacity_bounds:
            _warned_capacity_bounds.add(key)
            logger.warning(
                "pi_upper=%d is below the total capacity %d; running anyway",
                inst.pi_upper,
                inst.total_capacity,
            )
    sim = Simulation(inst, g, cfg.seed, snapshot=cfg.snapshot)
    d = sim.diameter_bound
    max_rounds = cfg.max_rounds if cfg.max_rounds is not None else default_max_rounds(d, g.node_count)
    if max_rounds < d:
        raise ValueError(f"max_rounds={max_rounds} is below the window length {d}")
    while not sim.terminated and sim.k < max_rounds:
        sim.run_round()

    terminated = sim.terminated
    if terminated:
        decisions = [protocol.final_workload(s, inst) for s in sim.states]
        total_share = [w.total_share for w in decisions]
        incremental = [w.incremental for w in decisions]
    else:
        total_share = None
        incremental = None
        logger.warning("seed %d: round cap %d reached without termination", cfg.seed, max_rounds)
    q = problem.q_tasks(inst)
    first = min(sim.converge_round)
    last = max(sim.converge_round)
    if terminated and last > sim.terminated_round:  # pragma: no cover - engine bug guard
        raise SimulationError("q_state changed after the stopping round")
    return TrialResult(
        seed=cfg.seed,
        n=g.node_count,
        diameter_bound=d,
        graph_edges=g.edge_count,
        max_out_degree=g.max_out_degree,
        graph_retries=retries,
        terminated=terminated,
        termination_round=sim.terminated_round,
        rounds_run=sim.k,
        first_converge_round=first,
        last_converge_round=last,
        converge_rounds=list(sim.converge_round),
        qs=[s.q_state for s in sim.states],
        total_share=total_share,
        incremental=incremental,
        q_tasks_num=q.numerator,
        q_tasks_den=q.denominator,
        expected_sum_y=sim.expected_sum_y,
        expected_sum_z=sim.expected_sum_z,
        round_sums=sim.round_sums,
        simultaneous_stop=terminated,
        window_checks=sim.window_checks,
        wall_seconds=time.perf_counter() - t0,
        instance=inst,
        snapshots=sim.snapshots,
    )


def convergence_stats(result: TrialResult) -> dict[str, float]:
    """Min/max/mean of per-node converge rounds plus their window (max - min)."""
    if not result.terminated:
        raise ValueError("convergence stats need a terminated trial")
    return {
        "min": result.first_converge_round,
        "max": result.last_converge_round,
        "mean": result.mean_converge_round(),
        "window": result.converge_window,
    }


@dataclass
class SizeStats:
    """Aggregates over the trials of one network size."""

    size: int
    trials: int
    completed: int
    terminated: int
    term_mean: float
    term_std: float
    first_mean: float
    first_std: float
    last_mean: float
    last_std: float
    mean_converge_mean: float
    window_mean: float
    window_std: float
    wall_mean: float
    wall_std: float
    failures: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "trials": self.trials,
            "completed": self.completed,
            "terminated": self.terminated,
            "term_mean": self.term_mean,
            "term_std": self.term_std,
            "first_mean": self.first_mean,
            "first_std": self.first_std,
            "last_mean": self.last_mean,
            "last_std": self.last_std,
            "mean_converge_mean": self.mean_converge_mean,
            "window_mean": self.window_mean,
            "window_std": self.window_std,
            "wall_mean": self.wall_mean,
            "wall_std": self.wall_std,
            "failures": list(self.failures),
        }


_CSV_COLUMNS = [
    "size",
    "trials",
    "completed",
    "terminated",
    "term_mean",
    "term_std",
    "first_mean",
    "first_std",
    "last_mean",
    "last_std",
    "mean_converge_mean",
    "window_mean",
    "window_std",
    "wall_mean",
    "wall_std",
]


@dataclass
class SweepStats:
    """Per-size aggregates for a sweep; error bars are sample std dev."""

    rows: list[SizeStats]
    base_seed: int
    trials_per_size: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_seed": self.base_seed,
            "trials_per_size": self.trials_per_size,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = [",".join(_CSV_COLUMNS)]
        for r in self.rows:
            d = r.to_dict()
            cells = []
            for col in _CSV_COLUMNS:
                v = d[col]
                cells.append(f"{v:.6f}" if isinstance(v, float) else str(v))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return math.nan, math.nan
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def _aggregate(size: int, trials: int, results: list[TrialResult], failures: list[str]) -> SizeStats:
    done = [r for r in results if r.terminated]
    term_mean, term_std = _mean_std([r.termination_round for r in done])
    first_mean, first_std = _mean_std([r.first_converge_round for r in done])
    last_mean, last_std = _mean_std([r.last_converge_round for r in done])
    mean_conv_mean, _ = _mean_std([r.mean_converge_round() for r in done])
    window_mean, window_std = _mean_std([r.converge_window for r in done])
    wall_mean, wall_std = _mean_std([r.wall_seconds for r in results])
    return SizeStats(
        size=size,
        trials=trials,
        completed=len(results),
        terminated=len(done),
        term_mean=term_mean,
        term_std=term_std,
        first_mean=first_mean,
        first_std=first_std,
        last_mean=last_mean,
        last_std=last_std,
        mean_converge_mean=mean_conv_mean,
        window_mean=window_mean,
        window_std=window_std,
        wall_mean=wall_mean,
        wall_std=wall_std,
        failures=failures,
    )


def run_trials(cfgs: Sequence[TrialConfig], workers: int = 1) -> tuple[list[TrialResult], list[str]]:
    """Run many independent trials, optionally on a process pool.

    Results keep the input order; a failed trial is recorded as a message
    and excluded from the returned results.
    """
    results: list[TrialResult] = []
    failures: list[str] = []
    if workers <= 1:
        for cfg in cfgs:
            try:
                results.append(run_trial(cfg))
            except (ValueError, SimulationError) as exc:
                failures.append(f"seed {cfg.seed}: {exc}")
                logger.error("trial seed %d failed: %s", cfg.seed, exc)
        return results, failures
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_trial, cfg) for cfg in cfgs]
        for cfg, fut in zip(cfgs, futures):
            try:
                results.append(fut.result())
            except (ValueError, SimulationError) as exc:
                failures.append(f"seed {cfg.seed}: {exc}")
                logger.error("trial seed %d failed: %s", cfg.seed, exc)
    return results, failures


def run_sweep(
    sizes: Sequence[int],
    trials_per_size: int,
    base: TrialConfig,
    workers: int = 1,
) -> SweepStats:
    """Per size, run trials with seeds base.seed .. base.seed + trials - 1."""
    if trials_per_size < 1:
        raise ValueError("trials_per_size must be >= 1")
    rows = []
    for size in sizes:
        cfgs = [
            replace(base, nodes=size, graph=None, instance=None, seed=base.seed + t)
            for t in range(trials_per_size)
        ]
        results, failures = run_trials(cfgs, workers=workers)
        rows.append(_aggregate(size, trials_per_size, results, failures))
        logger.info(
            "size %d: %d/%d terminated, mean termination %.2f rounds",
            size,
            rows[-1].terminated,
            trials_per_size,
            rows[-1].term_mean,
        )
    return SweepStats(rows=rows, base_seed=base.seed, trials_per_size=trials_per_size)
