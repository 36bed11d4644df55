"""Scheduling instances and the closed-form quantities derived from them.

Every derived quantity uses exact rational arithmetic (fractions.Fraction):
the protocol's correctness statements are floor/ceiling memberships that
float rounding could silently corrupt. Loads, utilizations, and capacities
are validated as integers at ingestion, never rounded.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = [
    "InstanceFormatError",
    "ProblemInstance",
    "check_feasibility",
    "closed_form_optimum",
    "default_pi_upper",
    "initial_mass",
    "initial_state_error",
    "load_instance",
    "local_cost",
    "optimal_workload",
    "q_tasks",
    "save_instance",
]


class InstanceFormatError(ValueError):
    """Malformed instance file text."""


def _as_int(value, what: str) -> int:
    if isinstance(value, bool):
        raise TypeError(f"{what} must be an integer, got a bool")
    try:
        return operator.index(value)
    except TypeError:
        raise TypeError(f"{what} must be an integer, got {type(value).__name__}: {value!r}") from None


def default_pi_upper(caps: Sequence[int]) -> int:
    """Smallest power of ten at least the total capacity."""
    total = sum(_as_int(c, "capacity") for c in caps)
    p = 1
    while p < total:
        p *= 10
    return p


@dataclass(frozen=True)
class ProblemInstance:
    """Per-node load/utilization/capacity plus the global protocol constants.

    ``pi_upper`` is the scaling constant every node multiplies its demand
    by; it should dominate the total capacity so initial masses stay ahead
    of the piece counts. Instances that violate that bound are accepted
    (the standard benchmark scenario uses one), and the engine logs a
    warning instead of refusing to run.
    """

    loads: tuple[int, ...]
    utils: tuple[int, ...]
    caps: tuple[int, ...]
    pi_upper: int
    diameter_bound: int | None = None

    def __post_init__(self) -> None:
        loads = tuple(_as_int(x, "load") for x in self.loads)
        utils = tuple(_as_int(x, "utilization") for x in self.utils)
        caps = tuple(_as_int(x, "capacity") for x in self.caps)
        if not loads:
            raise ValueError("instance needs at least one node")
        if not (len(loads) == len(utils) == len(caps)):
            raise ValueError("loads, utils, caps must have equal length")
        if any(x < 0 for x in loads):
            raise ValueError("loads must be nonnegative")
        if any(x < 0 for x in utils):
            raise ValueError("utilizations must be nonnegative")
        if any(x < 1 for x in caps):
            raise ValueError("capacities must be positive")
        pi_upper = _as_int(self.pi_upper, "pi_upper")
        if pi_upper < 1:
            raise ValueError("pi_upper must be positive")
        bound = self.diameter_bound
        if bound is not None:
            bound = _as_int(bound, "diameter_bound")
            if bound < 1:
                raise ValueError("diameter_bound must be positive")
        object.__setattr__(self, "loads", loads)
        object.__setattr__(self, "utils", utils)
        object.__setattr__(self, "caps", caps)
        object.__setattr__(self, "pi_upper", pi_upper)
        object.__setattr__(self, "diameter_bound", bound)

    @property
    def n(self) -> int:
        return len(self.loads)

    @property
    def total_capacity(self) -> int:
        return sum(self.caps)

    @property
    def total_demand(self) -> int:
        return sum(self.loads)

    @property
    def capacity_bound_ok(self) -> bool:
        """Whether pi_upper dominates the total capacity."""
        return self.pi_upper >= self.total_capacity


def check_feasibility(inst: ProblemInstance) -> bool:
    """True iff total demand fits into the unoccupied capacity.

    Raises ValueError when any node's utilization exceeds its own capacity,
    since availability would be negative there.
    """
    for j, (u, c) in enumerate(zip(inst.utils, inst.caps)):
        if u > c:
            raise ValueError(f"node {j}: utilization {u} exceeds capacity {c}")
    available = sum(c - u for c, u in zip(inst.caps, inst.utils))
    return inst.total_demand <= available


def closed_form_optimum(weights: Sequence, demands: Sequence) -> Fraction:
    """Minimizer of sum_i weight_i/2 * (z - demand_i)^2: the weighted average.

    With all weights equal this is the plain average of the demands.
    """
    weights = [Fraction(w) for w in weights]
    demands = [Fraction(r) for r in demands]
    if not weights or len(weights) != len(demands):
        raise ValueError("need equally many weights and demands, at least one each")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    num = sum(w * r for w, r in zip(weights, demands))
    return num / sum(weights)


def local_cost(capacity: int, load_plus_util: int, z) -> Fraction:
    """Quadratic imbalance cost of running at utilization fraction z.

    Zero exactly when z equals this node's own demand fraction
    (load + utilization) / capacity.
    """
    capacity = _as_int(capacity, "capacity")
    target = Fraction(_as_int(load_plus_util, "load_plus_util"), capacity)
    return Fraction(capacity, 2) * (Fraction(z) - target) ** 2


def q_tasks(inst: ProblemInstance) -> Fraction:
    """The scaled target ratio pi_upper * total demand / total capacity.

    Every node's final answer is the floor or the ceiling of this value.
    """
    demand = sum(l + u for l, u in zip(inst.loads, inst.utils))
    return Fraction(inst.pi_upper * demand, inst.total_capacity)


def optimal_workload(inst: ProblemInstance, j: int) -> Fraction:
    """Workload node j should receive so all utilization fractions equalize.

    Exactly (total demand / total capacity) * cap_j - util_j; summing the
    per-node values over all nodes returns the total load.
    """
    demand = sum(l + u for l, u in zip(inst.loads, inst.utils))
    return Fraction(demand, inst.total_capacity) * inst.caps[j] - inst.utils[j]


def initial_mass(inst: ProblemInstance, j: int) -> int:
    """Node j's starting mass numerator: pi_upper * (load_j + util_j)."""
    return inst.pi_upper * (inst.loads[j] + inst.utils[j])


def initial_state_error(inst: ProblemInstance) -> int:
    """Total initial distance of starting masses from the target band.

    Sums how far each node's initial mass sits above ceil(q_tasks) or below
    floor(q_tasks); this controls the probabilistic convergence-time bound.
    """
    q = q_tasks(inst)
    hi, lo = math.ceil(q), math.floor(q)
    total = 0
    for j in range(inst.n):
        y0 = initial_mass(inst, j)
        if y0 > hi:
            total += y0 - hi
        elif y0 < lo:
            total += lo - y0
    return total


def load_instance(text: str) -> ProblemInstance:
    """Parse instance text: header "nodes <n> pi_upper <P> diameter <D>",
    then one "<id> <load> <util> <capacity>" line per node (1-based ids,
    any order, full coverage). A header diameter of 0 means "unset".
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise InstanceFormatError("empty instance text")
    head = lines[0].split()
    if len(head) != 6 or head[0] != "nodes" or head[2] != "pi_upper" or head[4] != "diameter":
        raise InstanceFormatError(
            f"bad header {lines[0]!r}, expected 'nodes <n> pi_upper <P> diameter <D>'"
        )
    try:
        n, pi_upper, diam = int(head[1]), int(head[3]), int(head[5])
    except ValueError:
        raise InstanceFormatError(f"non-integer header field in {lines[0]!r}") from None
    if n < 1:
        raise InstanceFormatError(f"node count must be >= 1, got {n}")
    if diam < 0:
        raise InstanceFormatError(f"diameter must be >= 0, got {diam}")
    rows: dict[int, tuple[int, int, int]] = {}
    for lineno, ln in enumerate(lines[1:], start=2):
        toks = ln.split()
        if len(toks) != 4:
            raise InstanceFormatError(f"line {lineno}: expected '<id> <load> <util> <capacity>'")
        try:
            node_id, load, util, cap = (int(t) for t in toks)
        except ValueError:
            raise InstanceFormatError(f"line {lineno}: non-integer field in {ln!r}") from None
        if not 1 <= node_id <= n:
            raise InstanceFormatError(f"line {lineno}: node id {node_id} out of range 1..{n}")
        if node_id in rows:
            raise InstanceFormatError(f"line {lineno}: duplicate node id {node_id}")
        rows[node_id] = (load, util, cap)
    missing = [i for i in range(1, n + 1) if i not in rows]
    if missing:
        raise InstanceFormatError(f"missing node lines for ids {missing}")
    ordered = [rows[i] for i in range(1, n + 1)]
    try:
        return ProblemInstance(
            loads=tuple(r[0] for r in ordered),
            utils=tuple(r[1] for r in ordered),
            caps=tuple(r[2] for r in ordered),
            pi_upper=pi_upper,
            diameter_bound=diam if diam > 0 else None,
        )
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(str(exc)) from None


def save_instance(inst: ProblemInstance) -> str:
    """Serialize to the instance file format (diameter 0 when unset)."""
    diam = inst.diameter_bound if inst.diameter_bound is not None else 0
    out = [f"nodes {inst.n} pi_upper {inst.pi_upper} diameter {diam}"]
    for j in range(inst.n):
        out.append(f"{j + 1} {inst.loads[j]} {inst.utils[j]} {inst.caps[j]}")
    return "\n".join(out) + "\n"
