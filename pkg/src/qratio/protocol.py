"""Per-node protocol state machine: event-triggered mass splitting with
randomized routing, plus windowed max/min extrema for distributed stopping.

Each node mixes an integer mass pair (y, z) through the network: whenever
z > 1 it snapshots its state, splits y into z near-equal integer pieces,
and routes all but the last piece uniformly at random over itself and its
out-neighbors. The state snapshot's rounded ratio q_state is the node's
current answer. Every ``diameter_bound`` rounds the nodes restart window
extrema from their local mass ratio and propagate them through max/min
combining; once the extrema meet within one at a window boundary, every
node knows the whole network sits in a unit band and stops simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .problem import ProblemInstance, initial_mass
from .topology import Digraph

__all__ = [
    "ExtremaMessage",
    "MassMessage",
    "NodeState",
    "ProtocolError",
    "WorkloadDecision",
    "absorb_masses",
    "ceil_div",
    "check_termination",
    "extrema_combine",
    "final_workload",
    "init_node",
    "split_mass_pieces",
    "split_masses",
    "update_state_vars",
    "window_start",
]


class ProtocolError(RuntimeError):
    """A per-node operation was invoked outside its contract."""


def ceil_div(a: int, b: int) -> int:
    """Exact ceil(a / b) for integers, b > 0 (works for negative a)."""
    return -(-a // b)


class MassMessage(NamedTuple):
    """Aggregated mass pieces routed to one target in one round.

    ``y`` sums z single pieces whose values differ by at most one.
    """

    y: int
    z: int


class ExtremaMessage(NamedTuple):
    """Window extrema broadcast every round."""

    window_max: int
    window_min: int


@dataclass
class NodeState:
    """One node's complete protocol state.

    Mutated in place by the per-round operations; owned by exactly one
    logical actor, never touched across nodes.
    """

    node: int
    y: int                      # mass numerator
    z: int                      # mass denominator / piece count, >= 1 always
    y_state: int                # last event-triggered snapshot of y
    z_state: int
    q_state: int                # ceil(y_state / z_state) at the last refresh
    window_max: int
    window_min: int
    stopped: bool
    out_neighbors: np.ndarray   # sorted target ids, excludes self
    capacity: int
    pi_upper: int
    utilization: int
    diameter_bound: int

    def routing(self) -> dict[int, Fraction]:
        """Uniform routing table over self plus each out-neighbor."""
        share = Fraction(1, 1 + len(self.out_neighbors))
        table = {self.node: share}
        for t in self.out_neighbors:
            table[int(t)] = share
        return table


def init_node(j: int, inst: ProblemInstance, g: Digraph) -> NodeState:
    """Build node j's starting state from the instance and topology.

    The initial mass is pi_upper * (load + utilization) over a piece count
    equal to the node's capacity; q_state starts as the rounded initial
    ratio so an answer exists even for nodes that never trigger an event.
    """
    if inst.n != g.node_count:
        raise ValueError(f"instance has {inst.n} nodes but graph has {g.node_count}")
    y0 = initial_mass(inst, j)
    z0 = inst.caps[j]
    bound = inst.diameter_bound if inst.diameter_bound is not None else g.diameter()
    return NodeState(
        node=j,
        y=y0,
        z=z0,
        y_state=y0,
        z_state=z0,
        q_state=ceil_div(y0, z0),
        window_max=ceil_div(y0, z0),
        window_min=y0 // z0,
        stopped=False,
        out_neighbors=np.asarray(g.out_neighbors(j), dtype=np.int64),
        capacity=inst.caps[j],
        pi_upper=inst.pi_upper,
        utilization=inst.utils[j],
        diameter_bound=bound,
    )


def window_start(s: NodeState) -> NodeState:
    """Restart the stopping-window extrema from the current mass ratio."""
    if s.stopped:
        raise ProtocolError(f"node {s.node} already stopped")
    s.window_max = ceil_div(s.y, s.z)
    s.window_min = s.y // s.z
    return s


def extrema_combine(s: NodeState, received: Iterable[ExtremaMessage]) -> NodeState:
    """Fold this round's in-neighbor extrema into the local ones."""
    for msg in received:
        if msg.window_max > s.window_max:
            s.window_max = msg.window_max
        if msg.window_min < s.window_min:
            s.window_min = msg.window_min
    return s


def update_state_vars(s: NodeState) -> NodeState:
    """Refresh the state snapshot; only legal under the event condition z > 1."""
    if s.stopped:
        raise ProtocolError(f"node {s.node} already stopped")
    if s.z <= 1:
        raise ProtocolError(f"node {s.node}: state update requires z > 1, have z={s.z}")
    s.z_state = s.z
    s.y_state = s.y
    s.q_state = ceil_div(s.y_state, s.z_state)
    return s


def split_mass_pieces(
    y: int, z: int, rng: np.random.Generator, n_targets: int
) -> tuple[np.ndarray, np.ndarray]:
    """Split mass (y, z) into z unit pieces routed over n_targets slots.

    Slot 0 is the splitting node itself; slots 1.. follow its out-neighbor
    order. z - 1 piece targets are drawn uniformly in piece order; pieces
    start at floor(y / z) and the first remainder units (all but one) ride
    along with the earliest drawn pieces. The final piece, plus the last
    remainder unit when the division is inexact, stays at slot 0. Returns
    per-slot aggregates (y_parts, z_parts) with exact conservation:
    y_parts.sum() == y and z_parts.sum() == z. Requires z >= 2; y may be
    any integer (zero and negative masses split into floor-valued pieces).
    """
    if z < 2:
        raise ProtocolError(f"splitting requires z >= 2, have z={z}")
    if n_targets < 1:
        raise ProtocolError("need at least the self slot")
    delta = y // z
    rem = y - delta * z
    draws = rng.integers(0, n_targets, size=z - 1)
    z_parts = np.bincount(draws, minlength=n_targets)
    y_parts = delta * z_parts
    if rem > 1:
        y_parts = y_parts + np.bincount(draws[: rem - 1], minlength=n_targets)
    z_parts[0] += 1
    y_parts[0] += delta + (1 if rem >= 1 else 0)
    return y_parts, z_parts


def split_masses(s: NodeState, rng: np.random.Generator) -> dict[int, MassMessage]:
    """One round of routing: the mapping target id -> aggregated mass message.

    With z <= 1 the whole mass is self-retained and nothing is transmitted.
    Only targets that received at least one piece appear; the self entry is
    always present.
    """
    if s.stopped:
        raise ProtocolError(f"node {s.node} already stopped")
    if s.z <= 1:
        return {s.node: MassMessage(s.y, s.z)}
    targets = np.concatenate(([s.node], s.out_neighbors))
    y_parts, z_parts = split_mass_pieces(s.y, s.z, rng, len(targets))
    out: dict[int, MassMessage] = {}
    for idx in np.nonzero(z_parts)[0]:
        out[int(targets[idx])] = MassMessage(int(y_parts[idx]), int(z_parts[idx]))
    return out


def absorb_masses(s: NodeState, inbox: Iterable[MassMessage]) -> NodeState:
    """Sum this round's deliveries (own self-retained message included)."""
    total_y = 0
    total_z = 0
    count = 0
    for msg in inbox:
        total_y += msg.y
        total_z += msg.z
        count += 1
    if count == 0:
        raise ProtocolError(f"node {s.node}: inbox must contain the self-retained message")
    s.y = total_y
    s.z = total_z
    return s


def check_termination(s: NodeState, k: int) -> bool:
    """Stopping rule, evaluated only at window-boundary rounds.

    Sets the stopped flag and returns True when the propagated extrema meet
    within one; the final workload becomes available afterwards.
    """
    if k % s.diameter_bound != 0:
        raise ProtocolError(
            f"termination checks happen only when k is a multiple of {s.diameter_bound}, got k={k}"
        )
    if s.stopped:
        return True
    if s.window_max - s.window_min <= 1:
        s.stopped = True
        return True
    return False


class WorkloadDecision(NamedTuple):
    """The two readings of a stopped node's answer.

    ``total_share`` is the raw stopping-rule output ceil(q_state * capacity
    / pi_upper): the node's share of the total demand including what it
    already runs. ``incremental`` subtracts the current utilization, which
    is the workload actually to be added.
    """

    total_share: int
    incremental: int


def final_workload(s: NodeState, inst: ProblemInstance) -> WorkloadDecision:
    """Translate the stopped node's q_state into its workload assignment."""
    if not s.stopped:
        raise ProtocolError(f"node {s.node}: workload is defined only after termination")
    total = ceil_div(s.q_state * s.capacity, s.pi_upper)
    return WorkloadDecision(total_share=total, incremental=total - inst.utils[s.node])
