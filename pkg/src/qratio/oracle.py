"""Independent verification: closed-form targets, probabilistic walk bounds,
and post-hoc validation of finished trials.

The bounds are lower bounds with plenty of slack; they are reported for
context, never enforced, because observed convergence is far faster. All
pass/fail checks are exact integer or rational comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from . import problem
from .engine import TrialResult
from .problem import ProblemInstance
from .protocol import ceil_div

__all__ = [
    "VerificationReport",
    "real_average",
    "step_budget",
    "success_probability_bound",
    "token_epochs_bound",
    "token_visit_probability_bound",
    "verify_trial",
]

# Above this, 1/(1+d)^(n-1) is far below one float ulp and log1p would lose
# the tail; switch to the exact-integer linearization of the denominator.
_FLOAT_SAFE_POW = 1 << 40


def real_average(values: Sequence[int], divisor: int) -> Fraction:
    """Exact sum(values) / divisor."""
    if divisor <= 0:
        raise ValueError(f"divisor must be positive, got {divisor}")
    return Fraction(sum(int(v) for v in values), divisor)


def token_visit_probability_bound(n: int, d_out_max: int) -> Fraction:
    """Lower bound on a random-walking token reaching any fixed node in n-1 steps.

    Equals (1 + d_out_max) ** -(n - 1); always in (0, 1].
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if d_out_max < 1:
        raise ValueError(f"need d_out_max >= 1, got {d_out_max}")
    return Fraction(1, (1 + d_out_max) ** (n - 1))


def token_epochs_bound(n: int, d_out_max: int, eps: float) -> int:
    """Epochs of (n-1) steps until a token has visited a fixed node w.p. >= 1 - eps.

    ceil(log(eps) / log(1 - p)) with p the single-epoch visit bound. When p
    is far below float resolution the denominator is linearized to -p, which
    differs from the exact value by much less than one.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    denom_pow = (1 + d_out_max) ** (n - 1)
    if denom_pow <= _FLOAT_SAFE_POW:
        p = 1.0 / denom_pow
        return max(1, math.ceil(math.log(eps) / math.log1p(-p)))
    return max(1, math.ceil(Fraction(-math.log(eps)) * denom_pow))


def success_probability_bound(y_init: int, n: int, eps: float) -> float:
    """Probability floor (1 - eps) ** (y_init + n) for finishing on schedule."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if y_init < 0:
        raise ValueError(f"y_init must be nonnegative, got {y_init}")
    return (1.0 - eps) ** (y_init + n)


def step_budget(y_init: int, n: int, d_out_max: int, eps: float, diameter_bound: int) -> int:
    """Step count paired with the success probability bound.

    ceil((y_init + n) * epochs * (n - 1) / D) * D + D: enough whole windows
    for every unit of initial error to equalize, plus one closing window.
    """
    if diameter_bound < 1:
        raise ValueError(f"diameter bound must be positive, got {diameter_bound}")
    epochs = token_epochs_bound(n, d_out_max, eps)
    raw = (y_init + n) * epochs * (n - 1)
    return ceil_div(raw, diameter_bound) * diameter_bound + diameter_bound


@dataclass
class VerificationReport:
    """Per-trial checks; overall pass is their conjunction.

    bound_context is informational only: the probabilistic bounds point in
    one direction and say nothing exact about a single trial.
    """

    exactness_pass: bool
    conservation_pass: bool
    simultaneous_stop_pass: bool
    workload_match: list[bool]
    bound_context: dict[str, Any] | None = None

    @property
    def workload_pass(self) -> bool:
        return all(self.workload_match)

    @property
    def passed(self) -> bool:
        return (
            self.exactness_pass
            and self.conservation_pass
            and self.simultaneous_stop_pass
            and self.workload_pass
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "exactness_pass": self.exactness_pass,
            "conservation_pass": self.conservation_pass,
            "simultaneous_stop_pass": self.simultaneous_stop_pass,
            "workload_match": list(self.workload_match),
            "workload_pass": self.workload_pass,
            "passed": self.passed,
            "bound_context": self.bound_context,
        }


def verify_trial(
    result: TrialResult,
    inst: ProblemInstance,
    eps: float = 0.05,
    include_bounds: bool = True,
) -> VerificationReport:
    """Re-derive every correctness claim of a finished trial from the instance.

    Checks, with zero tolerance: (a) every final q_state is the floor or the
    ceiling of the target ratio; (b) both mass sums matched the initial
    totals every round; (c) the trial stopped unanimously at a window
    boundary and no q_state changed afterwards; (d) each node's announced
    share is the rounding of the balanced workload consistent with (a), and
    incremental = share - utilization.
    """
    q = problem.q_tasks(inst)
    q_floor, q_ceil = math.floor(q), math.ceil(q)
    exactness = all(v in (q_floor, q_ceil) for v in result.qs)

    expected_y = sum(problem.initial_mass(inst, j) for j in range(inst.n))
    expected_z = inst.total_capacity
    conservation = (
        len(result.round_sums) == result.rounds_run
        and all(sy == expected_y and sz == expected_z for sy, sz in result.round_sums)
    )

    d = result.diameter_bound
    stopping = bool(
        result.terminated
        and result.termination_round is not None
        and result.termination_round % d == 0
        and result.simultaneous_stop
        and result.last_converge_round <= result.termination_round
    )

    workload_match: list[bool] = []
    for j in range(inst.n):
        if result.total_share is None or result.incremental is None:
            workload_match.append(False)
            continue
        share = result.total_share[j]
        allowed = {
            ceil_div(q_floor * inst.caps[j], inst.pi_upper),
            ceil_div(q_ceil * inst.caps[j], inst.pi_upper),
        }
        exact_total = problem.optimal_workload(inst, j) + inst.utils[j]
        workload_match.append(
            share in allowed
            and result.incremental[j] == share - inst.utils[j]
            and abs(Fraction(share) - exact_total) <= 1
        )

    bound_context = None
    if include_bounds:
        y_init = problem.initial_state_error(inst)
        d_out_max = max(1, result.max_out_degree)
        budget = step_budget(y_init, inst.n, d_out_max, eps, d)
        bound_context = {
            "eps": eps,
            "y_init": y_init,
            "d_out_max": d_out_max,
            "token_epochs": token_epochs_bound(inst.n, d_out_max, eps),
            "success_probability": success_probability_bound(y_init, inst.n, eps),
            "step_budget": budget,
            "within_budget": bool(
                result.terminated
                and result.termination_round is not None
                and result.termination_round <= budget
            ),
        }

    return VerificationReport(
        exactness_pass=exactness,
        conservation_pass=conservation,
        simultaneous_stop_pass=stopping,
        workload_match=workload_match,
        bound_context=bound_context,
    )
