"""Quantized ratio consensus with a distributed stopping rule.

A library and deterministic simulation engine for balancing CPU workload
across server nodes: every node reaches the floor or ceiling of the exact
target ratio in finitely many rounds, detects agreement through windowed
max/min consensus, and stops in the same round as everyone else.
"""

from .problem import ProblemInstance, check_feasibility, optimal_workload, q_tasks
from .topology import Digraph, generate_random_digraph, load_digraph, save_digraph
from .engine import SweepStats, TrialConfig, TrialResult, run_sweep, run_trial
from .oracle import VerificationReport, verify_trial

__version__ = "0.1.0"

__all__ = [
    "Digraph",
    "ProblemInstance",
    "SweepStats",
    "TrialConfig",
    "TrialResult",
    "VerificationReport",
    "check_feasibility",
    "generate_random_digraph",
    "load_digraph",
    "optimal_workload",
    "q_tasks",
    "run_sweep",
    "run_trial",
    "save_digraph",
    "verify_trial",
]
