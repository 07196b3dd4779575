"""Heuristic Hamiltonian path/cycle solver with state-trajectory instrumentation."""

from .chaos import ChaosStats, TraceRecorder, analyze, difference_signal, lyapunov, zero_one_test
from .graph import Graph, articulation_points, is_connected
from .hcp_io import Kind, brute_force_hamiltonian, parse_instance, read_instance, verify_sequence
from .mapping import map_initial
from .rpolicy import PolicyConfig, RunReport, solve
from .state import SolverConfig

__version__ = "0.1.0"

__all__ = [
    "ChaosStats",
    "Graph",
    "Kind",
    "PolicyConfig",
    "RunReport",
    "SolverConfig",
    "TraceRecorder",
    "analyze",
    "articulation_points",
    "brute_force_hamiltonian",
    "difference_signal",
    "is_connected",
    "lyapunov",
    "map_initial",
    "parse_instance",
    "read_instance",
    "solve",
    "verify_sequence",
    "zero_one_test",
]
