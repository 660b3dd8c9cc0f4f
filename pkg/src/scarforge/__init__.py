"""Floquet permutation automata and the scar Hamiltonians extracted from them."""

__version__ = "0.1.0"

from .basis import BasisState, BasisSubset, PhasedState, StateVector
from .gate import PermutationGate, apply_gate, gate_matrix, gate_order, parse_gate
from .logmap import closing_relation, power_decomposition, principal_log
from .automaton import FloquetCircuit, apply_floquet, floquet_eigenstates, orbit_of
from .models import load_model

__all__ = [
    "BasisState",
    "BasisSubset",
    "PhasedState",
    "StateVector",
    "PermutationGate",
    "parse_gate",
    "gate_order",
    "apply_gate",
    "gate_matrix",
    "principal_log",
    "power_decomposition",
    "closing_relation",
    "FloquetCircuit",
    "apply_floquet",
    "orbit_of",
    "floquet_eigenstates",
    "load_model",
    "__version__",
]
