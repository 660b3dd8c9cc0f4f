"""Local permutation-with-phase unitaries on w-qubit windows.

A gate is a bijection of the 2**w window labels plus one unit-modulus phase
per label: acting on label q it produces phase(q) times label sigma(q).
Gates are parsed from cycle notation over 1-based labels; labels absent from
every cycle map to themselves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import gcd

import numpy as np

from .basis import (
    BasisState,
    PhasedState,
    set_window,
    window_value,
)

PHASE_TOL = 1e-12
ORDER_PHASE_TOL = 1e-10


class GateDefinitionError(ValueError):
    """Malformed cycle notation or phase map."""


@dataclass(frozen=True)
class PermutationGate:
    """Permutation gate on a w-qubit window.

    perm[v] is the 0-based target of window value v; phases[v] multiplies the
    source value v.  Acting on a window in value v the gate yields
    phases[v] * |perm[v]>.
    """

    width: int
    perm: tuple[int, ...]
    phases: tuple[complex, ...]

    def __post_init__(self):
        dim = 1 << self.width
        if len(self.perm) != dim or sorted(self.perm) != list(range(dim)):
            raise GateDefinitionError("permutation is not a bijection over the window labels")
        if len(self.phases) != dim:
            raise GateDefinitionError(f"phase map must have {dim} entries")
        for ph in self.phases:
            if abs(abs(ph) - 1.0) > PHASE_TOL:
                raise GateDefinitionError(f"phase {ph} is not unit modulus")

    @property
    def dim(self) -> int:
        return 1 << self.width

    def label_cycles(self) -> list[list[int]]:
        """Nontrivial cycles of the permutation, in 1-based label notation."""
        seen = [False] * self.dim
        cycles = []
        for start in range(self.dim):
            if seen[start] or self.perm[start] == start:
                seen[start] = True
                continue
            cyc = []
            v = start
            while not seen[v]:
                seen[v] = True
                cyc.append(v + 1)
                v = self.perm[v]
            cycles.append(cyc)
        return cycles

    def value_cycles(self) -> list[list[int]]:
        """All cycles (including fixed points) over 0-based window values."""
        seen = [False] * self.dim
        cycles = []
        for start in range(self.dim):
            if seen[start]:
                continue
            cyc = []
            v = start
            while not seen[v]:
                seen[v] = True
                cyc.append(v)
                v = self.perm[v]
            cycles.append(cyc)
        return cycles


@dataclass(frozen=True)
class GateOrder:
    """Smallest n with gate**n acting as the identity with total phase one."""

    n: int
    found: bool


def identity_gate(width: int) -> PermutationGate:
    dim = 1 << width
    return PermutationGate(width, tuple(range(dim)), (1.0 + 0.0j,) * dim)


def parse_gate(cycles, phases, width: int = 4) -> PermutationGate:
    """Build a gate from cycle notation (1-based labels) and a phase map."""
    dim = 1 << width
    perm = list(range(dim))
    seen = set()
    for cyc in cycles:
        for label in cyc:
            if not 1 <= label <= dim:
                raise GateDefinitionError(f"label {label} outside [1, {dim}]")
            if label in seen:
                raise GateDefinitionError(f"label {label} appears in more than one cycle")
            seen.add(label)
        for i, label in enumerate(cyc):
            target = cyc[(i + 1) % len(cyc)]
            perm[label - 1] = target - 1
    phase_tuple = tuple(complex(p) for p in phases)
    return PermutationGate(width, tuple(perm), phase_tuple)


def gate_order(gate: PermutationGate, n_max: int = 64) -> GateOrder:
    """Search for the smallest n <= n_max with gate**n == identity.

    The permutation part alone has order lcm of its cycle lengths; phases can
    push the full order to a multiple of that, or (for phases that are not
    roots of unity) prevent any finite order, reported as found=False.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    perm = np.asarray(gate.perm)
    phases = np.asarray(gate.phases)
    current = np.arange(gate.dim)
    acc = np.ones(gate.dim, dtype=complex)
    for n in range(1, n_max + 1):
        acc = acc * phases[current]
        current = perm[current]
        if np.array_equal(current, np.arange(gate.dim)) and np.all(
            np.abs(acc - 1.0) < ORDER_PHASE_TOL
        ):
            return GateOrder(n, True)
    return GateOrder(0, False)


def permutation_order(gate: PermutationGate) -> int:
    """Order of the permutation part alone (phases ignored)."""
    out = 1
    for cyc in gate.value_cycles():
        out = out * len(cyc) // gcd(out, len(cyc))
    return out


def apply_gate_index(gate, index, site, length):
    """Fast path: act on a raw state index, returning (new_index, phase)."""
    v = window_value(index, site, gate.width, length)
    return set_window(index, site, gate.width, length, gate.perm[v]), gate.phases[v]


def apply_gate(gate: PermutationGate, state: BasisState, site: int) -> PhasedState:
    """Apply the gate to the w-qubit window starting at `site` (periodic)."""
    if not 1 <= site <= state.length:
        raise ValueError(f"site {site} outside [1, {state.length}]")
    new_index, phase = apply_gate_index(gate, state.index, site, state.length)
    return PhasedState(BasisState(new_index, state.length), phase)


def gate_matrix(gate: PermutationGate) -> np.ndarray:
    """Dense 2**w x 2**w unitary: column v holds phases[v] at row perm[v]."""
    mat = np.zeros((gate.dim, gate.dim), dtype=complex)
    for v in range(gate.dim):
        mat[gate.perm[v], v] = gate.phases[v]
    return mat


def gate_to_json(gate: PermutationGate) -> dict:
    return {
        "width": gate.width,
        "cycles": gate.label_cycles(),
        "phases": [[p.real, p.imag] for p in gate.phases],
    }


def gate_from_json(data: dict) -> PermutationGate:
    phases = [complex(re, im) for re, im in data["phases"]]
    return parse_gate(data["cycles"], phases, width=data["width"])


def load_gate(path) -> PermutationGate:
    with open(path) as fh:
        return gate_from_json(json.load(fh))


def save_gate(gate: PermutationGate, path) -> None:
    with open(path, "w") as fh:
        json.dump(gate_to_json(gate), fh, indent=1)
