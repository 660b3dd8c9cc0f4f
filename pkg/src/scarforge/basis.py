"""Bit-level encoding of qubit-chain basis states and lattice symmetry actions.

A basis state of an L-qubit periodic chain is stored as an integer in
[0, 2**L).  Qubit 1 is the most significant bit, so at L = 4 the string
|0001> has index 1, and states carry the integer label index + 1 (|0000> is
label 1, |1111> is label 16).  Sites are 1-based in the public API; the bit
holding site s sits at position L - s counted from the least significant end.

All types here are immutable values and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PHASE_TOL = 1e-12
NORM_TOL = 1e-10


def bit_of(index, site, length):
    """Bit value (0 or 1) of qubit `site` (1-based) in `index`."""
    return (index >> (length - site)) & 1


def bitstring(index: int, length: int) -> str:
    """0/1 string for a basis state, qubit 1 first."""
    return format(index, f"0{length}b")


def index_of_bitstring(bits: str) -> int:
    return int(bits, 2)


def state_label(index: int) -> int:
    """Integer label of a basis state: index + 1 (|0...0> is label 1)."""
    return index + 1


def state_from_label(label: int) -> int:
    return label - 1


def translate_index(index, shift, length):
    """Move every qubit `shift` sites to the right, with periodic wrap.

    Works elementwise on numpy integer arrays as well as plain ints.
    """
    shift = shift % length
    if shift == 0:
        return index
    mask = (1 << shift) - 1
    return (index >> shift) | ((index & mask) << (length - shift))


def mirror_index(index: int, length: int) -> int:
    """Reflect about the center bond: qubit j goes to qubit L + 1 - j."""
    out = 0
    for site in range(length):
        out = (out << 1) | ((index >> site) & 1)
    return out


def flip_index(index, length):
    """Complement every bit (global spin flip)."""
    return index ^ ((1 << length) - 1)


def tile_pattern(pattern: str, length: int) -> int:
    """Index of the state obtained by tiling `pattern` to L sites."""
    if length % len(pattern) != 0:
        raise ValueError(f"pattern {pattern!r} does not tile {length} sites")
    return index_of_bitstring(pattern * (length // len(pattern)))


def neel_index(length: int, leading: int = 1) -> int:
    """The alternating state |1010...> (leading=1) or |0101...> (leading=0)."""
    return tile_pattern("10" if leading else "01", length)


def window_bit_shifts(site: int, width: int, length: int) -> list[int]:
    """Bit positions (from the LSB) of the w window qubits starting at `site`."""
    return [length - (((site - 1 + t) % length) + 1) for t in range(width)]


def window_value(index, site, width, length):
    """Value in [0, 2**w) of the width-w window starting at `site` (wraps)."""
    value = 0
    for t, b in enumerate(window_bit_shifts(site, width, length)):
        value |= ((index >> b) & 1) << (width - 1 - t)
    return value


def set_window(index, site, width, length, value):
    """Replace the width-w window starting at `site` by `value`."""
    out = index
    for t, b in enumerate(window_bit_shifts(site, width, length)):
        bit = (value >> (width - 1 - t)) & 1
        out = (out & ~(1 << b)) | (bit << b)
    return out


@dataclass(frozen=True)
class BasisState:
    """A computational basis state of an L-qubit chain (L even)."""

    index: int
    length: int

    def __post_init__(self):
        if self.length <= 0 or self.length % 2 != 0:
            raise ValueError(f"chain length must be positive and even, got {self.length}")
        if not 0 <= self.index < (1 << self.length):
            raise ValueError(f"index {self.index} out of range for L={self.length}")

    @property
    def label(self) -> int:
        return state_label(self.index)

    def bits(self) -> str:
        return bitstring(self.index, self.length)

    def __str__(self):
        return f"|{self.bits()}>"


@dataclass(frozen=True)
class PhasedState:
    """A basis state together with a unit-modulus amplitude."""

    state: BasisState
    phase: complex

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > PHASE_TOL:
            raise ValueError(f"phase must have unit modulus, got |{self.phase}|")


def translate(state: BasisState, shift: int) -> BasisState:
    """Shift every qubit `shift` sites to the right (periodic)."""
    return BasisState(translate_index(state.index, shift, state.length), state.length)


def mirror(state: BasisState) -> BasisState:
    """Reflect about the center bond."""
    return BasisState(mirror_index(state.index, state.length), state.length)


def global_spin_flip(state: BasisState) -> BasisState:
    """Complement every bit."""
    return BasisState(flip_index(state.index, state.length), state.length)


class BasisSubset:
    """An ordered set of basis states with O(1) index lookup.

    `states` is an ascending int64 array of state indices; `position(q)` maps a
    state index back to its slot.  The cardinality doubles as the effective
    Hilbert-space dimension of the subset.
    """

    def __init__(self, states, length: int):
        arr = np.asarray(sorted(set(int(s) for s in states)), dtype=np.int64)
        if len(arr) != len(states):
            raise ValueError("subset states must be unique")
        self.states = arr
        self.length = length
        self._pos = {int(s): i for i, s in enumerate(arr)}

    @classmethod
    def full_space(cls, length: int) -> "BasisSubset":
        return cls(np.arange(1 << length, dtype=np.int64), length)

    @property
    def size(self) -> int:
        return len(self.states)

    def __len__(self):
        return self.size

    def __contains__(self, index) -> bool:
        return int(index) in self._pos

    def position(self, index) -> int:
        return self._pos[int(index)]

    def positions(self, indices) -> np.ndarray:
        return np.array([self._pos[int(i)] for i in indices], dtype=np.int64)

    def basis_state(self, slot: int) -> BasisState:
        return BasisState(int(self.states[slot]), self.length)

    def __eq__(self, other):
        return (
            isinstance(other, BasisSubset)
            and self.length == other.length
            and np.array_equal(self.states, other.states)
        )


@dataclass
class StateVector:
    """Complex amplitudes over a basis subset."""

    subset: BasisSubset
    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.subset.size,):
            raise ValueError("amplitude array does not match subset size")
        if self.normalized and abs(self.norm() ** 2 - 1.0) > NORM_TOL:
            raise ValueError("state flagged normalized violates unit norm")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @classmethod
    def from_basis_index(cls, subset: BasisSubset, index: int) -> "StateVector":
        amps = np.zeros(subset.size, dtype=complex)
        amps[subset.position(index)] = 1.0
        return cls(subset, amps, normalized=True)
