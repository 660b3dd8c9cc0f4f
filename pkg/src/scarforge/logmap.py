"""Exact local Hamiltonians h0 = i log(U0) from permutation gates.

The log is taken cycle by cycle: a cycle of length l with accumulated phase
angle Phi contributes eigenvectors with eigenphases (Phi + 2 pi m)/l, each
mapped to its principal value in (-pi, pi].  This keeps exp(-i h0) equal to
the gate exactly and pins every eigenvalue of h0 inside the principal strip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gate import PermutationGate, gate_matrix, gate_order

STRUCTURAL_ZERO = 1e-12
RECONSTRUCTION_TOL = 1e-9
DEPENDENCE_RTOL = 1e-9


class NonPeriodicGateError(ValueError):
    """The gate has no finite order below the search bound."""


CUT_GUARD = 1e-12


def wrap_angle(theta):
    """Map an angle to the half-open principal interval (-pi, pi].

    Angles within 1e-12 above the cut still count as +pi: eigenphase
    arithmetic can land one ulp past pi (e.g. 2*pi*26/52 rounds high), and
    flipping such a value to -pi would shift an eigenvalue by a full turn.
    Genuine eigenphases of the gates handled here are separated by far more
    than the guard.
    """
    wrapped = theta - 2.0 * np.pi * np.ceil((theta - np.pi - CUT_GUARD) / (2.0 * np.pi))
    return np.minimum(wrapped, np.pi)


@dataclass(frozen=True)
class LocalHamiltonian:
    """Hermitian window Hamiltonian with exp(-i h) equal to the source gate."""

    matrix: np.ndarray
    gate: PermutationGate


@dataclass(frozen=True)
class PowerDecomposition:
    """Coefficients c_k with sum_k c_k U**k = h0, k = 0..n-1.

    The coefficient vector depends only on the gate order n.  Entries with
    |c_k| below 1e-12 are structural zeros: the decomposition genuinely does
    not need that power (no reduced re-solve is attempted).
    """

    order: int
    coefficients: np.ndarray
    reconstruction_error: float

    @property
    def structural_zeros(self) -> np.ndarray:
        return np.abs(self.coefficients) < STRUCTURAL_ZERO

    def to_json(self) -> dict:
        return {
            "n": self.order,
            "coefficients": [[c.real, c.imag] for c in self.coefficients],
            "reconstruction_error": self.reconstruction_error,
        }


@dataclass(frozen=True)
class ClosingRelation:
    """Minimal m with h**m = sum_{k<m} alpha_k h**k."""

    power: int
    alpha: np.ndarray


def _cycle_eigenpairs(gate: PermutationGate, values: list[int]):
    """Eigenphases and eigenvectors of the gate restricted to one cycle.

    Walking the cycle accumulates the exact product of table phases; the
    cycle phase angle comes from that product, not from a floating log of
    matrix elements.
    """
    l = len(values)
    walk_phase = np.ones(l, dtype=complex)
    acc = 1.0 + 0.0j
    for k in range(1, l):
        acc = acc * gate.phases[values[k - 1]]
        walk_phase[k] = acc
    total = acc * gate.phases[values[l - 1]]
    phi = wrap_angle(np.angle(total))
    pairs = []
    for m in range(l):
        beta = (phi + 2.0 * np.pi * m) / l
        vec = np.zeros(gate.dim, dtype=complex)
        for k, v in enumerate(values):
            vec[v] = np.exp(-1j * k * beta) * walk_phase[k] / np.sqrt(l)
        pairs.append((beta, vec))
    return pairs


def principal_log(gate: PermutationGate, n_max: int = 64) -> LocalHamiltonian:
    """Hermitian h0 with exp(-i h0) = gate and eigenvalues in (-pi, pi]."""
    order = gate_order(gate, n_max)
    if not order.found:
        raise NonPeriodicGateError(
            "gate has no finite order (accumulated phases are not a root of unity)"
        )
    h = np.zeros((gate.dim, gate.dim), dtype=complex)
    for values in gate.value_cycles():
        for beta, vec in _cycle_eigenpairs(gate, values):
            h -= wrap_angle(beta) * np.outer(vec, vec.conj())
    return LocalHamiltonian(h, gate)


def decomposition_coefficients(n: int) -> np.ndarray:
    """Coefficient vector (c_0..c_{n-1}) for expressing h0 in gate powers.

    Every cycle contributes the full set of augmented eigenphase angles
    2 pi s / n, so the solve collapses to a single discrete Fourier sum that
    depends only on n; two gates of equal order share one vector.
    """
    s = np.arange(1, n + 1)
    gamma = 2.0 * np.pi * s / n
    gamma_tilde = wrap_angle(gamma)
    k = np.arange(n)
    return -(np.exp(-1j * np.outer(k, gamma)) @ gamma_tilde) / n


def power_decomposition(gate: PermutationGate, n_max: int = 64) -> PowerDecomposition:
    """Decompose h0 = i log(gate) as sum_k c_k gate**k, k = 0..n-1."""
    order = gate_order(gate, n_max)
    if not order.found:
        raise NonPeriodicGateError(
            "gate has no finite order (accumulated phases are not a root of unity)"
        )
    n = order.n
    coeffs = decomposition_coefficients(n)
    u = gate_matrix(gate)
    h = principal_log(gate, n_max).matrix
    recon = np.zeros_like(h)
    power = np.eye(gate.dim, dtype=complex)
    for k in range(n):
        recon += coeffs[k] * power
        power = u @ power
    err = float(np.linalg.norm(recon - h))
    if err > RECONSTRUCTION_TOL:
        raise RuntimeError(f"power reconstruction failed, residual {err:.3e}")
    return PowerDecomposition(n, coeffs, err)


def closing_relation(h: LocalHamiltonian, n: int) -> ClosingRelation:
    """Find the minimal m <= n with h**m a combination of lower powers.

    Powers are vectorized and tested for linear dependence incrementally;
    singular directions below 1e-9 of the leading one count as dependent.
    The relation always exists by m = n.
    """
    mat = h.matrix
    dim = mat.shape[0]
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(n):
        powers.append(powers[-1] @ mat)
    columns = [p.reshape(-1) for p in powers]
    for m in range(1, n + 1):
        basis = np.stack(columns[:m], axis=1)
        target = columns[m]
        alpha, *_ = np.linalg.lstsq(basis, target, rcond=DEPENDENCE_RTOL)
        residual = np.linalg.norm(basis @ alpha - target)
        scale = max(1.0, np.linalg.norm(target))
        if residual < DEPENDENCE_RTOL * scale:
            return ClosingRelation(m, alpha)
    raise RuntimeError(f"no closing relation found up to power {n}")
