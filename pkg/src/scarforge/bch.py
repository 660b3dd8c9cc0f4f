"""Nested-commutator series for log(e^{-iA} e^{-iB}) and its diagnostics.

Write Z(s) = log(e^{sX} e^{sY}) with X = -iA, Y = -iB.  Differentiating the
defining product gives

    Z'(s) = sum_k  (B_k / k!) ad_Z^k (X + Y)  +  [Z, Y],

where B_k are the Bernoulli numbers (B_1 = -1/2); the lone extra commutator
absorbs the sign flip of B_1 for the Y argument.  Grading by powers of s
turns this into an exact recursion for the homogeneous pieces Z_n built from
nested commutators of lower pieces, with rational coefficients generated as
exact fractions.  The degree-(n+1) piece maps back to the Hermitian series
term C_n = i Z_{n+1}, with C_0 = A + B.

All operands are anti-Hermitian, so each commutator costs one product:
[P, Q] = PQ - (PQ)^dagger.  Matrices stay dense below a dimension threshold
and sparse above it, with entries below 1e-13 of the largest magnitude
dropped per nesting level to stop noise fill-in.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import numpy as np
import scipy.sparse as sp

MAX_ORDER = 12
DENSE_LIMIT = 2500
SPARSE_PRUNE = 1e-13


def bernoulli_numbers(count: int) -> list[Fraction]:
    """B_0 .. B_{count-1} with the B_1 = -1/2 convention, as exact fractions."""
    out = [Fraction(1)]
    for m in range(1, count):
        acc = Fraction(0)
        for k in range(m):
            acc += comb(m + 1, k) * out[k]
        out.append(-acc / (m + 1))
    return out


def _prune(mat):
    if sp.issparse(mat):
        mat = mat.tocsr()
        if mat.nnz:
            cut = SPARSE_PRUNE * np.abs(mat.data).max()
            mat.data[np.abs(mat.data) < cut] = 0.0
            mat.eliminate_zeros()
    return mat


def _commutator(left, right):
    prod = left @ right
    if sp.issparse(prod):
        return _prune((prod - prod.getH()).tocsr())
    return prod - prod.conj().T


@dataclass
class BchSeries:
    """Series terms C_0..C_N over a fixed basis subset."""

    terms: list
    max_order: int

    def term(self, n: int):
        return self.terms[n]


def _as_working(mat, dense: bool):
    if dense:
        return mat.toarray() if sp.issparse(mat) else np.asarray(mat, dtype=complex)
    return sp.csr_matrix(mat, dtype=complex)


def bch_terms(a, b, n_orders: int, dense: bool | None = None) -> BchSeries:
    """Compute C_0..C_{n_orders} for the two layer Hamiltonians a and b."""
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError("layer matrices must be square and of equal shape")
    if n_orders < 0 or n_orders > MAX_ORDER:
        raise ValueError(f"order must lie in [0, {MAX_ORDER}]")
    dim = a.shape[0]
    if dense is None:
        dense = dim <= DENSE_LIMIT

    a = _as_working(a, dense)
    b = _as_working(b, dense)
    # Enforce exact anti-Hermiticity of the generators.
    if dense:
        x = -0.5j * (a + a.conj().T)
        y = -0.5j * (b + b.conj().T)
    else:
        x = (-0.5j * (a + a.getH())).tocsr()
        y = (-0.5j * (b + b.getH())).tocsr()
    s = x + y

    bern = bernoulli_numbers(n_orders + 1)
    z = [None, s]          # z[m] holds the degree-m piece
    table: dict[tuple[int, int], object] = {}

    def t_entry(k: int, d: int):
        if k == 0:
            return s if d == 0 else None
        return table.get((k, d))

    for deg in range(1, n_orders + 1):
        for k in range(1, deg + 1):
            acc = None
            for m in range(1, deg - k + 2):
                lower = t_entry(k - 1, deg - m)
                if lower is None:
                    continue
                term = _commutator(z[m], lower)
                acc = term if acc is None else acc + term
            if acc is not None:
                table[(k, deg)] = _prune(acc)
        rhs = _commutator(z[deg], y)
        for k in range(1, deg + 1):
            coeff = bern[k]
            if coeff == 0:
                continue
            entry = t_entry(k, deg)
            if entry is None:
                continue
            rhs = rhs + (float(coeff) / factorial(k)) * entry
        z.append(_prune(rhs * (1.0 / (deg + 1))))

    terms = [1j * z[n + 1] for n in range(n_orders + 1)]
    if not dense:
        terms = [t.tocsr() for t in terms]
    return BchSeries(terms, n_orders)


# ---------------------------------------------------------------------------
# Projected norms, augmented Hamiltonians, decay estimate
# ---------------------------------------------------------------------------


def _frobenius_sq(mat) -> float:
    if sp.issparse(mat):
        return float(np.sum(np.abs(mat.data) ** 2)) if mat.nnz else 0.0
    return float(np.sum(np.abs(mat) ** 2))


def _block_norms(mat, orbit_positions: np.ndarray) -> tuple[float, float, float]:
    """Frobenius norms of (orbit|orbit), (rest|orbit), (rest|rest) blocks."""
    orb = np.asarray(orbit_positions, dtype=int)
    if sp.issparse(mat):
        csc = mat.tocsc()
        cols = csc[:, orb]
        col_sq = float(np.sum(np.abs(cols.data) ** 2)) if cols.nnz else 0.0
        block = cols.tocsr()[orb]
        block_sq = float(np.sum(np.abs(block.data) ** 2)) if block.nnz else 0.0
        rows = mat.tocsr()[orb]
        row_sq = float(np.sum(np.abs(rows.data) ** 2)) if rows.nnz else 0.0
    else:
        cols = mat[:, orb]
        col_sq = float(np.sum(np.abs(cols) ** 2))
        block_sq = float(np.sum(np.abs(cols[orb, :]) ** 2))
        row_sq = float(np.sum(np.abs(mat[orb, :]) ** 2))
    total_sq = _frobenius_sq(mat)
    orbit_sq = block_sq
    leak_sq = max(col_sq - block_sq, 0.0)
    generic_sq = max(total_sq - col_sq - row_sq + block_sq, 0.0)
    return orbit_sq, leak_sq, generic_sq


@dataclass
class NormProfile:
    """Normalized Frobenius norms of each series term split by the orbit
    projector: within the orbit (per orbit state), orbit-to-generic leakage,
    and generic-to-generic."""

    orders: np.ndarray
    orbit_norm: np.ndarray
    leakage_norm: np.ndarray
    generic_norm: np.ndarray


def norm_profile(series: BchSeries, orbit_positions, n_eff: int | None = None) -> NormProfile:
    orb = np.asarray(sorted(orbit_positions), dtype=int)
    l = len(orb)
    dim = series.terms[0].shape[0]
    if n_eff is None:
        n_eff = dim
    orders = np.arange(series.max_order + 1)
    orbit, leak, generic = [], [], []
    for term in series.terms:
        orbit_sq, leak_sq, generic_sq = _block_norms(term, orb)
        orbit.append(np.sqrt(orbit_sq) / l)
        leak.append(np.sqrt(leak_sq) / np.sqrt(l * n_eff))
        generic.append(np.sqrt(generic_sq) / n_eff)
    return NormProfile(orders, np.array(orbit), np.array(leak), np.array(generic))


def augmented_hamiltonian(series: BchSeries, order: int):
    """Partial sum C_0 + ... + C_order."""
    if order > series.max_order:
        raise ValueError(f"series only holds orders up to {series.max_order}")
    out = series.terms[0]
    for n in range(1, order + 1):
        out = out + series.terms[n]
    return out


@dataclass
class DecayEstimate:
    rate: float
    leakage_c2: float
    n_eff: int
    cycle_length: int
    chain_length: int
    bandwidth: float


def fgr_rate(series: BchSeries, orbit_positions, chain_length: int, bandwidth: float) -> DecayEstimate:
    """Golden-rule decay rate from the second-order orbit-to-generic coupling:
    2 pi (2 N_eff / (L Delta)) |leakage(C_2)|^2 / (N_eff l)."""
    if series.max_order < 2:
        raise ValueError("decay estimate needs the series through order 2")
    orb = np.asarray(sorted(orbit_positions), dtype=int)
    l = len(orb)
    n_eff = series.terms[0].shape[0]
    _, leak_sq, _ = _block_norms(series.terms[2], orb)
    rate = 2.0 * np.pi * (2.0 * n_eff / (chain_length * bandwidth)) * leak_sq / (n_eff * l)
    return DecayEstimate(float(rate), float(np.sqrt(leak_sq)), n_eff, l, chain_length, bandwidth)
