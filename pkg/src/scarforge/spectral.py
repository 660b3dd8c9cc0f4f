"""Eigen-analysis diagnostics: IPR scatter, scar flags, gap ratios, scaling.

The gap-ratio statistic r_n = min(d_{n+1}/d_n, d_n/d_{n+1}) distinguishes
Poissonian from level-repelling spectra without unfolding; exact degeneracies
are merged first so that scar towers do not inject spurious zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import BasisSubset

DENSE_GUARD = 6000
DEGENERACY_TOL = 1e-12
HISTOGRAM_BINS = 50
FLAG_THRESHOLD = 0.02


@dataclass
class SpectrumAnalysis:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ipr: np.ndarray
    overlaps: np.ndarray       # (n_states, n_reference) overlap amplitudes
    flagged: np.ndarray        # overlap amplitude above the flag threshold
    subset: BasisSubset
    flag_threshold: float = FLAG_THRESHOLD


def analyze_spectrum(
    hamiltonian,
    subset: BasisSubset,
    reference_states=(),
    flag_threshold: float = FLAG_THRESHOLD,
) -> SpectrumAnalysis:
    """Full eigensystem with inverse participation ratios and reference
    overlaps; states overlapping any reference above the threshold are
    flagged as scar candidates."""
    dim = subset.size
    if dim > DENSE_GUARD:
        raise ValueError(
            f"dense spectrum refused above dimension {DENSE_GUARD}; project to a sector first"
        )
    if hamiltonian.shape != (dim, dim):
        raise ValueError("operator dimension does not match the subset")
    dense = hamiltonian.toarray() if sp.issparse(hamiltonian) else np.asarray(hamiltonian)
    energies, modes = np.linalg.eigh(dense)
    pr = np.sum(np.abs(modes) ** 4, axis=0)
    ipr = 1.0 / pr
    refs = [subset.position(int(s)) for s in reference_states]
    if refs:
        overlaps = np.abs(modes[refs, :]).T
        flagged = np.any(overlaps > flag_threshold, axis=1)
    else:
        overlaps = np.zeros((dim, 0))
        flagged = np.zeros(dim, dtype=bool)
    return SpectrumAnalysis(energies, modes, ipr, overlaps, flagged, subset, flag_threshold)


def flagged_tower_energies(analysis: SpectrumAnalysis, merge_tol: float = 1e-8) -> np.ndarray:
    """Distinct energies of the flagged states, nearby values merged."""
    energies = np.sort(analysis.eigenvalues[analysis.flagged])
    if len(energies) == 0:
        return energies
    towers = [energies[0]]
    for e in energies[1:]:
        if e - towers[-1] > merge_tol:
            towers.append(e)
    return np.array(towers)


@dataclass
class RStatReport:
    r_values: np.ndarray
    bin_edges: np.ndarray
    density: np.ndarray
    mean: float


def r_statistic(
    eigenvalues,
    merge_tol: float = DEGENERACY_TOL,
    bins: int = HISTOGRAM_BINS,
) -> RStatReport:
    """Gap-ratio list, normalized histogram on [0, 1], and mean.

    Levels closer than `merge_tol` collapse to a single level before ratios
    are formed; fewer than three surviving levels is an error.
    """
    levels = np.sort(np.asarray(eigenvalues, dtype=float))
    kept = [levels[0]]
    for e in levels[1:]:
        if e - kept[-1] > merge_tol:
            kept.append(e)
    kept = np.asarray(kept)
    if len(kept) < 3:
        raise ValueError("need at least three distinct levels")
    gaps = np.diff(kept)
    r = np.minimum(gaps[1:], gaps[:-1]) / np.maximum(gaps[1:], gaps[:-1])
    density, edges = np.histogram(r, bins=bins, range=(0.0, 1.0), density=True)
    return RStatReport(r, edges, density, float(np.mean(r)))


@dataclass
class ScalingRow:
    length: int
    n_eff: int
    pr_max: float
    pr_min: float


def scaling_scan(
    model_name: str,
    lengths,
    t_window: tuple[float, float] = (10.0, 300.0),
    dt: float = 0.05,
) -> list[ScalingRow]:
    """Extrema of the alternating-seed participation-ratio trace per length."""
    from .dynamics import EvolutionJob, evolve, pr_trace
    from .hamiltonian import build_hamiltonian
    from .models import load_model, working_subspace

    model = load_model(model_name)
    rows = []
    for length in lengths:
        circuit = model.circuit(length)
        seed = model.orbit_seed(length)
        subset = working_subspace(model, length)
        chain = build_hamiltonian(circuit, subset)
        job = EvolutionJob(chain.h, subset, seed, t_max=t_window[1], dt=dt)
        result = evolve(job)
        trace = pr_trace(result)
        mask = (result.times > t_window[0]) & (result.times <= t_window[1])
        rows.append(
            ScalingRow(length, subset.size, float(trace[mask].max()), float(trace[mask].min()))
        )
    return rows
