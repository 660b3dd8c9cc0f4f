import numpy as np
import pytest

from scarforge.automaton import (
    FloquetCircuit,
    all_orbits,
    apply_floquet,
    floquet_eigenstates,
    floquet_matrix,
    orbit_of,
)
from scarforge.basis import BasisState, neel_index, tile_pattern
from scarforge.gate import identity_gate


def test_geometry_validation(models):
    with pytest.raises(ValueError):
        FloquetCircuit(models["qmbs-a"].gate, 7, "stride4")
    with pytest.raises(ValueError):
        FloquetCircuit(models["qmbs-a"].gate, 12, "hexagonal")
    # non-commuting same-layer windows are rejected in the dense geometry
    with pytest.raises(ValueError):
        FloquetCircuit(models["qmbs-a"].gate, 12, "stride2")


def test_layer_sites(models):
    c = models["qmbs-a"].circuit(12)
    assert c.second_layer_sites == (1, 5, 9)
    assert c.first_layer_sites == (3, 7, 11)
    p = models["pxp"].circuit(8)
    assert p.second_layer_sites == (1, 3, 5, 7)
    assert p.first_layer_sites == (2, 4, 6, 8)


def test_brickwork_needed_for_application(models):
    c = models["qmbs-a"].circuit(10)  # valid Hamiltonian geometry, no automaton
    assert not c.is_brickwork
    with pytest.raises(ValueError):
        apply_floquet(c, BasisState(0, 10))


def test_identity_circuit_fixes_everything():
    c = FloquetCircuit(identity_gate(4), 8, "stride4")
    for x in range(256):
        out = apply_floquet(c, BasisState(x, 8))
        assert out.state.index == x and out.phase == 1.0
        orb = orbit_of(c, x)
        assert orb.cycle_length == 1 and orb.phi == 0.0


def test_qmbs_circuits_swap_alternating_states(models):
    L = 12
    neel = neel_index(L)
    anti = tile_pattern("01", L)
    for name in ("qmbs-a", "qmbs-b", "qmbs-c"):
        c = models[name].circuit(L)
        out = apply_floquet(c, BasisState(neel, L))
        assert out.state.index == anti
        assert abs(out.phase - 1.0) < 1e-12
        orb = orbit_of(c, neel)
        assert orb.cycle_length == 2 and abs(orb.phi) < 1e-12


def test_pxp_protected_cycle(models):
    L = 12
    c = models["pxp"].circuit(L)
    orb = orbit_of(c, tile_pattern("1", L))
    assert orb.cycle_length == 3
    bits = [format(s, f"0{L}b") for s in orb.states]
    assert bits == ["1" * L, "01" * (L // 2), "10" * (L // 2)]
    assert abs(orb.phi) < 1e-12


def test_orbit_overflow(models):
    from scarforge.automaton import CycleOverflowError

    c = models["pxp"].circuit(8)
    with pytest.raises(CycleOverflowError):
        orbit_of(c, tile_pattern("1", 8), l_max=2)  # the cycle has length 3


def test_eigenphase_ladder(models):
    L = 12
    c = models["pxp"].circuit(L)
    orb = orbit_of(c, tile_pattern("1", L))
    phases = orb.eigenphases()
    assert np.allclose(np.diff(phases), 2 * np.pi / orb.cycle_length)


def test_floquet_eigenstates_are_eigenstates(models):
    # oracle: apply the circuit directly to the constructed eigenvector
    L = 12
    c = models["pxp"].circuit(L)
    orb = orbit_of(c, tile_pattern("1", L))
    states = floquet_eigenstates(orb, c)
    for est in states:
        vec = est.vector
        out = np.zeros_like(vec.amplitudes)
        for pos, x in enumerate(vec.subset.states):
            res = apply_floquet(c, BasisState(int(x), L))
            out[vec.subset.position(res.state.index)] += res.phase * vec.amplitudes[pos]
        assert np.max(np.abs(out - np.exp(1j * est.beta) * vec.amplitudes)) < 1e-10
    # distinct eigenphases are orthogonal
    for a in states:
        for b in states:
            ip = np.vdot(a.vector.amplitudes, b.vector.amplitudes)
            assert abs(ip - (1.0 if a.m == b.m else 0.0)) < 1e-10


def test_two_cycle_eigenstates_are_symmetric_combinations(models):
    L = 8
    c = models["qmbs-c"].circuit(L)
    orb = orbit_of(c, neel_index(L))
    states = floquet_eigenstates(orb, c)
    assert sorted(round(e.beta, 12) for e in states) == [0.0, round(np.pi, 12)]
    for est in states:
        amps = np.sort(np.abs(est.vector.amplitudes))
        assert np.allclose(amps, [1 / np.sqrt(2)] * 2)


def test_fixed_point_phase_eigenstate():
    # single-state cycle with a nontrivial phase: eigenphase equals that angle
    from scarforge.gate import parse_gate

    phases = [np.exp(1j * np.pi / 3)] + [1.0] * 15  # label 1 fixed with a 6th root
    g = parse_gate([], phases)
    c = FloquetCircuit(g, 8, "stride4")
    orb = orbit_of(c, 0)
    assert orb.cycle_length == 1
    # four windows each contribute pi/3: total 4*pi/3, wrapped to -2*pi/3
    assert orb.phi == pytest.approx(-2 * np.pi / 3)
    est = floquet_eigenstates(orb, c)[0]
    assert est.beta == pytest.approx(orb.phi)
    assert est.vector.amplitudes.tolist() == [1.0]


def test_exhaustive_cycle_decomposition_l8(models):
    L = 8
    c = models["qmbs-b"].circuit(L)
    orbits = all_orbits(c)
    total = sum(o.cycle_length for o in orbits)
    assert total == 1 << L
    # all eigenstates together are a complete orthonormal basis
    vectors = np.zeros((1 << L, 1 << L), dtype=complex)
    k = 0
    for orb in orbits:
        for est in floquet_eigenstates(orb, c):
            amps = est.vector.amplitudes
            for pos, x in enumerate(est.vector.subset.states):
                vectors[int(x), k] = amps[pos]
            k += 1
    assert k == 1 << L
    gram = vectors.conj().T @ vectors
    assert np.max(np.abs(gram - np.eye(1 << L))) < 1e-9


def test_apply_floquet_matches_dense_matrix(models):
    L = 8
    for name in ("qmbs-a", "pxp"):
        c = models[name].circuit(L)
        mat = floquet_matrix(c)
        assert np.max(np.abs(mat @ mat.conj().T - np.eye(1 << L))) < 1e-10
        for x in (0, 17, 85, 170, 255):
            out = apply_floquet(c, BasisState(x, L))
            col = mat[:, x]
            assert abs(col[out.state.index] - out.phase) < 1e-12
