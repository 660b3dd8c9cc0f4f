import numpy as np
import pytest
import scipy.linalg as la

from scarforge.automaton import FloquetCircuit, floquet_matrix
from scarforge.basis import BasisSubset, neel_index, tile_pattern
from scarforge.gate import identity_gate
from scarforge.hamiltonian import (
    SubsetNotClosedError,
    SymmetrySector,
    build_hamiltonian,
    krylov_subspace,
    operator_commutes,
    project_sector,
    restrict_dense,
    sector_basis,
)
from scarforge.models import (
    anti_aligned_pair_states,
    embedded_block_reference,
    expected_krylov_dimension,
    working_subspace,
)


def test_identity_gate_gives_zero_hamiltonian():
    subset = BasisSubset.full_space(8)
    chain = build_hamiltonian(FloquetCircuit(identity_gate(4), 8, "stride4"), subset)
    assert chain.h.nnz == 0


def test_h_is_a_plus_b_and_hermitian(models):
    subset = BasisSubset.full_space(8)
    chain = build_hamiltonian(models["qmbs-b"].circuit(8), subset)
    assert abs(chain.h - (chain.a + chain.b)).max() == 0
    for m in (chain.a, chain.b):
        assert abs(m - m.getH()).max() < 1e-10


def test_layer_exponentials_reproduce_circuit(models):
    # exp(-iA) exp(-iB) must equal the dense Floquet matrix at small L
    L = 8
    for name in ("qmbs-c", "pxp"):
        circuit = models[name].circuit(L)
        subset = BasisSubset.full_space(L)
        chain = build_hamiltonian(circuit, subset)
        u = la.expm(-1j * chain.a.toarray()) @ la.expm(-1j * chain.b.toarray())
        assert np.max(np.abs(u - floquet_matrix(circuit))) < 1e-9


def test_krylov_dimensions_match_formulas(models):
    for name, lengths in (
        ("pxp", (8, 10, 12, 16)),
        ("qmbs-b", (8, 10, 12)),
        ("qmbs-c", (8, 10, 12)),
    ):
        m = models[name]
        for L in lengths:
            sub = krylov_subspace(m.circuit(L), m.orbit_seed(L))
            assert sub.size == expected_krylov_dimension(name, L)


def test_qmbs_a_component_misses_only_inert_states(models):
    # the seed's component excludes exactly the two uniform dark states,
    # which the widened working basis restores
    m = models["qmbs-a"]
    for L in (8, 10, 12):
        sub = krylov_subspace(m.circuit(L), m.orbit_seed(L))
        assert sub.size == (1 << L) - 2
        missing = set(range(1 << L)) - set(int(s) for s in sub.states)
        assert missing == {0, (1 << L) - 1}
        assert working_subspace(m, L).size == expected_krylov_dimension("qmbs-a", L)


def test_subset_not_closed_reports_state(models):
    m = models["pxp"]
    L = 8
    circuit = m.circuit(L)
    sub = krylov_subspace(circuit, m.orbit_seed(L))
    broken = BasisSubset(sub.states[:-1], L)
    with pytest.raises(SubsetNotClosedError):
        build_hamiltonian(circuit, broken)


def test_pxp_bandwidth_near_thirty(models):
    m = models["pxp"]
    L = 16
    sub = krylov_subspace(m.circuit(L), m.orbit_seed(L))
    chain = build_hamiltonian(m.circuit(L), sub)
    evals = np.linalg.eigvalsh(chain.h.toarray())
    span = evals[-1] - evals[0]
    assert 25.0 < span < 36.0


def test_qmbs_c_embedded_block(models):
    L = 12
    subset = BasisSubset.full_space(L)
    chain = build_hamiltonian(models["qmbs-c"].circuit(L), subset)
    w = anti_aligned_pair_states(L)
    block = restrict_dense(chain.h, subset, w)
    assert np.max(np.abs(block - embedded_block_reference(L))) < 1e-12


def test_sector_operators_commute(models):
    m = models["qmbs-b"]
    L = 12
    sub = working_subspace(m, L)
    chain = build_hamiltonian(m.circuit(L), sub)
    assert operator_commutes(chain.h, sub, "S2") < 1e-10
    assert operator_commutes(chain.h, sub, "USM") < 1e-10


def test_project_sector_counts_and_hermiticity(models):
    m = models["qmbs-a"]
    L = 12
    sub = working_subspace(m, L)
    chain = build_hamiltonian(m.circuit(L), sub)
    sector = SymmetrySector((("S2", 1), ("USM", 1)))
    hs, basis = project_sector(chain.h, sub, sector)
    # orbit count of the dihedral action on 4096 states
    assert basis.size == 350
    assert np.max(np.abs(hs - hs.conj().T)) < 1e-10
    # the symmetric alternating-state combination survives projection
    neel = neel_index(L)
    members = [orbit for orbit, _ in basis.orbits if neel in orbit]
    assert len(members) == 1 and sorted(members[0]) == sorted(
        [tile_pattern("01", L), neel]
    )


def test_project_sector_spectrum_matches_direct_block(models):
    # oracle: diagonalize the full operator and compare sector eigenvalues
    m = models["qmbs-a"]
    L = 8
    sub = working_subspace(m, L)
    chain = build_hamiltonian(m.circuit(L), sub)
    sector = SymmetrySector((("S2", 1), ("USM", 1)))
    hs, basis = project_sector(chain.h, sub, sector)
    sector_evals = np.linalg.eigvalsh(hs)
    # build the projector onto the signed orbit sums explicitly
    dim = sub.size
    vecs = np.zeros((dim, basis.size), dtype=complex)
    for k, (members, signs) in enumerate(basis.orbits):
        for state, sign in zip(members, signs):
            vecs[sub.position(int(state)), k] = sign / np.sqrt(len(members))
    dense = chain.h.toarray()
    direct = vecs.conj().T @ dense @ vecs
    assert np.max(np.abs(direct - hs)) < 1e-10
    assert np.max(np.abs(np.linalg.eigvalsh(direct) - sector_evals)) < 1e-9


def test_project_sector_rejects_noncommuting():
    # a gate with no mirror symmetry: USM fails to commute
    from scarforge.gate import parse_gate

    g = parse_gate([[2, 3]], [1.0] * 16)  # swap |0001> and |0010>
    circuit = FloquetCircuit(g, 8, "stride4")
    sub = BasisSubset.full_space(8)
    chain = build_hamiltonian(circuit, sub)
    sector = SymmetrySector((("USM", 1),))
    if operator_commutes(chain.h, sub, "USM") > 1e-9:
        with pytest.raises(ValueError):
            project_sector(chain.h, sub, sector)
    else:
        pytest.skip("probe gate unexpectedly symmetric")


def test_sector_basis_orthonormal(models):
    m = models["qmbs-b"]
    L = 10
    sub = working_subspace(m, L)
    basis = sector_basis(sub, SymmetrySector((("S2", 1), ("USM", 1))))
    dim = sub.size
    vecs = np.zeros((dim, basis.size))
    for k, (members, signs) in enumerate(basis.orbits):
        for state, sign in zip(members, signs):
            vecs[sub.position(int(state)), k] = sign / np.sqrt(len(members))
    gram = vecs.T @ vecs
    assert np.max(np.abs(gram - np.eye(basis.size))) < 1e-12


def test_dump_operator_schema(models):
    from scarforge.hamiltonian import dump_operator, subset_hash

    m = models["qmbs-c"]
    L = 8
    sub = working_subspace(m, L)
    chain = build_hamiltonian(m.circuit(L), sub)
    dump = dump_operator(chain.h, sub, "qmbs-c")
    assert dump["model"] == "qmbs-c" and dump["L"] == L
    assert dump["subset_hash"] == subset_hash(sub)
    assert all(len(e) == 4 for e in dump["entries"])
    rows = [(e[0], e[1]) for e in dump["entries"]]
    assert rows == sorted(rows)
    # round-trip one entry against the matrix
    r, c, re, im = dump["entries"][0]
    assert chain.h[r, c] == pytest.approx(re + 1j * im)
