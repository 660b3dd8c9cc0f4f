import numpy as np
import pytest

from scarforge.basis import (
    BasisState,
    BasisSubset,
    StateVector,
    bitstring,
    global_spin_flip,
    mirror,
    neel_index,
    set_window,
    state_from_label,
    state_label,
    tile_pattern,
    translate,
    translate_index,
    window_value,
)


def test_bit_convention_msb_first():
    s = BasisState(1, 4)
    assert s.bits() == "0001"
    assert s.label == 2
    assert BasisState(0, 4).label == 1
    assert BasisState(15, 4).label == 16


def test_label_round_trip():
    for label in range(1, 17):
        assert state_label(state_from_label(label)) == label


def test_translate_single_bit():
    s = BasisState(int("1000", 2), 4)
    assert translate(s, 1).bits() == "0100"
    assert translate(s, 0) == s


def test_translate_neel_by_two_is_identity():
    L = 12
    neel = BasisState(neel_index(L), L)
    assert translate(neel, 2) == neel
    assert translate(neel, 1).bits() == "01" * 6


def test_translate_composition_exhaustive():
    for L in (4, 6, 8, 10):
        for x in range(1 << L):
            for a in range(L):
                for b in (0, 1, 3):
                    lhs = translate_index(translate_index(x, a, L), b, L)
                    rhs = translate_index(x, (a + b) % L, L)
                    assert lhs == rhs


def test_mirror():
    assert mirror(BasisState(int("1100", 2), 4)).bits() == "0011"
    assert mirror(BasisState(int("100000", 2), 6)).bits() == "000001"
    pal = BasisState(int("0110", 2), 4)
    assert mirror(pal) == pal


def test_mirror_and_flip_are_involutions():
    for L in (4, 8):
        for x in range(1 << L):
            s = BasisState(x, L)
            assert mirror(mirror(s)) == s
            assert global_spin_flip(global_spin_flip(s)) == s


def test_global_spin_flip():
    assert global_spin_flip(BasisState(0, 4)).bits() == "1111"
    L = 8
    assert global_spin_flip(BasisState(neel_index(L), L)).index == tile_pattern("01", L)


def test_odd_length_rejected():
    with pytest.raises(ValueError):
        BasisState(0, 5)


def test_window_value_and_set_window_wrap():
    L = 6
    x = int("100011", 2)
    # window at site 5 covers sites 5, 6, 1, 2 -> bits 1,1,1,0
    assert window_value(x, 5, 4, L) == int("1110", 2)
    y = set_window(x, 5, 4, L, int("0001", 2))
    assert bitstring(y, L) == "010000"


def test_subset_positions_and_uniqueness():
    sub = BasisSubset([3, 1, 7], 4)
    assert list(sub.states) == [1, 3, 7]
    assert sub.position(3) == 1
    assert 7 in sub and 2 not in sub
    with pytest.raises(ValueError):
        BasisSubset([1, 1, 2], 4)


def test_state_vector_normalization_flag():
    sub = BasisSubset([0, 1], 4)
    StateVector(sub, np.array([1.0, 0.0]), normalized=True)
    with pytest.raises(ValueError):
        StateVector(sub, np.array([1.0, 1.0]), normalized=True)
