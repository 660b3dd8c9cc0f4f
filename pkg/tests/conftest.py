import numpy as np
import pytest

from scarforge.models import load_model


@pytest.fixture(scope="session")
def models():
    return {name: load_model(name) for name in ("qmbs-a", "qmbs-b", "qmbs-c", "pxp", "pxp-nophase")}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)


def random_phase_gate(rng, width=4, phase_choices=(1, 1j, -1, -1j)):
    """Random permutation gate with fourth-root-of-unity phases."""
    from scarforge.gate import PermutationGate

    dim = 1 << width
    perm = rng.permutation(dim)
    phases = rng.choice(np.array(phase_choices, dtype=complex), size=dim)
    return PermutationGate(width, tuple(int(v) for v in perm), tuple(phases))
