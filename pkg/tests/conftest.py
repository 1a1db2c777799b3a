import numpy as np
import pytest

from slocc3.states import PureState


def ket(*terms, parties=3):
    """Unit-normalized state with amplitude 1 on each listed ket tuple."""
    amps = np.zeros((3,) * parties, dtype=np.complex128)
    for t in terms:
        amps[t] = 1.0
    return PureState(amps / np.linalg.norm(amps))


def states_close(s1, s2, atol=1e-10):
    """Equality of normalized states up to a global phase."""
    a = s1.normalized().amplitudes.ravel()
    b = s2.normalized().amplitudes.ravel()
    phase = np.vdot(b, a)
    if abs(phase) == 0.0:
        return False
    return np.linalg.norm(a - b * phase / abs(phase)) <= atol


def random_state(rng, parties=3, dims=3):
    shape = (dims,) * parties
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return PureState(a / np.linalg.norm(a))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
