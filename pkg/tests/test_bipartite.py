import numpy as np
import pytest
from conftest import ket, states_close
from numpy.testing import assert_allclose

from slocc3.bipartite import (
    IloPair,
    apply_ilo_bipartite,
    canonicalize_bipartite,
    classify_bipartite,
)
from slocc3.harness import random_invertible
from slocc3.numerics import NumericalError
from slocc3.states import PureState

# reference biqutrit states in spin order |1>, |0>, |-1>  ->  indices 0, 1, 2
STATE_I = ket((0, 0), (1, 1), parties=2)
STATE_II = ket((0, 0), (1, 1), (2, 2), parties=2)
STATE_III = ket((0, 0), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1), parties=2)
F2_MIXER = np.array([[1, 1, -1], [1, -1, 1], [-1, 1, 1]], dtype=complex) / np.sqrt(2)


def random_pair(rng, cond=50.0):
    return IloPair(random_invertible(rng, cond), random_invertible(rng, cond))


class TestClassify:
    def test_product_state(self):
        cls = classify_bipartite(ket((0, 0), parties=2))
        assert cls.schmidt_rank == 1
        assert states_close(cls.canonical, ket((0, 0), parties=2))

    def test_rank2(self):
        cls = classify_bipartite(ket((0, 0), (1, 1), parties=2))
        assert cls.schmidt_rank == 2

    def test_rank3_reference(self):
        assert classify_bipartite(STATE_III).schmidt_rank == 3

    def test_reference_ranks(self):
        # the three reference states classify as 2 / 3 / 3
        assert classify_bipartite(STATE_I).schmidt_rank == 2
        assert classify_bipartite(STATE_II).schmidt_rank == 3
        assert classify_bipartite(STATE_III).schmidt_rank == 3

    def test_rejects_tripartite(self):
        with pytest.raises(ValueError):
            classify_bipartite(ket((0, 0, 0)))

    @pytest.mark.parametrize("n", [2, 3, 4, 5])
    def test_nxn_rank_is_schmidt_rank(self, rng, n):
        # every rank 1..n is realized and reported exactly
        for r in range(1, n + 1):
            a = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
            b = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
            s = PureState(a @ b)
            assert classify_bipartite(s).schmidt_rank == r


class TestApplyIlo:
    def test_identity(self, rng):
        s = ket((0, 0), (1, 1), parties=2)
        out = apply_ilo_bipartite(s, IloPair(np.eye(3), np.eye(3)))
        assert states_close(out, s)

    def test_explicit_rank3_mapping(self):
        # the fixed mixer sends the 6-term rank-3 state onto the diagonal one
        out = apply_ilo_bipartite(STATE_III, IloPair(np.eye(3), F2_MIXER))
        err = np.linalg.norm(out.normalized().amplitudes - STATE_II.amplitudes)
        assert err <= 1e-12

    def test_rank_invariance_of_product_states(self, rng):
        s = ket((0, 0), parties=2)
        for _ in range(20):
            out = apply_ilo_bipartite(s, random_pair(rng))
            assert classify_bipartite(out).schmidt_rank == 1

    def test_rank_invariance_random(self, rng):
        for _ in range(100):
            a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            s = PureState(a)
            r0 = classify_bipartite(s).schmidt_rank
            out = apply_ilo_bipartite(s, random_pair(rng))
            assert classify_bipartite(out).schmidt_rank == r0

    def test_composition_law(self, rng):
        # applying (f1,f2) then (g1,g2) equals applying (g1 f1, g2 f2)
        for _ in range(25):
            s = PureState(rng.standard_normal((3, 3))
                          + 1j * rng.standard_normal((3, 3)))
            p1, p2 = random_pair(rng), random_pair(rng)
            twice = apply_ilo_bipartite(apply_ilo_bipartite(s, p1), p2)
            combined = apply_ilo_bipartite(
                s, IloPair(p2.f1 @ p1.f1, p2.f2 @ p1.f2))
            assert np.linalg.norm(twice.amplitudes - combined.amplitudes) <= 1e-10

    def test_singular_factor_rejected(self):
        with pytest.raises(NumericalError):
            IloPair(np.diag([1.0, 1.0, 0.0]), np.eye(3))


class TestCanonicalize:
    def test_already_canonical(self):
        cls, pair = canonicalize_bipartite(STATE_II)
        assert cls.schmidt_rank == 3
        # identity up to overall scale and the phase convention
        assert_allclose(pair.f1 / pair.f1[0, 0], np.eye(3), atol=1e-10)
        assert_allclose(pair.f2 / pair.f2[0, 0], np.eye(3), atol=1e-10)

    @pytest.mark.parametrize("state", [STATE_I, STATE_II, STATE_III],
                             ids=["rank2", "diag3", "mixed3"])
    def test_apply_and_compare(self, state):
        cls, pair = canonicalize_bipartite(state)
        out = apply_ilo_bipartite(state, pair)
        assert states_close(out, cls.canonical, atol=1e-8)

    def test_rank1_product(self):
        # (|0>+|1>) (x) |2> maps onto |00>
        amps = np.outer([1.0, 1.0, 0.0], [0.0, 0.0, 1.0]) / np.sqrt(2)
        s = PureState(amps)
        cls, pair = canonicalize_bipartite(s)
        assert cls.schmidt_rank == 1
        assert states_close(apply_ilo_bipartite(s, pair), ket((0, 0), parties=2),
                            atol=1e-8)

    def test_random_states(self, rng):
        for _ in range(50):
            s = PureState(rng.standard_normal((3, 3))
                          + 1j * rng.standard_normal((3, 3)))
            cls, pair = canonicalize_bipartite(s)
            assert states_close(apply_ilo_bipartite(s, pair), cls.canonical,
                                atol=1e-8)

    def test_class_is_orbit_invariant(self, rng):
        # canonicalize(apply_ilo(s)) gives the same class as canonicalize(s)
        for _ in range(30):
            s = PureState(rng.standard_normal((3, 3))
                          + 1j * rng.standard_normal((3, 3)))
            r0 = canonicalize_bipartite(s)[0].schmidt_rank
            moved = apply_ilo_bipartite(s, random_pair(rng))
            assert canonicalize_bipartite(moved)[0].schmidt_rank == r0
