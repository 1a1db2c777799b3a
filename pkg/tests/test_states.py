import json

import numpy as np
import pytest
from conftest import ket, random_state, states_close
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from slocc3.numerics import DEFAULT_TOL, numerical_rank, svd
from slocc3.states import (
    CATALOG_FAMILIES,
    CanonicalId,
    PureState,
    StateFormatError,
    canonical_state,
    catalog_ids,
    flatten,
    read_state,
    unflatten,
    variant_count,
    write_state,
)


class TestPureState:
    def test_rejects_zero_state(self):
        with pytest.raises(ValueError):
            PureState(np.zeros((3, 3, 3)))

    def test_rejects_nonfinite(self):
        a = np.zeros((3, 3)); a[0, 0] = np.inf
        with pytest.raises(ValueError):
            PureState(a)

    def test_rejects_non_qutrit_tripartite(self):
        with pytest.raises(ValueError):
            PureState(np.ones((2, 2, 2)))

    def test_immutable(self):
        s = ket((0, 0, 0))
        with pytest.raises(ValueError):
            s.amplitudes[0, 0, 0] = 2.0

    def test_norm_recorded(self):
        s = PureState(2.0 * np.eye(3))
        assert_allclose(s.norm, 2.0 * np.sqrt(3))
        assert_allclose(s.normalized().norm, 1.0)


class TestFlatten:
    def test_single_ket(self):
        m = flatten(ket((0, 0, 0)), 1).matrix
        assert m.shape == (3, 9)
        assert m[0, 0] == 1.0 and np.count_nonzero(m) == 1

    def test_row_layout(self):
        # |000>+|011>+|022>: row 0 carries (1,0,0,0,1,0,0,0,1)
        s = ket((0, 0, 0), (0, 1, 1), (0, 2, 2))
        m = flatten(s, 1).matrix * np.sqrt(3)
        assert_allclose(m[0], [1, 0, 0, 0, 1, 0, 0, 0, 1], atol=1e-15)
        assert_allclose(m[1:], 0.0, atol=1e-15)

    def test_pivot2_ghz_layout(self):
        s = ket((0, 0, 0), (1, 1, 1), (2, 2, 2))
        m = flatten(s, 2).matrix * np.sqrt(3)
        for j in range(3):
            assert m[j, 3 * j + j] == 1.0
        assert np.count_nonzero(m) == 3

    def test_pivot_permutation_oracle(self, rng):
        # pivot-2 flattening equals pivot-1 flattening of the index-permuted state
        s = random_state(rng)
        permuted = PureState(np.transpose(s.amplitudes, (1, 0, 2)))
        assert_allclose(flatten(s, 2).matrix, flatten(permuted, 1).matrix)
        permuted3 = PureState(np.transpose(s.amplitudes, (2, 0, 1)))
        assert_allclose(flatten(s, 3).matrix, flatten(permuted3, 1).matrix)

    def test_round_trip(self, rng):
        s = random_state(rng)
        for pivot in (1, 2, 3):
            back = unflatten(flatten(s, pivot), s.dims)
            assert_allclose(back.amplitudes, s.amplitudes)

    def test_norm_preserving(self, rng):
        s = random_state(rng)
        for pivot in (1, 2, 3):
            assert_allclose(np.linalg.norm(flatten(s, pivot).matrix), s.norm)

    def test_invalid_pivot(self):
        with pytest.raises(ValueError):
            flatten(ket((0, 0, 0)), 4)
        with pytest.raises(ValueError):
            flatten(ket((0, 0), parties=2), 3)

    def test_schmidt_rank_matches_density_matrix_oracle(self, rng):
        # rank of the flattening == rank of the reduced density matrix C C^H
        for _ in range(20):
            s = random_state(rng)
            for pivot in (1, 2, 3):
                c = flatten(s, pivot).matrix
                r_svd = numerical_rank(svd(c).singulars)
                evals = np.sort(np.linalg.eigvalsh(c @ c.conj().T))[::-1]
                thr = (DEFAULT_TOL.rank_rel ** 2) * evals[0]
                r_dm = int(np.sum(evals > thr))
                assert r_svd == r_dm


class TestCatalog:
    def test_counts(self):
        # 3 bipartite + 3 single-generator + 15 pencil rows + 25 triple rows
        ids = catalog_ids()
        assert len(ids) == 46
        assert len(catalog_ids(parties=3)) == 43
        assert len(catalog_ids(parties=2)) == 3
        dim2 = sum(variant_count(f) for f in ("P0P0", "P1P1", "P0P1", "P0P2", "P1P2"))
        assert dim2 == 15
        dim3 = sum(variant_count(f) for f in
                   ("P0P0P0", "P0P0P1", "P0P0P2", "P1P1P0", "P1P1P1", "P1P1P2", "P2P1P0"))
        assert dim3 == 25

    def test_bipartite_canonicals(self):
        assert states_close(canonical_state(CanonicalId("bi-P1")),
                            ket((0, 0), (1, 1), parties=2))

    def test_dim1_product(self):
        assert states_close(canonical_state(CanonicalId("dim1-P0")), ket((0, 0, 0)))

    def test_p0p0_variant3(self):
        assert states_close(canonical_state(CanonicalId("P0P0", 3)),
                            ket((0, 0, 0), (1, 1, 1)))

    def test_p1p1p1_variant1(self):
        expected = ket((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 2), (2, 0, 2), (2, 2, 1))
        assert states_close(canonical_state(CanonicalId("P1P1P1", 1)), expected)

    def test_p1p2_variant1(self):
        expected = ket((0, 0, 0), (0, 1, 1), (0, 2, 2), (1, 0, 1), (1, 1, 2))
        assert states_close(canonical_state(CanonicalId("P1P2", 1)), expected)

    def test_all_normalized(self):
        for cid in catalog_ids():
            assert_allclose(canonical_state(cid).norm, 1.0, atol=1e-12)

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            CanonicalId("bogus")

    def test_variant_out_of_range(self):
        with pytest.raises(ValueError):
            CanonicalId("P0P0", 4)

    def test_parameters_rejected_outside_p0p0p1(self):
        with pytest.raises(ValueError):
            CanonicalId("P1P2", 1, {"phi": np.array([1, 0, 0])})

    def test_p0p0p1_custom_parameters(self):
        params = {"phi": np.array([1, 0, 0]), "varphi": np.array([0, 1, 0]),
                  "chi": np.array([0, 0, 1]), "psi": np.array([1, 1, 0])}
        s = canonical_state(CanonicalId("P0P0P1", 1, params))
        m = flatten(s, 1).matrix * s.norm / s.normalized().norm
        # row 1 is phi (x) varphi = E01, row 2 is chi (x) psi
        row1 = m[1].reshape(3, 3)
        expected = np.outer([1, 0, 0], [0, 1, 0])
        assert_allclose(row1 / np.abs(row1).max(), expected, atol=1e-12)
        row2 = m[2].reshape(3, 3)
        expected2 = np.outer([0, 0, 1], [1, 1, 0]) / np.sqrt(2)
        assert_allclose(row2 / np.abs(row2).max() * expected2.max(), expected2,
                        atol=1e-12)

    def test_p0p0p1_bad_parameters(self):
        with pytest.raises(ValueError):
            canonical_state(CanonicalId("P0P0P1", 1, {"phi": np.array([1, 0, 0])}))
        with pytest.raises(ValueError):
            canonical_state(CanonicalId("P0P0P1", 1, {
                "phi": np.zeros(3), "varphi": np.ones(3),
                "chi": np.ones(3), "psi": np.ones(3)}))


class TestStateIO:
    def test_simple_bipartite(self):
        data = json.dumps({
            "parties": 2,
            "amplitudes": [{"index": [0, 0], "re": 1.0, "im": 0.0},
                           {"index": [1, 1], "re": 1.0, "im": 0.0}],
        })
        s = read_state(data)
        assert states_close(s, ket((0, 0), (1, 1), parties=2))

    def test_round_trip_bitwise(self, rng):
        s = random_state(rng)
        payload = write_state(s)
        assert write_state(read_state(payload)) == payload

    @given(st.integers(0, 2 ** 48 - 1))
    @settings(max_examples=25, deadline=None)
    def test_round_trip_amplitudes(self, seed):
        s = random_state(np.random.default_rng(seed))
        back = read_state(write_state(s))
        assert_allclose(back.amplitudes, s.amplitudes, atol=0)

    def test_unnormalized_norm_kept(self):
        data = json.dumps({"parties": 2,
                           "amplitudes": [{"index": [0, 0], "re": 2.0, "im": 0.0}]})
        assert_allclose(read_state(data).norm, 2.0)

    def test_dense_wrong_count(self):
        data = json.dumps({"parties": 3, "amplitudes": [1.0] * 26})
        with pytest.raises(StateFormatError, match="wrong amplitude count"):
            read_state(data)

    def test_duplicate_index(self):
        data = json.dumps({"parties": 2,
                           "amplitudes": [{"index": [0, 0], "re": 1.0, "im": 0.0},
                                          {"index": [0, 0], "re": 1.0, "im": 0.0}]})
        with pytest.raises(StateFormatError, match="duplicate"):
            read_state(data)

    def test_all_zero(self):
        data = json.dumps({"parties": 2,
                           "amplitudes": [{"index": [0, 0], "re": 0.0, "im": 0.0}]})
        with pytest.raises(StateFormatError):
            read_state(data)

    def test_malformed_json(self):
        with pytest.raises(StateFormatError):
            read_state(b"{not json")

    def test_bad_index(self):
        data = json.dumps({"parties": 3,
                           "amplitudes": [{"index": [0, 0], "re": 1.0, "im": 0.0}]})
        with pytest.raises(StateFormatError):
            read_state(data)

    def test_bad_parties(self):
        with pytest.raises(StateFormatError):
            read_state(json.dumps({"parties": 4, "amplitudes": [1.0]}))
