import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from slocc3.numerics import (
    DEFAULT_TOL,
    HomogeneousForm,
    NumericalError,
    TolerancePolicy,
    as_cmatrix,
    binary_form_roots,
    chordal_distance,
    cubic_form_roots,
    eigenvalues_3x3,
    normalize_ray,
    numerical_rank,
    svd,
)

# coefficient matrix of the rank-3 reference state, rows/cols in spin order
C_REF = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=np.complex128) / np.sqrt(6)


def char_poly_singulars(c):
    """Independent oracle: singular values from the characteristic
    polynomial of C^H C, assembled via trace identities and np.roots."""
    g = c.conj().T @ c
    t1 = np.trace(g)
    t2 = np.trace(g @ g)
    det = np.linalg.det(g)
    # lambda^3 - t1 lambda^2 + ((t1^2 - t2)/2) lambda - det
    coeffs = [1.0, -t1, (t1 ** 2 - t2) / 2.0, -det]
    lams = np.sort(np.roots(coeffs).real)[::-1]
    return np.sqrt(np.clip(lams, 0.0, None))


class TestTolerancePolicy:
    def test_defaults(self):
        tol = TolerancePolicy()
        assert tol.rank_rel == 1e-9
        assert tol.root_cluster == 1e-7
        assert tol.tol_unitary == 1e-11 and tol.tol_recon == 1e-11

    @pytest.mark.parametrize("field", ["rank_rel", "root_cluster", "tol_unitary"])
    @pytest.mark.parametrize("value", [0.0, -1e-3, 1.0, 2.0])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ValueError):
            TolerancePolicy(**{field: value})


class TestAsCMatrix:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            as_cmatrix([[np.nan, 0], [0, 1]])

    def test_rejects_oversize(self):
        with pytest.raises(ValueError):
            as_cmatrix(np.zeros((10, 3)))


class TestSvd:
    def test_identity(self):
        res = svd(np.eye(3))
        assert_allclose(res.singulars, [1, 1, 1])

    def test_diagonal(self):
        res = svd(np.diag([2.0, 0.5, 0.0]))
        assert_allclose(res.singulars, [2.0, 0.5, 0.0], atol=1e-14)
        assert numerical_rank(res.singulars) == 2

    def test_reference_state_matrix(self):
        # det = -2/6**1.5 != 0, so three singular values survive thresholding
        res = svd(C_REF)
        expected = np.array([2.0, 1.0, 1.0]) / np.sqrt(6)
        assert_allclose(res.singulars, expected, atol=1e-12)
        assert_allclose(res.singulars, char_poly_singulars(C_REF), atol=1e-8)
        assert numerical_rank(res.singulars) == 3

    def test_phase_convention(self, rng):
        c = rng.standard_normal((3, 9)) + 1j * rng.standard_normal((3, 9))
        res = svd(c)
        for k in range(3):
            col = res.left[:, k]
            lead = col[np.argmax(np.abs(col) > 1e-12 * np.abs(col).max())]
            assert abs(lead.imag) < 1e-12 and lead.real > 0

    def test_deterministic(self, rng):
        c = rng.standard_normal((3, 9)) + 1j * rng.standard_normal((3, 9))
        r1, r2 = svd(c), svd(c.copy())
        assert np.array_equal(r1.left, r2.left)
        assert np.array_equal(r1.right, r2.right)

    @pytest.mark.parametrize("shape", [(3, 3), (3, 9)])
    def test_reconstruction_and_unitarity(self, rng, shape):
        for _ in range(300):
            c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            res = svd(c)   # internal validation enforces the tolerances
            assert np.linalg.norm(res.reconstruct() - c) <= 1e-11 * np.linalg.norm(c)


class TestNumericalRank:
    def test_thresholding(self):
        assert numerical_rank([1.0, 1e-3, 1e-15]) == 2

    def test_all_zero(self):
        assert numerical_rank([0.0, 0.0, 0.0]) == 0

    def test_reference_matrix_rank(self):
        assert numerical_rank(svd(C_REF).singulars) == 3

    def test_unitary_invariance(self, rng):
        # same tolerance policy, rank unchanged under unitaries
        for _ in range(50):
            c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            c[:, 2] = c[:, 0] + c[:, 1]       # force rank 2
            q1, _ = np.linalg.qr(rng.standard_normal((3, 3))
                                 + 1j * rng.standard_normal((3, 3)))
            q2, _ = np.linalg.qr(rng.standard_normal((3, 3))
                                 + 1j * rng.standard_normal((3, 3)))
            r0 = numerical_rank(svd(c).singulars)
            r1 = numerical_rank(svd(q1 @ c @ q2).singulars)
            assert r0 == r1 == 2

    @given(st.integers(0, 3))
    def test_rank_counts_kept_values(self, k):
        s = np.sort(np.concatenate([np.ones(k), np.full(3 - k, 1e-16)]))[::-1]
        if k == 0:
            s = np.zeros(3)
        assert numerical_rank(s) == k


class TestEigenvalues:
    def test_diagonal(self):
        assert_allclose(eigenvalues_3x3(np.diag([1.0, 2.0, 3.0])), [1, 2, 3],
                        atol=1e-12)

    def test_repeated_preserved(self):
        assert_allclose(eigenvalues_3x3(np.diag([1.0, 1.0, 2.0])), [1, 1, 2],
                        atol=1e-12)

    def test_cyclic_shift_gives_cube_roots_of_unity(self):
        m = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex)
        lam = eigenvalues_3x3(m)
        expected = np.sort_complex(np.exp(2j * np.pi * np.arange(3) / 3))
        assert_allclose(np.sort_complex(lam), expected, atol=1e-12)

    def test_product_matches_determinant(self, rng):
        for _ in range(200):
            m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            lam = eigenvalues_3x3(m)
            det = np.linalg.det(m)
            assert abs(np.prod(lam) - det) <= 1e-9 * max(abs(det), 1e-12)

    def test_characteristic_residual(self, rng):
        for _ in range(50):
            m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
            scale = np.linalg.norm(m) ** 3
            for lam in eigenvalues_3x3(m):
                assert abs(np.linalg.det(m - lam * np.eye(3))) <= 1e-10 * scale


def _ray_value(ray):
    return ray[0] / ray[1] if abs(ray[1]) > abs(ray[0]) * 1e-8 else np.inf


def _find_root(roots, x, y):
    target = normalize_ray(np.array([x, y], dtype=complex))
    for ray, mult in roots:
        if chordal_distance(ray, target) < 1e-7:
            return mult
    raise AssertionError(f"no root near ({x}:{y}) in {roots}")


class TestCubicFormRoots:
    def test_three_simple_roots(self):
        # det(xI + y diag(1,2,3)) = (x+y)(x+2y)(x+3y)
        coeffs = np.array([1.0, 6.0, 11.0, 6.0], dtype=complex)
        roots = cubic_form_roots(coeffs)
        assert len(roots) == 3
        for y in (1, 2, 3):
            assert _find_root(roots, -y, 1) == 1

    def test_double_root(self):
        # det(xI + y diag(1,1,2)) = (x+y)^2 (x+2y)
        coeffs = np.array([1.0, 4.0, 5.0, 2.0], dtype=complex)
        roots = cubic_form_roots(coeffs)
        assert _find_root(roots, -1, 1) == 2
        assert _find_root(roots, -2, 1) == 1

    def test_identically_zero(self):
        assert cubic_form_roots(np.zeros(4)) is None
        assert cubic_form_roots(np.full(4, 1e-14), scale=1.0) is None

    def test_homogeneous_form_input(self):
        form = HomogeneousForm(2, np.array([1.0, 6.0, 11.0, 6.0]))
        assert len(cubic_form_roots(form)) == 3

    def test_root_at_infinity(self):
        # f = x^2 y: the leading x^3 coefficient vanishes, so the y = 0 ray
        # (1:0) is a root (simple); (0:1) carries the double root
        roots = cubic_form_roots(np.array([0.0, 1.0, 0.0, 0.0]))
        assert _find_root(roots, 1, 0) == 1
        assert _find_root(roots, 0, 1) == 2

    def test_multiplicities_sum_to_three(self, rng):
        for _ in range(100):
            c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            roots = cubic_form_roots(c)
            assert sum(m for _, m in roots) == 3

    def test_residual_property(self, rng):
        # substituting each returned root back gives a tiny residual
        for _ in range(200):
            c = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            form = HomogeneousForm(2, c)
            for ray, _ in cubic_form_roots(c):
                assert abs(form.evaluate(ray)) <= 1e-8 * np.abs(c).max()


class TestBinaryFormRoots:
    def test_quartic(self):
        # (x - y)(x + y)(x - 2y)(x + 2y) = x^4 - 5x^2y^2 + 4y^4
        roots = binary_form_roots(np.array([1.0, 0.0, -5.0, 0.0, 4.0]))
        assert sum(m for _, m in roots) == 4
        assert len(roots) == 4

    def test_cluster_merges(self):
        # (x - y)(x - (1+1e-9) y)(x - 2y): the two 1e-9-separated roots land
        # within the clustering radius and merge into one double root
        a = 1.0 + 1e-9
        coeffs = np.array([1.0, -(3 + a), 2 + 3 * a, -2 * a])
        roots = binary_form_roots(coeffs)
        assert sorted(m for _, m in roots) == [1, 2]


class TestRayHelpers:
    def test_normalize_ray_phase(self, rng):
        v = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        r = normalize_ray(v)
        assert_allclose(np.linalg.norm(r), 1.0)
        piv = r[np.argmax(np.abs(r))]
        assert piv.real > 0 and abs(piv.imag) < 1e-14

    def test_chordal_range(self, rng):
        p = normalize_ray(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        assert chordal_distance(p, p) <= 1e-8
        q = normalize_ray(np.array([p[1].conj(), -p[0].conj()]))
        assert_allclose(chordal_distance(p, q), 1.0, atol=1e-12)


def test_svd_raises_on_bad_input():
    with pytest.raises(ValueError):
        svd(np.array([[np.inf, 0], [0, 1]]))
