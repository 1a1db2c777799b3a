"""The two kernel backends must be interchangeable."""

import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from slocc3 import _pykernels

try:
    from slocc3 import _ckernels
except ImportError:
    _ckernels = None

needs_compiled = pytest.mark.skipif(_ckernels is None,
                                    reason="compiled kernels not built")


@pytest.fixture
def mats(rng):
    return rng.standard_normal((200, 3, 3)) + 1j * rng.standard_normal((200, 3, 3))


@needs_compiled
class TestBackendEquivalence:
    def test_det(self, mats):
        assert_allclose(_ckernels.batch_det3(mats), _pykernels.batch_det3(mats),
                        atol=1e-12)

    def test_singvals(self, mats):
        assert_allclose(_ckernels.batch_singvals3(mats),
                        _pykernels.batch_singvals3(mats), atol=1e-12)

    def test_eigvals(self, mats):
        a = np.sort_complex(_ckernels.batch_eigvals3(mats))
        b = np.sort_complex(_pykernels.batch_eigvals3(mats))
        assert_allclose(a, b, atol=1e-10)

    def test_cubic_roots(self, rng):
        coeffs = rng.standard_normal((50, 4)) + 1j * rng.standard_normal((50, 4))
        a = np.sort_complex(_ckernels.batch_cubic_roots(coeffs))
        b = np.sort_complex(_pykernels.batch_cubic_roots(coeffs))
        assert_allclose(a, b, atol=1e-10)


def test_det_formula_exact(rng):
    m = rng.standard_normal((20, 3, 3)) + 1j * rng.standard_normal((20, 3, 3))
    assert_allclose(_pykernels.batch_det3(m), np.linalg.det(m), atol=1e-13)


def test_env_var_forces_python_backend():
    code = ("import slocc3; import sys; "
            "sys.exit(0 if slocc3.kernel_backend() == 'python' else 1)")
    proc = subprocess.run([sys.executable, "-c", code],
                          env={"PATH": "/usr/bin:/bin", "SLOCC3_PURE": "1"})
    assert proc.returncode == 0
