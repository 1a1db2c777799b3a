"""Vectorized numpy implementation of the batched small-matrix kernels.

This is the fallback backend used when the compiled extension
(``slocc3._ckernels``) is unavailable or disabled; both expose the same
four functions with identical semantics (see ``slocc3._kernels``).
"""

import numpy as np

BACKEND = "python"


def batch_det3(mats):
    """Determinants of a stack of 3x3 complex matrices.

    Parameters
    ----------
    mats : ndarray, shape (..., 3, 3)

    Returns
    -------
    ndarray, shape (...,)
    """
    a = np.asarray(mats, dtype=np.complex128)
    return (a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]))


def batch_singvals3(mats):
    """Singular values (descending) of a stack of 3x3 complex matrices."""
    a = np.asarray(mats, dtype=np.complex128)
    return np.linalg.svd(a, compute_uv=False)


def batch_eigvals3(mats):
    """Eigenvalues (unordered) of a stack of 3x3 complex matrices."""
    a = np.asarray(mats, dtype=np.complex128)
    return np.linalg.eigvals(a)


def batch_cubic_roots(coeffs):
    """Roots of monic-normalizable cubics via their companion matrices.

    Parameters
    ----------
    coeffs : ndarray, shape (n, 4)
        Rows ``(c3, c2, c1, c0)`` of ``c3 t^3 + c2 t^2 + c1 t + c0`` with
        ``c3`` bounded away from zero (the caller strips degenerate rows).

    Returns
    -------
    ndarray, shape (n, 3)
    """
    c = np.asarray(coeffs, dtype=np.complex128)
    n = c.shape[0]
    monic = c[:, 1:] / c[:, :1]
    comp = np.zeros((n, 3, 3), dtype=np.complex128)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 2] = -monic[:, 2]
    comp[:, 1, 2] = -monic[:, 1]
    comp[:, 2, 2] = -monic[:, 0]
    return np.linalg.eigvals(comp)
