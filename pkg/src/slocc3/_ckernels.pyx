# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched small-matrix kernels (LAPACK-backed).

Selected at import time by ``slocc3._kernels`` when available; semantics
match ``slocc3._pykernels`` exactly.  Singular values and eigenvalues are
transpose-invariant, so row-major 3x3 blocks are handed to LAPACK as-is.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_lapack cimport zgeev, zgesvd

cnp.import_array()

BACKEND = "compiled"


def batch_det3(mats):
    """Determinants of a stack of 3x3 complex matrices."""
    a = np.ascontiguousarray(mats, dtype=np.complex128)
    shape = a.shape[:-2]
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] m = a.reshape(-1, 3, 3)
    cdef Py_ssize_t n = m.shape[0], i
    out_arr = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = out_arr
    for i in range(n):
        out[i] = (m[i, 0, 0] * (m[i, 1, 1] * m[i, 2, 2] - m[i, 1, 2] * m[i, 2, 1])
                  - m[i, 0, 1] * (m[i, 1, 0] * m[i, 2, 2] - m[i, 1, 2] * m[i, 2, 0])
                  + m[i, 0, 2] * (m[i, 1, 0] * m[i, 2, 1] - m[i, 1, 1] * m[i, 2, 0]))
    return out_arr.reshape(shape)


def batch_singvals3(mats):
    """Singular values (descending) of a stack of 3x3 complex matrices."""
    a = np.ascontiguousarray(mats, dtype=np.complex128)
    shape = a.shape[:-2]
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] m = a.reshape(-1, 3, 3)
    cdef Py_ssize_t n = m.shape[0], i, j, k
    out_arr = np.empty((n, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = out_arr
    cdef double complex buf[9]
    cdef double complex work[64]
    cdef double complex zdum[1]
    cdef double rwork[16]
    cdef double s[3]
    cdef int mm = 3, nn = 3, lda = 3, ldu = 1, ldvt = 1, lwork = 64, info = 0
    cdef char jobn = b'N'
    for i in range(n):
        for j in range(3):
            for k in range(3):
                buf[3 * j + k] = m[i, j, k]
        zgesvd(&jobn, &jobn, &mm, &nn, buf, &lda, s, zdum, &ldu, zdum, &ldvt,
               work, &lwork, rwork, &info)
        if info != 0:
            raise np.linalg.LinAlgError("zgesvd did not converge")
        out[i, 0] = s[0]
        out[i, 1] = s[1]
        out[i, 2] = s[2]
    return out_arr.reshape(shape + (3,))


cdef int _eig3(double complex *a, double complex *w) except -1:
    # a: 3x3 buffer (overwritten), w: 3 eigenvalues
    cdef double complex work[64]
    cdef double complex zdum[1]
    cdef double rwork[8]
    cdef int nn = 3, lda = 3, ldv = 1, lwork = 64, info = 0
    cdef char jobn = b'N'
    zgeev(&jobn, &jobn, &nn, a, &lda, w, zdum, &ldv, zdum, &ldv,
          work, &lwork, rwork, &info)
    if info != 0:
        raise np.linalg.LinAlgError("zgeev did not converge")
    return 0


def batch_eigvals3(mats):
    """Eigenvalues (unordered) of a stack of 3x3 complex matrices."""
    a = np.ascontiguousarray(mats, dtype=np.complex128)
    shape = a.shape[:-2]
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] m = a.reshape(-1, 3, 3)
    cdef Py_ssize_t n = m.shape[0], i, j, k
    out_arr = np.empty((n, 3), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = out_arr
    cdef double complex buf[9]
    cdef double complex w[3]
    for i in range(n):
        for j in range(3):
            for k in range(3):
                buf[3 * j + k] = m[i, j, k]
        _eig3(buf, w)
        out[i, 0] = w[0]
        out[i, 1] = w[1]
        out[i, 2] = w[2]
    return out_arr.reshape(shape + (3,))


def batch_cubic_roots(coeffs):
    """Roots of cubics ``c3 t^3 + c2 t^2 + c1 t + c0`` (rows ``(c3,c2,c1,c0)``,
    ``c3`` bounded away from zero) via companion-matrix eigenvalues."""
    c = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] cc = c.reshape(-1, 4)
    cdef Py_ssize_t n = cc.shape[0], i
    out_arr = np.empty((n, 3), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = out_arr
    cdef double complex buf[9]
    cdef double complex w[3]
    cdef double complex lead
    for i in range(n):
        lead = cc[i, 0]
        # companion in column-major layout: subdiagonal ones, last column -monic
        buf[0] = 0; buf[1] = 1; buf[2] = 0
        buf[3] = 0; buf[4] = 0; buf[5] = 1
        buf[6] = -cc[i, 3] / lead
        buf[7] = -cc[i, 2] / lead
        buf[8] = -cc[i, 1] / lead
        _eig3(buf, w)
        out[i, 0] = w[0]
        out[i, 1] = w[1]
        out[i, 2] = w[2]
    return out_arr
