# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: batched cyclic Jacobi eigensolver for small symmetric matrices.

Works in double and in x87 extended (``long double``) precision.
"""

cimport cython
import numpy as np

from libc.math cimport fabs, sqrt, fabsl, sqrtl

ctypedef fused real_t:
    double
    long double

cdef int MAX_SWEEPS = 64


cdef inline real_t _abs(real_t x) noexcept nogil:
    if real_t is double:
        return fabs(x)
    else:
        return fabsl(x)


cdef inline real_t _sqrt(real_t x) noexcept nogil:
    if real_t is double:
        return sqrt(x)
    else:
        return sqrtl(x)


cdef void _jacobi_one(real_t[:, ::1] s, real_t[:, ::1] v, real_t[::1] w,
                      real_t eps) noexcept nogil:
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t p, q, k, i, j
    cdef int sweep, rotated
    cdef real_t app, aqq, apq, tau, t, c, sn, skp, skq, tmp

    for i in range(n):
        for j in range(n):
            v[i, j] = 1.0 if i == j else 0.0

    for sweep in range(MAX_SWEEPS):
        rotated = 0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[p, q]
                app = s[p, p]
                aqq = s[q, q]
                # relative threshold keeps small eigenvalues of definite matrices accurate
                if apq == 0.0 or _abs(apq) <= eps * _sqrt(_abs(app * aqq)):
                    s[p, q] = 0.0
                    s[q, p] = 0.0
                    continue
                rotated = 1
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + _sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + _sqrt(1.0 + tau * tau))
                c = 1.0 / _sqrt(1.0 + t * t)
                sn = t * c
                for k in range(n):
                    skp = s[k, p]
                    skq = s[k, q]
                    s[k, p] = c * skp - sn * skq
                    s[k, q] = sn * skp + c * skq
                for k in range(n):
                    skp = s[p, k]
                    skq = s[q, k]
                    s[p, k] = c * skp - sn * skq
                    s[q, k] = sn * skp + c * skq
                s[p, q] = 0.0
                s[q, p] = 0.0
                for k in range(n):
                    skp = v[k, p]
                    skq = v[k, q]
                    v[k, p] = c * skp - sn * skq
                    v[k, q] = sn * skp + c * skq
        if not rotated:
            break

    for i in range(n):
        w[i] = s[i, i]
    # insertion sort, ascending, columns of v follow
    for i in range(1, n):
        j = i
        while j > 0 and w[j - 1] > w[j]:
            tmp = w[j - 1]
            w[j - 1] = w[j]
            w[j] = tmp
            for k in range(n):
                tmp = v[k, j - 1]
                v[k, j - 1] = v[k, j]
                v[k, j] = tmp
            j -= 1


cdef void _jacobi_batch(real_t[:, :, ::1] s, real_t[:, :, ::1] v, real_t[:, ::1] w,
                        real_t eps) noexcept nogil:
    cdef Py_ssize_t idx
    for idx in range(s.shape[0]):
        _jacobi_one(s[idx], v[idx], w[idx], eps)


@cython.wraparound(True)
def sym_eigh(a):
    """Eigendecomposition of a stack of symmetric matrices.

    Parameters
    ----------
    a : ndarray, shape (..., n, n)
        Symmetric matrices, float64 or longdouble. Never modified.

    Returns
    -------
    w : ndarray, shape (..., n)
        Eigenvalues in ascending order.
    v : ndarray, shape (..., n, n)
        Orthonormal eigenvectors as columns.
    """
    arr = np.asarray(a)
    dtype = np.longdouble if arr.dtype == np.longdouble else np.float64
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise ValueError("expected a stack of square matrices")
    batch = arr.shape[:-2]
    n = arr.shape[-1]
    work = np.array(arr.reshape(-1, n, n), dtype=dtype, order="C", copy=True)
    m = work.shape[0]
    w = np.empty((m, n), dtype=dtype)
    v = np.empty((m, n, n), dtype=dtype)
    cdef long double eps_l = np.finfo(np.longdouble).eps
    cdef double eps_d = np.finfo(np.float64).eps
    cdef double[:, :, ::1] sd, vd
    cdef double[:, ::1] wd
    cdef long double[:, :, ::1] sl, vl
    cdef long double[:, ::1] wl
    if dtype is np.float64:
        sd = work
        vd = v
        wd = w
        with nogil:
            _jacobi_batch(sd, vd, wd, eps_d)
    else:
        sl = work
        vl = v
        wl = w
        with nogil:
            _jacobi_batch(sl, vl, wl, eps_l)
    return w.reshape(batch + (n,)), v.reshape(batch + (n, n))
