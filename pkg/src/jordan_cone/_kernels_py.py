"""Pure-Python fallback for the compiled kernels.

Double precision goes through LAPACK; extended precision, which LAPACK does
not offer, runs the same cyclic Jacobi sweep as the compiled kernel,
vectorized over the batch axis.
"""

import numpy as np

MAX_SWEEPS = 64


def _jacobi_vectorized(a):
    s = np.array(a, copy=True)
    n = s.shape[-1]
    eps = np.finfo(s.dtype).eps
    v = np.broadcast_to(np.eye(n, dtype=s.dtype), s.shape).copy()
    for _ in range(MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = s[:, p, q]
                app = s[:, p, p]
                aqq = s[:, q, q]
                act = (apq != 0) & (np.abs(apq) > eps * np.sqrt(np.abs(app * aqq)))
                if not act.any():
                    s[:, p, q] = 0
                    s[:, q, p] = 0
                    continue
                rotated = True
                safe = np.where(act, apq, 1)
                tau = (aqq - app) / (2 * safe)
                with np.errstate(divide="ignore", over="ignore"):
                    t = np.where(tau >= 0, 1 / (tau + np.sqrt(1 + tau * tau)),
                                 -1 / (-tau + np.sqrt(1 + tau * tau)))
                t = np.where(act, t, 0)
                c = 1 / np.sqrt(1 + t * t)
                sn = t * c
                c_, s_ = c[:, None], sn[:, None]
                skp, skq = s[:, :, p].copy(), s[:, :, q].copy()
                s[:, :, p] = c_ * skp - s_ * skq
                s[:, :, q] = s_ * skp + c_ * skq
                spk, sqk = s[:, p, :].copy(), s[:, q, :].copy()
                s[:, p, :] = c_ * spk - s_ * sqk
                s[:, q, :] = s_ * spk + c_ * sqk
                s[:, p, q] = 0
                s[:, q, p] = 0
                vkp, vkq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = c_ * vkp - s_ * vkq
                v[:, :, q] = s_ * vkp + c_ * vkq
        if not rotated:
            break
    w = np.diagonal(s, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w, v


def sym_eigh(a):
    """Eigendecomposition of a stack of symmetric matrices.

    Same contract as the compiled kernel: ascending eigenvalues and
    orthonormal eigenvector columns.
    """
    arr = np.asarray(a)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2]:
        raise ValueError("expected a stack of square matrices")
    if arr.dtype != np.longdouble:
        return np.linalg.eigh(arr.astype(np.float64, copy=False))
    batch, n = arr.shape[:-2], arr.shape[-1]
    w, v = _jacobi_vectorized(arr.reshape(-1, n, n))
    return w.reshape(batch + (n,)), v.reshape(batch + (n, n))
