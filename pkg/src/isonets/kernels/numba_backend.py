"""numba-jitted quaternion kernels.

Same contracts as numpy_backend; inputs are broadcast and flattened by the
dispatch layer in kernels.__init__ before the jitted loops run.  The 2x2
inverse uses Schur complements with row pivoting instead of the complex
embedding (no batched linalg inside nopython code).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _qmul_flat(p, q, out):
    for k in range(p.shape[0]):
        pw, px, py, pz = p[k, 0], p[k, 1], p[k, 2], p[k, 3]
        qw, qx, qy, qz = q[k, 0], q[k, 1], q[k, 2], q[k, 3]
        out[k, 0] = pw * qw - px * qx - py * qy - pz * qz
        out[k, 1] = pw * qx + px * qw + py * qz - pz * qy
        out[k, 2] = pw * qy - px * qz + py * qw + pz * qx
        out[k, 3] = pw * qz + px * qy - py * qx + pz * qw


@njit(cache=True)
def _qinv_flat(q, out):
    for k in range(q.shape[0]):
        n2 = q[k, 0] ** 2 + q[k, 1] ** 2 + q[k, 2] ** 2 + q[k, 3] ** 2
        out[k, 0] = q[k, 0] / n2
        out[k, 1] = -q[k, 1] / n2
        out[k, 2] = -q[k, 2] / n2
        out[k, 3] = -q[k, 3] / n2


@njit(cache=True)
def _mul1(p, q):
    out = np.empty(4, dtype=np.float64)
    out[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
    out[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2]
    out[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1]
    out[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]
    return out


@njit(cache=True)
def _inv1(q):
    n2 = q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2
    out = np.empty(4, dtype=np.float64)
    out[0] = q[0] / n2
    out[1] = -q[1] / n2
    out[2] = -q[2] / n2
    out[3] = -q[3] / n2
    return out


@njit(cache=True)
def _mat2_mul_flat(a, b, out):
    for k in range(a.shape[0]):
        for i in range(2):
            for j in range(2):
                out[k, i, j] = _mul1(a[k, i, 0], b[k, 0, j]) + _mul1(a[k, i, 1], b[k, 1, j])


@njit(cache=True)
def _mat2_vec_flat(a, v, out):
    for k in range(a.shape[0]):
        for i in range(2):
            out[k, i] = _mul1(a[k, i, 0], v[k, 0]) + _mul1(a[k, i, 1], v[k, 1])


@njit(cache=True)
def _cov_mat2_flat(nu, a, out):
    for k in range(a.shape[0]):
        for j in range(2):
            out[k, j] = _mul1(nu[k, 0], a[k, 0, j]) + _mul1(nu[k, 1], a[k, 1, j])


@njit(cache=True)
def _mat2_inv_flat(a, out):
    for k in range(a.shape[0]):
        a11 = a[k, 0, 0]
        a12 = a[k, 0, 1]
        a21 = a[k, 1, 0]
        a22 = a[k, 1, 1]
        n11 = a11[0] ** 2 + a11[1] ** 2 + a11[2] ** 2 + a11[3] ** 2
        n21 = a21[0] ** 2 + a21[1] ** 2 + a21[2] ** 2 + a21[3] ** 2
        swap = n21 > n11
        if swap:
            a11, a21 = a21, a11
            a12, a22 = a22, a12
        i11 = _inv1(a11)
        # Schur complement of the pivot block
        e = a22 - _mul1(a21, _mul1(i11, a12))
        ie = _inv1(e)
        b11 = i11 + _mul1(_mul1(i11, a12), _mul1(ie, _mul1(a21, i11)))
        b12 = -_mul1(_mul1(i11, a12), ie)
        b21 = -_mul1(ie, _mul1(a21, i11))
        b22 = ie
        if swap:
            # rows of the input were swapped, so swap columns of the inverse
            b11, b12 = b12, b11
            b21, b22 = b22, b21
        out[k, 0, 0] = b11
        out[k, 0, 1] = b12
        out[k, 1, 0] = b21
        out[k, 1, 1] = b22


def qmul(p, q):
    p, q = np.broadcast_arrays(p.astype(np.float64), q.astype(np.float64))
    out = np.empty(p.shape, dtype=np.float64)
    _qmul_flat(
        np.ascontiguousarray(p).reshape(-1, 4),
        np.ascontiguousarray(q).reshape(-1, 4),
        out.reshape(-1, 4),
    )
    return out


def qconj(q):
    out = np.array(q, dtype=np.float64, copy=True)
    out[..., 1:] *= -1.0
    return out


def qnorm2(q):
    return np.einsum("...i,...i->...", q, q)


def qinv(q):
    q = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty(q.shape, dtype=np.float64)
    _qinv_flat(q.reshape(-1, 4), out.reshape(-1, 4))
    return out


def mat2_mul(a, b):
    a, b = np.broadcast_arrays(a.astype(np.float64), b.astype(np.float64))
    out = np.empty(a.shape, dtype=np.float64)
    _mat2_mul_flat(
        np.ascontiguousarray(a).reshape(-1, 2, 2, 4),
        np.ascontiguousarray(b).reshape(-1, 2, 2, 4),
        out.reshape(-1, 2, 2, 4),
    )
    return out


def mat2_vec(a, v):
    shape = np.broadcast_shapes(a[..., 0, :].shape, v.shape)
    a = np.broadcast_to(a, shape[:-2] + (2, 2, 4))
    v = np.broadcast_to(v, shape)
    out = np.empty(shape, dtype=np.float64)
    _mat2_vec_flat(
        np.ascontiguousarray(a).reshape(-1, 2, 2, 4),
        np.ascontiguousarray(v).reshape(-1, 2, 4),
        out.reshape(-1, 2, 4),
    )
    return out


def cov_mat2(nu, a):
    shape = np.broadcast_shapes(a[..., 0, :].shape, nu.shape)
    a = np.broadcast_to(a, shape[:-2] + (2, 2, 4))
    nu = np.broadcast_to(nu, shape)
    out = np.empty(shape, dtype=np.float64)
    _cov_mat2_flat(
        np.ascontiguousarray(nu).reshape(-1, 2, 4),
        np.ascontiguousarray(a).reshape(-1, 2, 2, 4),
        out.reshape(-1, 2, 4),
    )
    return out


def mat2_inv(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    out = np.empty(a.shape, dtype=np.float64)
    _mat2_inv_flat(a.reshape(-1, 2, 2, 4), out.reshape(-1, 2, 2, 4))
    return out


from .numpy_backend import mat2_study_det, mat2_to_complex, mat2_from_complex  # noqa: E402,F401
