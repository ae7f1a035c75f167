"""Vectorized quaternion kernels (pure numpy reference path).

Quaternions are float64 arrays with a trailing axis of length 4 holding
(w, x, y, z), the coefficients of 1, i, j, k.  All kernels broadcast over
leading axes.
"""

import numpy as np


def qmul(p, q):
    """Hamilton product with the ij = k convention."""
    pw, px, py, pz = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    out = np.empty(np.broadcast_shapes(p.shape, q.shape), dtype=np.float64)
    out[..., 0] = pw * qw - px * qx - py * qy - pz * qz
    out[..., 1] = pw * qx + px * qw + py * qz - pz * qy
    out[..., 2] = pw * qy - px * qz + py * qw + pz * qx
    out[..., 3] = pw * qz + px * qy - py * qx + pz * qw
    return out


def qconj(q):
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def qnorm2(q):
    return np.einsum("...i,...i->...", q, q)


def qinv(q):
    """Inverse conj(q)/|q|^2; caller is responsible for the zero gate."""
    return qconj(q) / qnorm2(q)[..., None]


def mat2_mul(a, b):
    """Product of 2x2 quaternionic matrices, shape (..., 2, 2, 4)."""
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.float64)
    for i in range(2):
        for j in range(2):
            out[..., i, j, :] = qmul(a[..., i, 0, :], b[..., 0, j, :]) + qmul(
                a[..., i, 1, :], b[..., 1, j, :]
            )
    return out


def mat2_vec(a, v):
    """Matrix action on column vectors in H^2: entries multiply from the left."""
    shape = np.broadcast_shapes(a[..., 0, :].shape, v.shape)
    out = np.empty(shape, dtype=np.float64)
    out[..., 0, :] = qmul(a[..., 0, 0, :], v[..., 0, :]) + qmul(a[..., 0, 1, :], v[..., 1, :])
    out[..., 1, :] = qmul(a[..., 1, 0, :], v[..., 0, :]) + qmul(a[..., 1, 1, :], v[..., 1, :])
    return out


def cov_mat2(nu, a):
    """Right action of a matrix on covectors: (nu M)_b = sum_a nu_a M_ab."""
    shape = np.broadcast_shapes(a[..., 0, :].shape, nu.shape)
    out = np.empty(shape, dtype=np.float64)
    out[..., 0, :] = qmul(nu[..., 0, :], a[..., 0, 0, :]) + qmul(nu[..., 1, :], a[..., 1, 0, :])
    out[..., 1, :] = qmul(nu[..., 0, :], a[..., 0, 1, :]) + qmul(nu[..., 1, :], a[..., 1, 1, :])
    return out


def _to_complex_pair(q):
    """q = z1 + j z2 with z1 = w + xi, z2 = y - zi."""
    z1 = q[..., 0] + 1j * q[..., 1]
    z2 = q[..., 2] - 1j * q[..., 3]
    return z1, z2


def _from_complex_pair(z1, z2):
    out = np.empty(z1.shape + (4,), dtype=np.float64)
    out[..., 0] = z1.real
    out[..., 1] = z1.imag
    out[..., 2] = z2.real
    out[..., 3] = -z2.imag
    return out


def mat2_to_complex(a):
    """Embed a (..., 2, 2, 4) quaternionic matrix as a (..., 4, 4) complex one.

    Left multiplication by q = z1 + j z2 is the complex 2x2 block
    [[z1, -conj(z2)], [z2, conj(z1)]]; the embedding is an algebra
    homomorphism, so products and inverses commute with it.
    """
    z1, z2 = _to_complex_pair(a)
    out = np.empty(a.shape[:-3] + (4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            out[..., 2 * i, 2 * j] = z1[..., i, j]
            out[..., 2 * i, 2 * j + 1] = -np.conj(z2[..., i, j])
            out[..., 2 * i + 1, 2 * j] = z2[..., i, j]
            out[..., 2 * i + 1, 2 * j + 1] = np.conj(z1[..., i, j])
    return out


def mat2_from_complex(c):
    z1 = c[..., 0::2, 0::2]
    z2 = c[..., 1::2, 0::2]
    return _from_complex_pair(z1, z2)


def mat2_inv(a):
    """Batched inverse of 2x2 quaternionic matrices via the complex embedding."""
    return mat2_from_complex(np.linalg.inv(mat2_to_complex(a)))


def mat2_study_det(a):
    """Study determinant |det of the complex embedding|^(1/2); zero iff singular."""
    d = np.linalg.det(mat2_to_complex(a))
    return np.sqrt(np.abs(d))
