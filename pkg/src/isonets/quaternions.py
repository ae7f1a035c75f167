"""Quaternion algebra over numpy arrays, plus the complex subalgebra and
the imaginary-part model of R^3.

Layout convention used across the package: a quaternion is a float64 array
with trailing axis (w, x, y, z) for w + xi + yj + zk; grids of quaternions
are arrays of shape (M, N, 4).  The complex numbers embed as span{1, i},
and right multiplication by j carries them onto span{j, k}.
"""

import numpy as np

from . import kernels
from .exceptions import QuaternionZeroDivision

ZERO_GATE = 1e-13

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def as_quat(q):
    """Coerce scalars / sequences / complex numbers to (..., 4) float64."""
    if isinstance(q, Quaternion):
        return q.array
    if isinstance(q, complex):
        return np.array([q.real, q.imag, 0.0, 0.0])
    if np.isscalar(q):
        return np.array([float(q), 0.0, 0.0, 0.0])
    a = np.asarray(q, dtype=np.float64)
    if a.shape[-1] != 4:
        raise ValueError(f"expected trailing axis 4, got shape {a.shape}")
    return a


def qmul(p, q):
    return kernels.qmul(as_quat(p), as_quat(q))


def qconj(q):
    return kernels.qconj(as_quat(q))


def qnorm2(q):
    return kernels.qnorm2(as_quat(q))


def qnorm(q):
    return np.sqrt(qnorm2(q))


def qinv(q, gate=ZERO_GATE):
    """Quaternion inverse with a relative zero gate.

    The gate scales with the largest operand in the batch so that uniformly
    tiny-but-honest values still invert.
    """
    q = as_quat(q)
    n = qnorm(q)
    scale = float(np.max(n)) if n.size else 0.0
    if np.any(n <= gate * max(scale, 1.0)):
        raise QuaternionZeroDivision("quaternion inverse of (near-)zero value")
    return kernels.qinv(q)


def qreal(q):
    return as_quat(q)[..., 0]


def qimag(q):
    """Imaginary part as a 3-vector array (x, y, z)."""
    return as_quat(q)[..., 1:]


def imag_norm(q):
    return np.linalg.norm(qimag(q), axis=-1)


def from_imag(v):
    """Embed R^3 vectors (x, y, z) as imaginary quaternions."""
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros(v.shape[:-1] + (4,), dtype=np.float64)
    out[..., 1:] = v
    return out


def from_complex(c):
    """Ring embedding c -> c*1 onto span{1, i}."""
    c = np.asarray(c, dtype=np.complex128)
    out = np.zeros(c.shape + (4,), dtype=np.float64)
    out[..., 0] = c.real
    out[..., 1] = c.imag
    return out


def to_complex(q, tol=1e-12):
    """Inverse of from_complex; raises if the j/k components are not tiny."""
    q = as_quat(q)
    scale = max(float(np.max(qnorm(q))), 1.0)
    if np.max(np.abs(q[..., 2:])) > tol * scale:
        raise ValueError("quaternion has non-complex part")
    return q[..., 0] + 1j * q[..., 1]


def complex_to_cj(c):
    """Map c = a + bi to cj = aj + bk, the C j copy inside Im H."""
    c = np.asarray(c, dtype=np.complex128)
    out = np.zeros(c.shape + (4,), dtype=np.float64)
    out[..., 2] = c.real
    out[..., 3] = c.imag
    return out


def cj_to_complex(q, tol=1e-12):
    """Inverse of complex_to_cj; raises if the 1/i components are not tiny."""
    q = as_quat(q)
    scale = max(float(np.max(qnorm(q))), 1.0)
    if np.max(np.abs(q[..., :2])) > tol * scale:
        raise ValueError("quaternion is not in the C j plane")
    return q[..., 2] + 1j * q[..., 3]


class Quaternion:
    """Scalar convenience wrapper around a (4,) array.

    Grid-level code works on raw arrays; this class is for seeds, initial
    points and CLI parsing, where operator syntax reads better.
    """

    __slots__ = ("array",)

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.array = np.array([w, x, y, z], dtype=np.float64)

    @classmethod
    def from_array(cls, a):
        q = cls()
        q.array = as_quat(a).astype(np.float64).reshape(4)
        return q

    @property
    def w(self):
        return float(self.array[0])

    @property
    def x(self):
        return float(self.array[1])

    @property
    def y(self):
        return float(self.array[2])

    @property
    def z(self):
        return float(self.array[3])

    def __mul__(self, other):
        return Quaternion.from_array(qmul(self.array, as_quat(other)))

    def __rmul__(self, other):
        return Quaternion.from_array(qmul(as_quat(other), self.array))

    def __add__(self, other):
        return Quaternion.from_array(self.array + as_quat(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Quaternion.from_array(self.array - as_quat(other))

    def __rsub__(self, other):
        return Quaternion.from_array(as_quat(other) - self.array)

    def __neg__(self):
        return Quaternion.from_array(-self.array)

    def conjugate(self):
        return Quaternion.from_array(qconj(self.array))

    def inverse(self):
        return Quaternion.from_array(qinv(self.array))

    def norm(self):
        return float(qnorm(self.array))

    def __abs__(self):
        return self.norm()

    def __eq__(self, other):
        return np.array_equal(self.array, as_quat(other))

    def __repr__(self):
        w, x, y, z = self.array
        return f"Quaternion({w!r}, {x!r}, {y!r}, {z!r})"


def quat_mul(p, q):
    """Hamilton product as a module-level operation (array in, array out)."""
    return qmul(p, q)


def quat_inv(q):
    return qinv(q)
