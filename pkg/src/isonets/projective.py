"""The quaternionic projective line HP^1 as the conformal 4-sphere.

Homogeneous coordinates live in H^2, a right module over the quaternions:
vector grids have shape (..., 2, 4) with slot 0 the upper and slot 1 the
lower component.  Covectors form the dual left module with the pairing
nu(v) = nu_0 * v_0 + nu_1 * v_1 (covector components multiply from the
left).  GL(2, H) acts on vectors from the left and by Mobius
transformations on points; hermitian forms cut out 3-spheres and give the
R^6_1 lift used for co-sphericity tests.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import (
    CoincidentPoints,
    DegeneratePoint,
    PointAtInfinity,
    SingularMatrix,
)
from .quaternions import as_quat, qconj, qinv, qmul, qnorm, qnorm2

IDENTITY2 = np.zeros((2, 2, 4))
IDENTITY2[0, 0, 0] = 1.0
IDENTITY2[1, 1, 0] = 1.0

BIG_AFFINE = 1e6


def pair(nu, v):
    """Dual pairing nu(v), batched."""
    return qmul(nu[..., 0, :], v[..., 0, :]) + qmul(nu[..., 1, :], v[..., 1, :])


def vec_scale(v, lam):
    """Right-module scaling v * lam."""
    lam = as_quat(lam)
    out = np.empty(np.broadcast_shapes(v.shape, lam.shape[:-1] + (2, 4)))
    out[..., 0, :] = qmul(v[..., 0, :], lam)
    out[..., 1, :] = qmul(v[..., 1, :], lam)
    return out


def cov_scale(lam, nu):
    """Left-module scaling lam * nu."""
    lam = as_quat(lam)
    out = np.empty(np.broadcast_shapes(nu.shape, lam.shape[:-1] + (2, 4)))
    out[..., 0, :] = qmul(lam, nu[..., 0, :])
    out[..., 1, :] = qmul(lam, nu[..., 1, :])
    return out


def outer(v, nu):
    """Rank-one matrix v x nu, the building block of the connection forms."""
    shape = np.broadcast_shapes(v.shape, nu.shape)
    out = np.empty(shape[:-2] + (2, 2, 4))
    for a in range(2):
        for b in range(2):
            out[..., a, b, :] = qmul(v[..., a, :], nu[..., b, :])
    return out


def point_normalize(v, gate=1e-300):
    """Scale representatives so the larger component has norm 1."""
    s = np.maximum(qnorm(v[..., 0, :]), qnorm(v[..., 1, :]))
    if np.any(s <= gate):
        raise DegeneratePoint("zero homogeneous coordinates")
    return v / s[..., None, None]


def annihilator(v, gate=1e-300):
    """The covector line annihilating a point, normalized; batched.

    Pivots on the larger component: (1, -u l^-1) or (-l u^-1, 1).
    """
    u = v[..., 0, :]
    l = v[..., 1, :]
    n2u = qnorm2(u)
    n2l = qnorm2(l)
    if np.any(np.maximum(n2u, n2l) <= gate):
        raise DegeneratePoint("cannot annihilate zero coordinates")
    lower_pivot = n2l >= n2u
    piv = np.where(lower_pivot[..., None], l, u)
    other = np.where(lower_pivot[..., None], u, l)
    w = -qmul(other, kernels.qinv(piv))
    one = np.zeros_like(w)
    one[..., 0] = 1.0
    nu = np.empty_like(v)
    nu[..., 0, :] = np.where(lower_pivot[..., None], one, w)
    nu[..., 1, :] = np.where(lower_pivot[..., None], w, one)
    s = np.maximum(qnorm(nu[..., 0, :]), qnorm(nu[..., 1, :]))
    return nu / s[..., None, None]


def projective_distance(p, q):
    """Scale-free separation of two points; zero iff projectively equal."""
    p = point_normalize(np.asarray(p, dtype=np.float64))
    q = point_normalize(np.asarray(q, dtype=np.float64))

    def one_sided(a, b):
        nu = annihilator(a)
        num = qnorm(pair(nu, b))
        den = np.sqrt(qnorm2(nu[..., 0, :]) + qnorm2(nu[..., 1, :])) * np.sqrt(
            qnorm2(b[..., 0, :]) + qnorm2(b[..., 1, :])
        )
        return num / den

    return np.maximum(one_sided(p, q), one_sided(q, p))


@dataclass(frozen=True)
class AffineChart:
    """Pseudo-dual basis pair fixing a stereographic projection.

    v0 and vinf are the points sent to 0 and infinity; nu0, nuinf satisfy
    v0 nuinf + vinf nu0 = id, which pins them given (v0, vinf).
    """

    v0: np.ndarray
    vinf: np.ndarray
    nu0: np.ndarray
    nuinf: np.ndarray

    @classmethod
    def standard(cls):
        v0 = np.zeros((2, 4))
        v0[1, 0] = 1.0
        vinf = np.zeros((2, 4))
        vinf[0, 0] = 1.0
        nu0 = np.zeros((2, 4))
        nu0[0, 0] = 1.0
        nuinf = np.zeros((2, 4))
        nuinf[1, 0] = 1.0
        return cls(v0, vinf, nu0, nuinf)

    @classmethod
    def from_points(cls, v0, vinf):
        """Build the pseudo-dual covectors by inverting the basis matrix."""
        m = np.zeros((2, 2, 4))
        m[:, 0, :] = np.asarray(v0, dtype=np.float64)
        m[:, 1, :] = np.asarray(vinf, dtype=np.float64)
        if kernels.mat2_study_det(m) < 1e-12:
            raise SingularMatrix("chart points coincide")
        inv = kernels.mat2_inv(m)
        nuinf = inv[0]  # pairs to 1 with v0
        nu0 = inv[1]  # pairs to 1 with vinf
        return cls(np.asarray(v0, float), np.asarray(vinf, float), nu0, nuinf)

    def duality_residual(self):
        m = outer(self.v0, self.nuinf) + outer(self.vinf, self.nu0)
        return float(np.max(np.abs(m - IDENTITY2)))

    def lift(self, p):
        """Homogeneous coordinates v0 + vinf * p of an affine value."""
        p = as_quat(p)
        out = np.empty(p.shape[:-1] + (2, 4))
        out[..., 0, :] = self.v0[0] + qmul(self.vinf[0], p)
        out[..., 1, :] = self.v0[1] + qmul(self.vinf[1], p)
        return out

    def covector(self, p):
        """nu0 - p nuinf, the annihilator normalized against vinf."""
        p = as_quat(p)
        out = np.empty(p.shape[:-1] + (2, 4))
        out[..., 0, :] = self.nu0[0] - qmul(p, self.nuinf[0])
        out[..., 1, :] = self.nu0[1] - qmul(p, self.nuinf[1])
        return out

    def project(self, v, tol=1e-12):
        """Stereographic projection (nu0 v)(nuinf v)^-1."""
        v = np.asarray(v, dtype=np.float64)
        num = pair(np.broadcast_to(self.nu0, v.shape), v)
        den = pair(np.broadcast_to(self.nuinf, v.shape), v)
        scale = np.sqrt(qnorm2(v[..., 0, :]) + qnorm2(v[..., 1, :]))
        if np.any(qnorm(den) <= tol * scale):
            raise PointAtInfinity("point at the chart's infinity")
        return qmul(num, kernels.qinv(den))


STANDARD_CHART = AffineChart.standard()


def normalize_cross_ratio(q):
    """Normal form Re q + i |Im q| as a python/numpy complex."""
    q = as_quat(q)
    return q[..., 0] + 1j * np.linalg.norm(q[..., 1:], axis=-1)


def cross_ratio_points(v1, v2, v3, v4, tol=1e-13):
    """Cross ratio of four points from homogeneous coordinates.

    Representative-free up to quaternion conjugation, which the normal
    form quotients out; use normalize_cross_ratio on the result.
    """
    v1, v2, v3, v4 = (point_normalize(np.asarray(v) + 0.0) for v in (v1, v2, v3, v4))
    nu1 = annihilator(v1)
    nu3 = annihilator(v3)
    a = pair(nu1, v2)
    b = pair(nu3, v2)
    c = pair(nu3, v4)
    d = pair(nu1, v4)
    if np.any(qnorm(b) <= tol) or np.any(qnorm(d) <= tol):
        raise CoincidentPoints("cross ratio needs p2 != p3 and p4 != p1")
    return qmul(qmul(a, kernels.qinv(b)), qmul(c, kernels.qinv(d)))


def cross_ratio_affine(p1, p2, p3, p4, tol=1e-13):
    """Affine cross ratio (p1-p2)(p2-p3)^-1 (p3-p4)(p4-p1)^-1.

    Values beyond BIG_AFFINE are routed through the projective formula to
    avoid precision loss near infinity.
    """
    p1, p2, p3, p4 = (as_quat(p) for p in (p1, p2, p3, p4))
    mags = np.stack([qnorm(p) for p in (p1, p2, p3, p4)])
    if np.any(mags > BIG_AFFINE):
        lifts = [STANDARD_CHART.lift(p) for p in (p1, p2, p3, p4)]
        return cross_ratio_points(*lifts, tol=tol)
    d12 = p1 - p2
    d23 = p2 - p3
    d34 = p3 - p4
    d41 = p4 - p1
    scale = float(np.max(mags)) + 1.0
    if np.any(qnorm(d23) <= tol * scale) or np.any(qnorm(d41) <= tol * scale):
        raise CoincidentPoints("coincident consecutive points in cross ratio")
    return qmul(qmul(d12, kernels.qinv(d23)), qmul(d34, kernels.qinv(d41)))


def cross_ratio(p1, p2, p3, p4):
    """Normalized cross ratio of four points given as homogeneous (…,2,4)."""
    return normalize_cross_ratio(cross_ratio_points(p1, p2, p3, p4))


def mobius_apply(m, v, tol=1e-12):
    """Action v H -> (M v) H of an invertible matrix on points."""
    m = np.asarray(m, dtype=np.float64)
    if np.any(kernels.mat2_study_det(m) < tol):
        raise SingularMatrix("Mobius matrix is singular")
    return point_normalize(kernels.mat2_vec(m, v))


@dataclass(frozen=True)
class HermitianForm:
    """Quaternionic hermitian 2x2 form; s21 = conj(s12) is implicit."""

    s11: float
    s22: float
    s12: np.ndarray

    @classmethod
    def make(cls, s11, s22, s12):
        return cls(float(s11), float(s22), as_quat(s12).astype(float))

    @classmethod
    def unit_sphere(cls):
        """Null cone |p| = 1: the unit 3-sphere of H in any chart."""
        return cls.make(1.0, -1.0, 0.0)

    @classmethod
    def imaginary_sphere(cls):
        """Null cone p + conj(p) = 0: the 3-sphere Im H + infinity."""
        return cls.make(0.0, 0.0, np.array([1.0, 0.0, 0.0, 0.0]))

    def det(self):
        return self.s11 * self.s22 - float(qnorm2(self.s12))

    def eval(self, v, w):
        """s(v, w); conjugate linear in v, linear in w."""
        v = np.asarray(v, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        cu = qconj(v[..., 0, :])
        cl = qconj(v[..., 1, :])
        out = self.s11 * qmul(cu, w[..., 0, :]) + self.s22 * qmul(cl, w[..., 1, :])
        out = out + qmul(cu, qmul(self.s12, w[..., 1, :]))
        out = out + qmul(cl, qmul(qconj(self.s12), w[..., 0, :]))
        return out

    def value(self, v):
        """Real diagonal value s(v, v)."""
        return self.eval(v, v)[..., 0]

    def six_vector(self):
        return np.concatenate(([self.s11, self.s22], self.s12))

    def normalized_six_vector(self):
        s = self.six_vector()
        return s / np.linalg.norm(s)


def hermitian_eval(s, v, w):
    return s.eval(v, w)


def sphere_transform(m, s, tol=1e-12):
    """Push a form along M: (M . s)(v, w) = s(M^-1 v, M^-1 w)."""
    m = np.asarray(m, dtype=np.float64)
    if kernels.mat2_study_det(m) < tol:
        raise SingularMatrix("cannot transform a sphere by a singular matrix")
    k = kernels.mat2_inv(m)
    e1 = np.zeros((2, 4))
    e1[0, 0] = 1.0
    e2 = np.zeros((2, 4))
    e2[1, 0] = 1.0
    k1 = kernels.mat2_vec(k, e1)
    k2 = kernels.mat2_vec(k, e2)
    s11 = s.eval(k1, k1)
    s22 = s.eval(k2, k2)
    s12 = s.eval(k1, k2)
    return HermitianForm.make(float(s11[0]), float(s22[0]), s12)


def minkowski_lift(v):
    """Null vector in R^6_1 representing a point, unit Euclidean norm.

    Built as conj(nu)^T nu from the normalized annihilator, so it is
    representative-free; Minkowski square is -det = 0.
    """
    nu = annihilator(np.asarray(v, dtype=np.float64))
    s11 = qnorm2(nu[..., 0, :])
    s22 = qnorm2(nu[..., 1, :])
    s12 = qmul(qconj(nu[..., 0, :]), nu[..., 1, :])
    out = np.concatenate([s11[..., None], s22[..., None], s12], axis=-1)
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


def sphere_span_residual(points, dim):
    """How far a point cloud is from lying on a (dim-1)-sphere in S^4.

    A 2-sphere corresponds to lifts spanning <= 4 dimensions, a 3-sphere
    to <= 5; the residual is the first excluded singular value relative
    to the largest.
    """
    lifts = minkowski_lift(points).reshape(-1, 6)
    sv = np.linalg.svd(lifts, compute_uv=False)
    rank_cap = dim + 2
    if len(sv) <= rank_cap:
        return 0.0
    return float(sv[rank_cap] / sv[0])


def cospherical_residual(points):
    """Residual of the 8-points-on-a-2-sphere test (hexahedron situations)."""
    return sphere_span_residual(points, dim=2)


def _left_matrix(q):
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, -z, y],
            [y, z, w, -x],
            [z, -y, x, w],
        ]
    )


def _right_matrix(q):
    w, x, y, z = q
    return np.array(
        [
            [w, -x, -y, -z],
            [x, w, z, -y],
            [y, -z, w, x],
            [z, y, -x, w],
        ]
    )


def _frame_matrix(p1, p2, p3):
    """Matrix sending e1, e2, e1 + e2 to the three given points."""
    m = np.zeros((2, 2, 4))
    m[:, 0, :] = p1
    m[:, 1, :] = p2
    if kernels.mat2_study_det(m) < 1e-12:
        raise SingularMatrix("anchor points are not in general position")
    coeff = kernels.mat2_vec(kernels.mat2_inv(m), p3)
    out = np.zeros((2, 2, 4))
    out[:, 0, :] = vec_scale(p1, coeff[0])
    out[:, 1, :] = vec_scale(p2, coeff[1])
    return out


def fit_mobius_gauge(sources, targets):
    """Mobius matrix sending anchor points to target points (at least five).

    Three pairs fix the map up to conjugation x -> a x a^-1 (a 3-parameter
    stabilizer in PGl(2, H), unlike the complex case); every further pair
    contributes the linear condition a p = q a and the conjugator is the
    least-squares null vector of the stacked system.  Used to compare nets
    that agree up to a single global Mobius transformation.
    """
    if len(sources) < 4:
        raise ValueError("need at least four anchor pairs")
    sources = [point_normalize(np.asarray(p, dtype=np.float64)) for p in sources]
    targets = [point_normalize(np.asarray(p, dtype=np.float64)) for p in targets]
    a_src = _frame_matrix(*sources[:3])
    a_tgt = _frame_matrix(*targets[:3])
    inv_src = kernels.mat2_inv(a_src)
    inv_tgt = kernels.mat2_inv(a_tgt)
    rows = []
    for src, tgt in zip(sources[3:], targets[3:]):
        p = kernels.mat2_vec(inv_src, src)
        q = kernels.mat2_vec(inv_tgt, tgt)
        pa = qmul(p[0], kernels.qinv(p[1]))
        qa = qmul(q[0], kernels.qinv(q[1]))
        # a p = q a: right multiplication by p minus left multiplication by q
        rows.append(_right_matrix(pa) - _left_matrix(qa))
    _, _, vt = np.linalg.svd(np.concatenate(rows, axis=0))
    a = vt[-1]
    conj = np.zeros((2, 2, 4))
    conj[0, 0] = a
    conj[1, 1] = a
    return kernels.mat2_mul(a_tgt, kernels.mat2_mul(conj, inv_src))
