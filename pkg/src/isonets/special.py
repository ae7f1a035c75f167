"""Discrete minimal nets and horospherical (cmc-1 analog) nets.

The hyperbolic space sits inside the conformal 3-sphere Im H + infinity
with boundary sphere C j + infinity; the interior component is the one
containing i.  Minimal nets are Christoffel transforms of S^2-valued
isothermic nets; horospherical nets are Darboux transforms of nets in the
boundary sphere, and both arise from a pair of complex ("discrete
holomorphic") nets g, h through a complex 2x2 frame system whose step
matrices are

    id + lam * [[g dh, -g dh g_next], [dh, -dh g_next]]

in both lattice directions.  Sign conventions: the frame inverse used
for the Darboux-type representation is taken at +lam so that the Darboux
relation to the boundary net holds at the construction parameter, and the
base point argument is the actual initial surface value, which must lie
off the boundary sphere.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import (
    BadBasePoint,
    BoundaryHit,
    ClosureFailure,
    NotChristoffelPair,
    SingularLambda,
    ZeroDenominator,
)
from .nets import (
    AffineNet,
    CrossRatioFactorization,
    GridWindow,
    ProjectiveNet,
    classify,
)
from .projective import STANDARD_CHART, point_normalize, projective_distance
from .quaternions import (
    I,
    J,
    ONE,
    as_quat,
    complex_to_cj,
    from_complex,
    qinv,
    qmul,
    qnorm,
)
from .transforms import (
    ChristoffelPair,
    DarbouxNet,
    _sweep_additive,
    christoffel,
    darboux_residuals,
    pair_from_nets,
)

# J = vinf nu0 + v0 j nuinf = [[1,0],[0,j]]; its inverse realizes w -> w j
J_MAT = np.zeros((2, 2, 4))
J_MAT[0, 0, 0] = 1.0
J_MAT[1, 1, 2] = 1.0
J_INV = np.zeros((2, 2, 4))
J_INV[0, 0, 0] = 1.0
J_INV[1, 1, 2] = -1.0

# Mobius matrix of the stereographic projection C j -> S^2, w j -> i(i+wj)(i-wj)^-1
SPHERE_PROJ = np.zeros((2, 2, 4))
SPHERE_PROJ[0, 0] = I
SPHERE_PROJ[0, 1] = -ONE
SPHERE_PROJ[1, 0] = -ONE
SPHERE_PROJ[1, 1] = I


@dataclass(frozen=True)
class HolomorphicNet:
    """Complex-valued isothermic net (a discrete holomorphic net)."""

    window: GridWindow
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.window.shape:
            raise ValueError("value grid does not match window")
        object.__setattr__(self, "values", v)

    def to_affine(self):
        return AffineNet(self.window, from_complex(self.values))

    def classify(self):
        return classify(self.to_affine())


def catenoid_pair(n: int, irg: int = 10, jrg: int = 10):
    """The exponential Christoffel pair g = exp(2 pi (m+in)/n), h = 1/g."""
    if n < 4:
        raise ValueError("need at least four points per period")
    window = GridWindow.centered(irg, jrg)
    mm, nn = np.meshgrid(window.m_values(), window.n_values(), indexing="ij")
    g = np.exp(2.0 * np.pi * (mm + 1j * nn) / n)
    return HolomorphicNet(window, g), HolomorphicNet(window, 1.0 / g)


def christoffel_identity_residual(g: HolomorphicNet, h: HolomorphicNet) -> float:
    """max |q - (d1 h d1 g)/(d2 h d2 g)| over all faces, in complex arithmetic."""
    gz, hz = g.values, h.values
    cr = ((gz[:-1, :-1] - gz[1:, :-1]) / (gz[1:, :-1] - gz[1:, 1:])
          * (gz[1:, 1:] - gz[:-1, 1:]) / (gz[:-1, 1:] - gz[:-1, :-1]))
    d1g = gz[1:, :] - gz[:-1, :]
    d2g = gz[:, 1:] - gz[:, :-1]
    d1h = hz[1:, :] - hz[:-1, :]
    d2h = hz[:, 1:] - hz[:, :-1]
    ab = (d1g[:, :-1] * d1h[:, :-1]) / (d2g[:-1, :] * d2h[:-1, :])
    return float(np.max(np.abs(cr - ab)))


def holomorphic_factorization(g: HolomorphicNet, h: HolomorphicNet,
                              tol=1e-9) -> CrossRatioFactorization:
    """The factorization carried by an explicit complex dual pair:
    a_m = (d1 h)(d1 g), b_n = (d2 h)(d2 g)."""
    d1 = (g.values[1:, :] - g.values[:-1, :]) * (h.values[1:, :] - h.values[:-1, :])
    d2 = (g.values[:, 1:] - g.values[:, :-1]) * (h.values[:, 1:] - h.values[:, :-1])
    if max(float(np.max(np.abs(d1.imag))), float(np.max(np.abs(d2.imag)))) > tol:
        raise NotChristoffelPair("edge products are not real")
    a = d1.real.mean(axis=1)
    b = d2.real.mean(axis=0)
    if (np.max(np.abs(d1.real - a[:, None])) > tol * np.max(np.abs(a))
            or np.max(np.abs(d2.real - b[None, :])) > tol * np.max(np.abs(b))):
        raise NotChristoffelPair("edge products do not factor through m resp. n")
    return CrossRatioFactorization(a, b, 0.0)


def gauss_sphere_map(g: HolomorphicNet) -> AffineNet:
    """Stereographic image i(i + gj)(i - gj)^-1 of g on the unit 2-sphere."""
    gj = complex_to_cj(g.values)
    values = qmul(qmul(I, I + gj), qinv(I - gj))
    return AffineNet(g.window, values)


def boundary_net(g: HolomorphicNet) -> AffineNet:
    """The net g j inside the boundary sphere C j + infinity."""
    return AffineNet(g.window, complex_to_cj(g.values))


def boundary_pair(g: HolomorphicNet, h: HolomorphicNet) -> ChristoffelPair:
    """The boundary net with its dual (g j)* = -j h; keeps the (a, b) of (g, h)."""
    minus_jh = qmul(-J, from_complex(h.values))
    return pair_from_nets(boundary_net(g), AffineNet(g.window, minus_jh))


@dataclass(frozen=True)
class MinimalNet:
    """Discrete minimal net: the Christoffel transform of its S^2 Gauss map."""

    window: GridWindow
    surface: np.ndarray  # imaginary quaternion grid (M, N, 4)
    gauss: AffineNet

    def gauss_pair(self) -> ChristoffelPair:
        """(gauss, surface) as a Christoffel pair."""
        return pair_from_nets(self.gauss, AffineNet(self.window, self.surface))

    def primary_pair(self) -> ChristoffelPair:
        """(surface, gauss) as a Christoffel pair; its T system produces the
        horospherical cousins."""
        return pair_from_nets(AffineNet(self.window, self.surface), self.gauss)

    def surface_net(self) -> AffineNet:
        return AffineNet(self.window, self.surface)


def weierstrass_minimal(g: HolomorphicNet, h: HolomorphicNet, tol=1e-9,
                        seed=0.0) -> MinimalNet:
    """Integrate the minimal net with edge form
    (d1 f) = 1/2 (i - gj) j (d1 h) (i - gj)_next and its n-direction twin."""
    if christoffel_identity_residual(g, h) > tol:
        raise NotChristoffelPair("g, h are not a Christoffel pair of complex nets")
    gj = complex_to_cj(g.values)
    d1h = from_complex(h.values[1:, :] - h.values[:-1, :])
    d2h = from_complex(h.values[:, 1:] - h.values[:, :-1])
    w1 = 0.5 * qmul(qmul(I - gj[:-1, :], J), qmul(d1h, I - gj[1:, :]))
    w2 = 0.5 * qmul(qmul(I - gj[:, :-1], J), qmul(d2h, I - gj[:, 1:]))
    closing = w1[:, :-1] + w2[1:, :] - w2[:-1, :] - w1[:, 1:]
    scale = np.maximum(qnorm(w1[:, :-1]) + qnorm(w2[1:, :]), 1e-300)
    residual = float(np.max(qnorm(closing) / scale))
    if residual > 1e-10:
        raise ClosureFailure(f"Weierstrass edge form does not close ({residual:.3e})")
    surface = _sweep_additive(g.window, w1, w2, as_quat(seed))
    purity = float(np.max(np.abs(surface[..., 0])))
    if purity > 1e-10 * (float(np.max(qnorm(surface))) + 1.0):
        raise ClosureFailure(f"integrated net is not purely imaginary ({purity:.3e})")
    return MinimalNet(g.window, surface, gauss_sphere_map(g))


def minimal_cousin(g: HolomorphicNet, h: HolomorphicNet | None = None,
                   seed=0.0) -> MinimalNet:
    """The minimal net [i(i + gj)(i - gj)^-1]*.

    With h given, the dual is scaled by a = (d1 h)(d1 g); otherwise the
    normalized factorization of g is used (same net up to scale).
    """
    gauss = gauss_sphere_map(g)
    if h is not None:
        fact = holomorphic_factorization(g, h)
        pair = christoffel(gauss, fact, seed=seed)
    else:
        pair = christoffel(gauss, seed=seed)
    return MinimalNet(g.window, pair.f_star.values, gauss)


# ---------------------------------------------------------------------------
# The complex frame system


@dataclass(frozen=True)
class ComplexFrame:
    """Solution of the complex 2x2 system with the step matrices above."""

    lam: float
    values: np.ndarray  # (M, N, 2, 2) complex
    residual: float
    window: GridWindow

    def determinants(self):
        return np.linalg.det(self.values)

    def to_quaternion_matrices(self):
        out = np.zeros(self.values.shape + (4,))
        out[..., 0] = self.values.real
        out[..., 1] = self.values.imag
        return out


def _h_steps(gz, hz, lam):
    d1h = hz[1:, :] - hz[:-1, :]
    d2h = hz[:, 1:] - hz[:, :-1]
    x = np.zeros(d1h.shape + (2, 2), dtype=np.complex128)
    x[..., 0, 0] = 1.0 + lam * gz[:-1, :] * d1h
    x[..., 0, 1] = -lam * gz[:-1, :] * d1h * gz[1:, :]
    x[..., 1, 0] = lam * d1h
    x[..., 1, 1] = 1.0 - lam * d1h * gz[1:, :]
    y = np.zeros(d2h.shape + (2, 2), dtype=np.complex128)
    y[..., 0, 0] = 1.0 + lam * gz[:, :-1] * d2h
    y[..., 0, 1] = -lam * gz[:, :-1] * d2h * gz[:, 1:]
    y[..., 1, 0] = lam * d2h
    y[..., 1, 1] = 1.0 - lam * d2h * gz[:, 1:]
    return x, y


def integrate_H(g: HolomorphicNet, h: HolomorphicNet, lam: float) -> ComplexFrame:
    """Center-out integration of the complex frame system; the face residual
    of the step matrices is recorded on the frame."""
    fact = holomorphic_factorization(g, h)
    if np.any(np.abs(1.0 - lam * fact.a) < 1e-9) or np.any(np.abs(1.0 - lam * fact.b) < 1e-9):
        raise SingularLambda("lam hits 1/a_m or 1/b_n")
    gz, hz = g.values, h.values
    x, y = _h_steps(gz, hz, lam)
    window = g.window
    rows, cols = window.shape
    i0, j0 = window.origin_index
    tau = np.zeros(window.shape + (2, 2), dtype=np.complex128)
    tau[i0, j0] = np.eye(2)
    for i in range(i0, rows - 1):
        tau[i + 1, j0] = tau[i, j0] @ x[i, j0]
    for i in range(i0, 0, -1):
        tau[i - 1, j0] = tau[i, j0] @ np.linalg.inv(x[i - 1, j0])
    for j in range(j0, cols - 1):
        tau[:, j + 1] = tau[:, j] @ y[:, j]
    for j in range(j0, 0, -1):
        tau[:, j - 1] = tau[:, j] @ np.linalg.inv(y[:, j - 1])
    lhs = x[:, :-1] @ y[1:, :]
    rhs = y[:-1, :] @ x[:, 1:]
    scale = np.maximum(np.abs(lhs).sum(axis=(-2, -1)), np.abs(rhs).sum(axis=(-2, -1)))
    residual = float(np.max(np.abs(lhs - rhs).sum(axis=(-2, -1)) / scale))
    return ComplexFrame(lam, tau, residual, window)


def gauss_map_mobius(frame: ComplexFrame, g: HolomorphicNet):
    """Mobius action of the frame on g: the hyperbolic Gauss map data."""
    t = frame.values
    return (t[..., 0, 0] * g.values + t[..., 0, 1]) / (t[..., 1, 0] * g.values + t[..., 1, 1])


# ---------------------------------------------------------------------------
# Horospherical nets


@dataclass(frozen=True)
class HorosphericalNet:
    """Discrete cmc-1 net in hyperbolic space, coupled to a boundary-sphere
    net by the Darboux relation at coupling_lam with gauss_factorization."""

    surface: ProjectiveNet
    gauss_hyperbolic: AffineNet
    lam: float
    gauss_factorization: CrossRatioFactorization
    coupling_lam: float
    frame: ComplexFrame

    def surface_affine(self):
        return self.surface.to_affine()

    def boundary_margin(self, tol_real=1e-9):
        """Distance of the surface values from the boundary C j + infinity:
        the i-component of the (purely imaginary) affine values."""
        vals = self.surface_affine().values
        purity = float(np.max(np.abs(vals[..., 0])))
        scale = float(np.max(qnorm(vals))) + 1.0
        if purity > tol_real * scale:
            raise BoundaryHit("surface left the 3-sphere Im H + infinity")
        return float(np.min(np.abs(vals[..., 1])))

    def require_interior(self, tol=1e-9):
        margin = self.boundary_margin()
        scale = float(np.max(qnorm(self.surface_affine().values))) + 1.0
        if margin <= tol * scale:
            raise BoundaryHit(f"surface touches the boundary sphere (margin {margin:.3e})")
        return margin

    def darboux_report(self):
        """Edge cross-ratio residuals of the Darboux relation between surface
        and hyperbolic Gauss map."""
        pair = christoffel(self.gauss_hyperbolic, self.gauss_factorization)
        hat = DarbouxNet(self.surface.values, self.surface.window, self.coupling_lam)
        return darboux_residuals(pair, hat)


def bryant_cousin(g: HolomorphicNet, h: HolomorphicNet, lam: float) -> HorosphericalNet:
    """The frame orbit of the interior point i: f = J^-1 tau^lam (vinf i + v0 j)/sqrt(2).

    Its hyperbolic Gauss map is the Mobius image of g under tau^lam, pushed
    into the boundary sphere; the pair couples at parameter -lam with the
    transformed factorization (the image of the minimal net's dual pairing).
    """
    if lam == 0.0:
        raise SingularLambda("Bryant representation needs lam != 0")
    frame = integrate_H(g, h, lam)
    tq = frame.to_quaternion_matrices()
    vec = np.zeros((2, 4))
    vec[0] = I / np.sqrt(2.0)
    vec[1] = J / np.sqrt(2.0)
    lifts = kernels.mat2_vec(
        kernels.mat2_mul(np.broadcast_to(J_INV, tq.shape), tq),
        np.broadcast_to(vec, tq.shape[:-3] + (2, 4)),
    )
    surface = ProjectiveNet(g.window, point_normalize(lifts))
    wl = gauss_map_mobius(frame, g)
    gauss = AffineNet(g.window, complex_to_cj(wl))
    fact = holomorphic_factorization(g, h).transformed(lam)
    net = HorosphericalNet(surface, gauss, lam, fact, -lam, frame)
    net.require_interior()
    return net


def horospherical_from_gauss(g: HolomorphicNet, h: HolomorphicNet, lam: float,
                             p0=I) -> HorosphericalNet:
    """Darboux transform of the boundary net n = g j with initial surface
    value p0: f = J^-1 (tau^lam)^-1 J (v0 + vinf p0).

    p0 must be an imaginary quaternion off the boundary sphere (nonzero
    i-component); the whole net then stays off the boundary.
    """
    if lam == 0.0:
        raise SingularLambda("Darboux transform needs lam != 0")
    p0 = as_quat(p0)
    if abs(p0[0]) > 1e-12 * (float(qnorm(p0)) + 1.0):
        raise BadBasePoint("base point must be an imaginary quaternion")
    if abs(p0[1]) < 1e-12 * (float(qnorm(p0)) + 1.0):
        raise BadBasePoint("base point lies on the boundary sphere C j")
    frame = integrate_H(g, h, lam)
    tq_inv = ComplexFrame(lam, np.linalg.inv(frame.values), frame.residual,
                          frame.window).to_quaternion_matrices()
    p_lift = kernels.mat2_vec(J_MAT, point_normalize(STANDARD_CHART.lift(p0)))
    lifts = kernels.mat2_vec(
        kernels.mat2_mul(np.broadcast_to(J_INV, tq_inv.shape), tq_inv),
        np.broadcast_to(p_lift, tq_inv.shape[:-3] + (2, 4)),
    )
    surface = ProjectiveNet(g.window, point_normalize(lifts))
    net = HorosphericalNet(surface, boundary_net(g), lam,
                           holomorphic_factorization(g, h), lam, frame)
    net.require_interior()
    return net


def ccousin_coords(frame: ComplexFrame, gate=1e-13):
    """Hyperbolic-model coordinates of the frame orbit of the interior point:
    quaternion grid (-Im det, (Re det, Re xi, Im xi)) / (|t21|^2 + |t22|^2)
    with xi = t11 conj(t21) + t12 conj(t22).

    Identical to the affine values of the Bryant net; the real slot vanishes
    for real spectral parameters, where det tau is real.
    """
    t = frame.values
    det = np.linalg.det(t)
    xi = t[..., 0, 0] * np.conj(t[..., 1, 0]) + t[..., 0, 1] * np.conj(t[..., 1, 1])
    denom = np.abs(t[..., 1, 0]) ** 2 + np.abs(t[..., 1, 1]) ** 2
    if np.any(denom <= gate):
        raise ZeroDenominator("frame lower row vanished")
    out = np.empty(t.shape[:-2] + (4,))
    out[..., 0] = -det.imag / denom
    out[..., 1] = det.real / denom
    out[..., 2] = xi.real / denom
    out[..., 3] = xi.imag / denom
    return out


def poincare_ball(points, gate=1e-13):
    """Map hyperbolic-model coordinates into the Poincare ball:
    x -> (x + e1) / ((x1 + 1)^2 + x2^2 + x3^2), acting on the vector part."""
    points = as_quat(points)
    shift = np.array([0.0, 1.0, 0.0, 0.0])
    denom = (points[..., 1] + 1.0) ** 2 + points[..., 2] ** 2 + points[..., 3] ** 2
    if np.any(denom <= gate):
        raise ZeroDenominator("point maps through the inversion center")
    return (points + shift) / denom[..., None]


def ball_margin(points) -> float:
    """1 - max Euclidean norm of the vector parts; positive means strictly
    inside the unit ball."""
    points = as_quat(points)
    return float(1.0 - np.max(np.linalg.norm(points[..., 1:], axis=-1)))


# ---------------------------------------------------------------------------
# Duality and cousin relations


def bryant_base_change(p0):
    """Complex matrix [[x, y + z i], [0, 1]] carrying the standard Bryant
    vector to the lifted base point p0 = x i + (y + z i) j."""
    p0 = as_quat(p0)
    x, y, z = p0[1], p0[2], p0[3]
    if abs(x) < 1e-13:
        raise BadBasePoint("base point lies on the boundary sphere C j")
    c = np.zeros((2, 2, 4))
    c[0, 0, 0] = x
    c[0, 1, 0] = y
    c[0, 1, 1] = z
    c[1, 1] = ONE
    return c


def dual_check(g: HolomorphicNet, h: HolomorphicNet, lam: float, p0=I):
    """Duality of the two horospherical representations built from g.

    Verifies that the frame inverse (tau^lam)^-1 equals the frame at -lam of
    the transformed data w^lam = Mobius_tau(g) with its induced dual scale:
    the representation with roles of secondary and hyperbolic Gauss maps
    interchanged.  Also reports both Darboux couplings and reruns the frame
    identity with the spectral parameter negated.
    """
    f = bryant_cousin(g, h, lam)
    fs = horospherical_from_gauss(g, h, lam, p0)

    def frame_identity(sign):
        frame = integrate_H(g, h, sign * lam)
        wl = gauss_map_mobius(frame, g)
        wl_net = HolomorphicNet(g.window, wl)
        fact = holomorphic_factorization(g, h).transformed(sign * lam)
        dual = christoffel(wl_net.to_affine(), fact, seed=0.0)
        h_prime = HolomorphicNet(g.window,
                                 dual.f_star.values[..., 0] + 1j * dual.f_star.values[..., 1])
        frame_back = integrate_H(wl_net, h_prime, -sign * lam)
        inv = np.linalg.inv(frame.values)
        scale = np.abs(inv).sum(axis=(-2, -1))
        return float(np.max(np.abs(frame_back.values - inv).sum(axis=(-2, -1)) / scale))

    rep = {
        "secondary_frame_identity": frame_identity(+1),
        "secondary_frame_identity_flipped": frame_identity(-1),
    }
    rb = f.darboux_report()
    rs = fs.darboux_report()
    rep["bryant_gauss_coupling"] = max(rb["direction1"], rb["direction2"])
    rep["sharp_gauss_coupling"] = max(rs["direction1"], rs["direction2"])
    return rep


def similarity_fit(src, dst):
    """Least-squares similarity s R x + t carrying src onto dst (both (..., 3)
    point grids); returns (rms deviation, fitted scale).

    Used to compare the small-parameter cousins with the minimal net, whose
    shapes agree only after an affine blow-up of order 1/lam.
    """
    x = np.asarray(src, dtype=np.float64).reshape(-1, 3)
    y = np.asarray(dst, dtype=np.float64).reshape(-1, 3)
    mx, my = x.mean(axis=0), y.mean(axis=0)
    xc, yc = x - mx, y - my
    cov = xc.T @ yc / len(x)
    u, s, vt = np.linalg.svd(cov)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    fix = np.diag([1.0, 1.0, d])
    rot = vt.T @ fix @ u.T
    var = float((xc ** 2).sum()) / len(x)
    scale = float(np.trace(np.diag(s) @ fix)) / var
    shift = my - scale * (rot @ mx)
    moved = (scale * (rot @ x.T)).T + shift
    rms = float(np.sqrt(((moved - y) ** 2).sum(axis=1).mean()))
    return rms, scale


def t_of_minimal_vs_bryant(g: HolomorphicNet, h: HolomorphicNet, lam: float,
                           anchors=None):
    """Equivalence of the two cousin constructions: the T-transform of the
    minimal net matches the frame-orbit net up to one global Mobius gauge,
    which simultaneously carries the infinity orbit to the hyperbolic Gauss
    map."""
    from .projective import fit_mobius_gauge
    from .transforms import _anchor_spots, build_connection, integrate_T, t_transform

    minimal = weierstrass_minimal(g, h)
    pair = minimal.primary_pair()
    conn = build_connection(pair)
    frame = integrate_T(conn, lam)
    image = t_transform(pair.f, frame)
    vinf = np.broadcast_to(STANDARD_CHART.vinf, frame.values.shape[:-3] + (2, 4))
    gauss_orbit = point_normalize(kernels.mat2_vec(frame.values, vinf))
    cousin = bryant_cousin(g, h, lam)
    target = cousin.surface.values
    n_target = point_normalize(cousin.gauss_hyperbolic.lifts())
    spots = anchors or _anchor_spots(6, image.values, target)
    gauge = fit_mobius_gauge([image.values[s] for s in spots], [target[s] for s in spots])
    moved = point_normalize(kernels.mat2_vec(gauge, image.values))
    moved_gauss = point_normalize(kernels.mat2_vec(gauge, gauss_orbit))
    return {
        "surface_match": float(np.max(projective_distance(moved, target))),
        "gauss_match": float(np.max(projective_distance(moved_gauss, n_target))),
    }
