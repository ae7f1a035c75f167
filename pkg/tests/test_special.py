import numpy as np
import pytest

from isonets import kernels
from isonets.exceptions import (
    BadBasePoint,
    NotChristoffelPair,
    SingularLambda,
    ZeroDenominator,
)
from isonets.nets import AffineNet, classify, quad_cross_ratios
from isonets.projective import (
    AffineChart,
    STANDARD_CHART,
    fit_mobius_gauge,
    mobius_apply,
    point_normalize,
    projective_distance,
)
from isonets.quaternions import I, J, ONE, complex_to_cj, qnorm
from isonets.special import (
    ComplexFrame,
    J_INV,
    J_MAT,
    SPHERE_PROJ,
    ball_margin,
    boundary_pair,
    bryant_base_change,
    bryant_cousin,
    catenoid_pair,
    ccousin_coords,
    christoffel_identity_residual,
    dual_check,
    gauss_map_mobius,
    gauss_sphere_map,
    holomorphic_factorization,
    horospherical_from_gauss,
    integrate_H,
    minimal_cousin,
    poincare_ball,
    similarity_fit,
    t_of_minimal_vs_bryant,
    weierstrass_minimal,
)
from isonets.transforms import (
    build_connection,
    christoffel,
    darboux_fixed_point,
    integrate_T,
    t_transform,
    tmu_dlambda,
)

A_CONST = -4.0 * np.sinh(np.pi / 20) ** 2
B_CONST = 4.0 * np.sin(np.pi / 20) ** 2


@pytest.fixture(scope="module")
def gh():
    return catenoid_pair(20, 5, 5)


def test_catenoid_pair_values(gh):
    g, h = gh
    assert np.allclose(g.values * h.values, 1.0)
    i0, j0 = g.window.origin_index
    assert g.values[i0, j0] == 1.0
    assert g.values[i0 + 1, j0] == pytest.approx(np.exp(2 * np.pi / 20))


def test_catenoid_pair_isothermic(gh):
    g, h = gh
    assert christoffel_identity_residual(g, h) < 1e-9
    cls = g.classify()
    assert cls.isothermic
    q = quad_cross_ratios(g.to_affine())
    assert np.max(np.abs(q - A_CONST / B_CONST)) < 1e-12


def test_holomorphic_factorization_constants(gh):
    g, h = gh
    fact = holomorphic_factorization(g, h)
    assert np.allclose(fact.a, A_CONST)
    assert np.allclose(fact.b, B_CONST)


def test_catenoid_pair_requires_enough_points():
    with pytest.raises(ValueError):
        catenoid_pair(3)


def test_weierstrass_minimal(gh):
    g, h = gh
    mn = weierstrass_minimal(g, h)
    # purely imaginary values and unit Gauss map
    assert np.max(np.abs(mn.surface[..., 0])) < 1e-12
    assert np.max(np.abs(qnorm(mn.gauss.values) - 1.0)) < 1e-12
    # (gauss, surface) is a Christoffel pair with the (g, h) factorization
    pair = mn.gauss_pair()
    assert np.allclose(pair.factorization.a, A_CONST)
    assert np.allclose(pair.factorization.b, B_CONST)


def test_weierstrass_rejects_non_pair(gh):
    g, _ = gh
    with pytest.raises(NotChristoffelPair):
        weierstrass_minimal(g, g)


def test_minimal_cousin_routes(gh):
    g, h = gh
    mn = weierstrass_minimal(g, h)
    mc = minimal_cousin(g, h)
    diff = mc.surface - mn.surface
    assert np.max(qnorm(diff - diff[5, 5])) < 1e-12
    # without the explicit dual: same net up to real scale and translation
    mc2 = minimal_cousin(g)
    d2 = (mc2.surface - mc2.surface[5, 5]).reshape(-1, 4)
    d1 = (mc.surface - mc.surface[5, 5]).reshape(-1, 4)
    scale = float((d2 * d1).sum() / (d1 * d1).sum())
    assert np.max(np.abs(d2 - scale * d1)) < 1e-9 * max(1.0, abs(scale))


def test_gauss_map_is_sphere_projection(gh):
    g, _ = gh
    gauss = gauss_sphere_map(g)
    lifted = point_normalize(STANDARD_CHART.lift(complex_to_cj(g.values)))
    moved = mobius_apply(np.broadcast_to(SPHERE_PROJ, lifted.shape[:-2] + (2, 2, 4)), lifted)
    direct = point_normalize(STANDARD_CHART.lift(gauss.values))
    assert np.max(projective_distance(moved, direct)) < 1e-12


def test_integrate_H_identity_at_zero(gh):
    g, h = gh
    frame = integrate_H(g, h, 0.0)
    assert np.max(np.abs(frame.values - np.eye(2))) == 0.0
    assert frame.residual < 1e-15


def test_integrate_H_closure_and_determinant(gh):
    g, h = gh
    frame = integrate_H(g, h, -0.8)
    assert frame.residual < 1e-9
    det = frame.determinants()
    assert np.max(np.abs(det.imag)) < 1e-12
    # step determinants are 1 - lam a resp. 1 - lam b
    rows, cols = g.window.shape
    i0, j0 = g.window.origin_index
    pred = (1.0 + 0.8 * A_CONST) ** (np.arange(rows) - i0)
    assert np.max(np.abs(det[:, j0] - pred)) < 1e-10


def test_integrate_H_singular_gate(gh):
    g, h = gh
    with pytest.raises(SingularLambda):
        integrate_H(g, h, 1.0 / A_CONST)


def test_bryant_cousin_basics(gh):
    g, h = gh
    cousin = bryant_cousin(g, h, 0.25)
    rep = cousin.darboux_report()
    assert max(rep["direction1"], rep["direction2"]) < 1e-10
    assert cousin.boundary_margin() > 0.1
    # hyperbolic Gauss map values lie in the C j plane
    assert np.max(np.abs(cousin.gauss_hyperbolic.values[..., :2])) < 1e-12


def test_ccousin_matches_bryant_affine(gh):
    g, h = gh
    cousin = bryant_cousin(g, h, 0.25)
    coords = ccousin_coords(cousin.frame)
    affine = cousin.surface_affine().values
    assert np.max(np.abs(coords - affine)) < 1e-12
    assert np.max(np.abs(coords[..., 0])) < 1e-12


def test_ccousin_identity_frame(gh):
    g, _ = gh
    eye = np.broadcast_to(np.eye(2, dtype=complex), g.window.shape + (2, 2))
    frame = ComplexFrame(0.0, eye.copy(), 0.0, g.window)
    coords = ccousin_coords(frame)
    expect = np.zeros(4)
    expect[1] = 1.0
    assert np.allclose(coords, expect)


def test_poincare_ball_formula():
    pt = np.array([0.0, 1.0, 0.0, 0.0])
    out = poincare_ball(pt)
    assert np.allclose(out, [0.0, 0.5, 0.0, 0.0])
    with pytest.raises(ZeroDenominator):
        poincare_ball(np.array([0.0, -1.0, 0.0, 0.0]))


def test_poincare_ball_inside(gh):
    g, h = gh
    for lam in (-0.8, 1e-7, 0.25):
        ball = poincare_ball(ccousin_coords(integrate_H(g, h, lam)))
        assert ball_margin(ball) > 0.0


def test_poincare_boundary_approach():
    # the half-space interior maps strictly inside the ball; approaching the
    # boundary point at the model origin, images approach the unit sphere
    pts = np.zeros((4, 4))
    pts[:, 1] = [1.0, 0.1, 0.01, 0.001]
    pts[:, 2] = 0.3
    norms = np.linalg.norm(poincare_ball(pts)[:, 1:], axis=-1)
    assert np.all(norms < 1.0)
    approach = np.zeros((3, 4))
    approach[:, 1] = [0.1, 0.001, 1e-6]
    limit = np.linalg.norm(poincare_ball(approach)[:, 1:], axis=-1)
    assert np.all(np.diff(limit) > 0)
    assert limit[-1] > 1.0 - 1e-5


def test_horospherical_from_gauss(gh):
    g, h = gh
    sharp = horospherical_from_gauss(g, h, 0.25, I)
    rep = sharp.darboux_report()
    assert max(rep["direction1"], rep["direction2"]) < 1e-10
    assert sharp.boundary_margin() > 0.1
    i0, j0 = g.window.origin_index
    assert np.max(np.abs(sharp.surface_affine().values[i0, j0] - I)) < 1e-12


def test_horospherical_gauss_recovered_by_fixed_point(gh):
    # the hyperbolic Gauss map is itself the Darboux transform of the
    # surface from the matching initial point
    g, h = gh
    lam = 0.25
    sharp = horospherical_from_gauss(g, h, lam, I)
    surf = sharp.surface_affine()
    pair = christoffel(surf, holomorphic_factorization(g, h), seed=np.zeros(4))
    frame = integrate_T(build_connection(pair), lam)
    n0 = complex_to_cj(g.values)[g.window.origin_index]
    rec = darboux_fixed_point(frame, STANDARD_CHART.lift(n0))
    target = point_normalize(STANDARD_CHART.lift(complex_to_cj(g.values)))
    assert np.max(projective_distance(rec.values, target)) < 1e-9


def test_base_point_gates(gh):
    g, h = gh
    with pytest.raises(BadBasePoint):
        horospherical_from_gauss(g, h, 0.25, J)  # on the boundary C j
    with pytest.raises(BadBasePoint):
        horospherical_from_gauss(g, h, 0.25, ONE)  # not imaginary
    with pytest.raises(SingularLambda):
        horospherical_from_gauss(g, h, 0.0, I)


def test_boundary_hit_gate(gh):
    from isonets.exceptions import BoundaryHit

    g, h = gh
    grazing = np.array([0.0, 1e-10, 1.0, 0.0])  # barely off C j
    with pytest.raises(BoundaryHit):
        horospherical_from_gauss(g, h, 0.25, grazing)


def test_bryant_base_change(gh):
    p0 = np.array([0.0, 0.7, -0.3, 0.4])
    c = bryant_base_change(p0)
    vec = np.zeros((2, 4))
    vec[0] = I
    vec[1] = J
    moved = kernels.mat2_vec(c, vec)
    target = kernels.mat2_vec(J_MAT, STANDARD_CHART.lift(p0))
    assert projective_distance(moved, target) < 1e-13
    with pytest.raises(BadBasePoint):
        bryant_base_change(J)


def test_dual_check(gh):
    g, h = gh
    rep = dual_check(g, h, 0.25)
    for name, value in rep.items():
        assert value < 1e-10, (name, value)


def test_equivalence_lemma(gh):
    g, h = gh
    rep = t_of_minimal_vs_bryant(g, h, 0.25)
    assert rep["surface_match"] < 1e-7
    assert rep["gauss_match"] < 1e-7


def test_t_transforms_of_horospherical_are_horospherical(gh):
    # composing a T-transform with the Darboux coupling on the boundary
    # pair: images stay coupled to
    # an S^2-valued net at parameter lam - mu
    g, h = gh
    pair = boundary_pair(g, h)
    lam, mu = 0.25, 0.1
    sharp = horospherical_from_gauss(g, h, lam, I)
    i0, j0 = g.window.origin_index
    init = sharp.surface_affine().values[i0, j0]
    rep = tmu_dlambda(pair, lam, mu, init)
    assert rep["darboux_direction1"] < 1e-9
    assert rep["darboux_direction2"] < 1e-9
    assert rep["fixed_point_constancy"] < 1e-9


def test_t_family_shares_minimal_cousin(gh):
    # T^mu of the lam-cousin is the (lam+mu)-cousin up to a global Mobius
    # transformation: all of them share the same minimal cousin
    g, h = gh
    lam, mu = 0.2, 0.15
    f1 = bryant_cousin(g, h, lam)
    aff = f1.surface_affine()
    fact = holomorphic_factorization(g, h).transformed(lam)
    pair = christoffel(aff, fact, seed=np.zeros(4))
    image = t_transform(aff, integrate_T(build_connection(pair), mu))
    target = bryant_cousin(g, h, lam + mu).surface.values
    rows, cols = g.window.shape
    i0, j0 = g.window.origin_index
    spots = [(0, 0), (rows - 1, 0), (rows - 1, cols - 1), (0, cols - 1), (i0, j0),
             (rows - 1, j0)]
    gauge = fit_mobius_gauge([image.values[s] for s in spots], [target[s] for s in spots])
    moved = point_normalize(kernels.mat2_vec(gauge, image.values))
    assert np.max(projective_distance(moved, target)) < 1e-8


def test_same_gauss_map_cousins_are_goursat_related(gh):
    # two horospherical nets with hyperbolic Gauss map n have minimal
    # cousins that are duals of two stereographic projections of one net:
    # exhibit the charts and transport one cousin to the other
    g, h = gh
    lam = 0.25
    frame = integrate_H(g, h, lam)
    wl = gauss_map_mobius(frame, g)
    from isonets.quaternions import from_complex

    w_net = point_normalize(STANDARD_CHART.lift(from_complex(wl)))
    fact = holomorphic_factorization(g, h).transformed(lam)

    def chart_for(p0):
        c = bryant_base_change(p0)
        k = kernels.mat2_mul(SPHERE_PROJ, kernels.mat2_mul(J_INV, kernels.mat2_inv(c)))
        kinv = kernels.mat2_inv(k)
        return AffineChart.from_points(
            kernels.mat2_vec(kinv, STANDARD_CHART.v0),
            kernels.mat2_vec(kinv, STANDARD_CHART.vinf),
        )

    p0a = I
    p0b = np.array([0.0, 0.8, 0.4, -0.3])
    chart_a, chart_b = chart_for(p0a), chart_for(p0b)
    na = chart_a.project(w_net)
    nb = chart_b.project(w_net)
    # both projections are S^2-valued Gauss maps (unit imaginary values)
    for n_vals in (na, nb):
        assert np.max(np.abs(n_vals[..., 0])) < 1e-9
        assert np.max(np.abs(qnorm(n_vals) - 1.0)) < 1e-9
    pair_a = christoffel(AffineNet(g.window, na, chart_a), fact, seed=np.zeros(4))
    cousin_b = christoffel(AffineNet(g.window, nb, chart_b), fact, seed=np.zeros(4))
    moved = __import__("isonets.transforms", fromlist=["goursat"]).goursat(
        pair_a, chart_b, seed=np.zeros(4))
    assert np.max(projective_distance(
        point_normalize(chart_b.lift(moved.f.values)), w_net)) < 1e-9
    diff = moved.f_star.values - cousin_b.f_star.values
    assert np.max(qnorm(diff - diff[0, 0])) < 1e-9


def test_catenoid_limit(gh_full=None):
    g, h = catenoid_pair(20, 10, 10)
    target = weierstrass_minimal(g, h).surface[..., 1:]
    scale = float(np.max(np.linalg.norm(
        target.reshape(-1, 3) - target.reshape(-1, 3).mean(axis=0), axis=-1)))
    rels = []
    for lam in (1e-3, 1e-5, 1e-7):
        coords = ccousin_coords(integrate_H(g, h, lam))[..., 1:]
        rms, _ = similarity_fit(coords, target)
        rels.append(rms / scale)
    assert rels[0] > rels[1] > rels[2]
    assert rels[-1] < 1e-5


def test_similarity_fit_recovers_similarity(rng):
    x = rng.normal(size=(40, 3))
    angle = 0.7
    rot = np.array([
        [np.cos(angle), -np.sin(angle), 0.0],
        [np.sin(angle), np.cos(angle), 0.0],
        [0.0, 0.0, 1.0],
    ])
    y = 2.5 * (rot @ x.T).T + np.array([1.0, -2.0, 0.5])
    rms, scale = similarity_fit(x, y)
    assert rms < 1e-12
    assert scale == pytest.approx(2.5)


def test_full_desk_scale_window():
    # the largest supported windows: 41x41, values spanning e^(+-2pi)
    g, h = catenoid_pair(20, 20, 20)
    assert christoffel_identity_residual(g, h) < 1e-9
    from isonets.suites import horospherical_suite
    from isonets.transforms import pair_from_nets, permutability_suite

    assert horospherical_suite(g, h, 0.25).ok
    pair = pair_from_nets(g.to_affine(), h.to_affine())
    init = pair.f.origin_value() + np.array([0.0, 1.0, 0.5, -0.3])
    rep = permutability_suite(pair, 0.2, 0.45, init=init)
    assert max(rep.values()) < 1e-7
