import numpy as np
import pytest

from isonets import kernels
from isonets.exceptions import (
    BadInitialPoint,
    DegenerateConfiguration,
    DegenerateDifference,
    NotChristoffelPair,
    NotIsothermic,
    SingularLambda,
)
from isonets.nets import AffineNet, GridWindow, classify, quad_cross_ratios
from isonets.projective import (
    AffineChart,
    HermitianForm,
    STANDARD_CHART,
    cospherical_residual,
    point_normalize,
    projective_distance,
    sphere_span_residual,
)
from isonets.quaternions import I, J, complex_to_cj, qmul, qnorm
from isonets.special import gauss_sphere_map, catenoid_pair
from isonets.transforms import (
    ChristoffelPair,
    DarbouxNet,
    bianchi_permute,
    build_connection,
    cd_permute,
    christoffel,
    control_connection,
    cross_relation_residual,
    darboux_fixed_point,
    darboux_residuals,
    darboux_riccati,
    dual_consequences_residual,
    dual_relations_residual,
    gauge_equivalent_frame,
    general_christoffel,
    goursat,
    integrate_T,
    maurer_cartan_residual,
    off_diagonal_part,
    pair_from_nets,
    permutability_suite,
    riccati_residual,
    step_sphere_residual,
    t_group_check,
    t_transform,
    tc_permutability,
)

INIT = np.array([0.0, 1.0, 0.5, -0.3])


# ---------------------------------------------------------------------------
# Christoffel


def test_planar_self_dual(planar_net):
    pair = christoffel(planar_net, seed=planar_net.origin_value())
    assert np.max(np.abs(pair.f_star.values - planar_net.values)) < 1e-13


def test_exponential_dual_proportional_to_h(exp_pair_small):
    # at the (d h)(d g) scale the dual IS h; the classified (normalized) dual is a
    # real multiple of it
    g = exp_pair_small.f
    pair = christoffel(g, seed=np.zeros(4))
    h = exp_pair_small.f_star.values
    href = h - h[5, 5]
    scale = -1.0 / (4.0 * np.sin(np.pi / 20) ** 2)
    assert np.max(np.abs(pair.f_star.values - scale * href)) < 1e-10


def test_christoffel_involutive(exp_pair_small):
    g = exp_pair_small.f
    pair = christoffel(g, seed=np.zeros(4))
    back = christoffel(pair.f_star, pair.factorization, seed=g.origin_value())
    diff = back.f_star.values - g.values
    assert np.max(qnorm(diff - diff[5, 5])) < 1e-11


def test_christoffel_rejects_non_isothermic(planar_net):
    values = planar_net.values.copy()
    values[2, 3, 3] += 0.05
    with pytest.raises(NotIsothermic):
        christoffel(AffineNet(planar_net.window, values))


def test_dual_relation_residuals(exp_pair_small):
    assert dual_relations_residual(exp_pair_small) < 1e-13
    assert dual_consequences_residual(exp_pair_small) < 1e-13
    assert cross_relation_residual(exp_pair_small) < 1e-13


def test_eq13_follows_from_eq12(exp_pair_small, rng):
    # perturb the dual slightly: both residual families grow together
    f_star = exp_pair_small.f_star.values * (1 + 1e-9 * rng.normal())
    noisy = ChristoffelPair(exp_pair_small.f,
                            AffineNet(exp_pair_small.f.window, f_star),
                            exp_pair_small.factorization)
    r12 = dual_relations_residual(noisy)
    r13 = dual_consequences_residual(noisy)
    assert r13 < 50 * max(r12, 1e-15)


def test_pair_from_nets_validates(exp_pair_small, rng):
    with pytest.raises(NotChristoffelPair):
        bad = AffineNet(exp_pair_small.f.window,
                        rng.normal(size=exp_pair_small.f.values.shape))
        pair_from_nets(exp_pair_small.f, bad)


# ---------------------------------------------------------------------------
# Connection and T system


def test_connection_rank_one_and_fixed_points(exp_pair_small):
    conn = build_connection(exp_pair_small)
    lifts = exp_pair_small.f.lifts()
    fact = exp_pair_small.factorization
    lam = 0.3
    s1 = np.zeros_like(conn.U)
    s1[:] = conn.U
    step = np.zeros_like(conn.U)
    from isonets.projective import IDENTITY2

    step = IDENTITY2 + lam * conn.U
    moved = kernels.mat2_vec(step, lifts[:-1, :])
    expect = lifts[:-1, :] * (1.0 - lam * fact.a)[:, None, None, None]
    assert np.max(np.abs(moved - expect)) < 1e-12
    fixed = kernels.mat2_vec(step, lifts[1:, :])
    assert np.max(np.abs(fixed - lifts[1:, :])) < 1e-12


def test_maurer_cartan_closure(exp_pair_small):
    conn = build_connection(exp_pair_small)
    assert maurer_cartan_residual(conn, 0.3) < 1e-12


def test_integrate_T_identity_at_zero(exp_pair_small):
    conn = build_connection(exp_pair_small)
    frame = integrate_T(conn, 0.0)
    assert frame.residual < 1e-15
    image = t_transform(exp_pair_small.f, frame)
    base = exp_pair_small.f.to_projective()
    assert np.max(projective_distance(image.values, base.values)) < 1e-13


def test_integrate_T_gate(exp_pair_small):
    a0 = exp_pair_small.factorization.a[0]
    with pytest.raises(SingularLambda) as err:
        integrate_T(build_connection(exp_pair_small), 1.0 / a0)
    assert err.value.index is not None


def test_q_lambda_law(exp_pair_small):
    lam = 0.1
    conn = build_connection(exp_pair_small)
    image = t_transform(exp_pair_small.f, integrate_T(conn, lam))
    q = quad_cross_ratios(exp_pair_small.f)
    fact = exp_pair_small.factorization
    expected = q * (1 - lam * fact.b)[None, :] / (1 - lam * fact.a)[:, None]
    assert np.max(np.abs(quad_cross_ratios(image) - expected)) < 1e-12


def test_q_lambda_law_conformal_gauge(planar_net):
    # q = -1, a = 1, b = -1, lam = 1/4 gives q^lam = -5/3
    pair = christoffel(planar_net)
    image = t_transform(planar_net, integrate_T(build_connection(pair), 0.25))
    q = quad_cross_ratios(image)
    assert np.max(np.abs(q + 5.0 / 3.0)) < 1e-12


def test_gauge_equivalence_with_euclidean_frame(exp_pair_small):
    lam = 0.1
    conn = build_connection(exp_pair_small)
    image1 = t_transform(exp_pair_small.f, integrate_T(conn, lam))
    frames2 = gauge_equivalent_frame(exp_pair_small, lam)
    image2 = point_normalize(kernels.mat2_vec(frames2, exp_pair_small.f.lifts()))
    assert np.max(projective_distance(image1.values, image2)) < 1e-9


def test_group_law(exp_pair_small):
    rep = t_group_check(exp_pair_small, 0.1, 0.2)
    assert rep["composition"] < 1e-7
    assert rep["inverse"] < 1e-8


def test_frame_independent_of_projection_chart(exp_pair_small, rng):
    # connections computed from two different stereographic projections of
    # the same projective net coincide
    conn = build_connection(exp_pair_small)
    new_chart = AffineChart.from_points(
        point_normalize(rng.normal(size=(2, 4))),
        point_normalize(rng.normal(size=(2, 4))),
    )
    moved = goursat(exp_pair_small, new_chart, seed=np.zeros(4))
    conn2 = build_connection(moved)
    assert np.max(np.abs(conn.U - conn2.U)) < 1e-9
    assert np.max(np.abs(conn.V - conn2.V)) < 1e-9


def test_vertex_star_images_mobius_equivalent(exp_pair_small):
    # T_{m+1,n} f_{m+1,n} is projectively T_{m,n} f_{m+1,n}, and likewise
    # for the backward and vertical neighbours
    lam = 0.2
    frame = integrate_T(build_connection(exp_pair_small), lam)
    lifts = exp_pair_small.f.lifts()
    img = point_normalize(kernels.mat2_vec(frame.values, lifts))
    neighbour = point_normalize(kernels.mat2_vec(frame.values[:-1, :], lifts[1:, :]))
    assert np.max(projective_distance(img[1:, :], neighbour)) < 1e-11
    neighbour2 = point_normalize(kernels.mat2_vec(frame.values[:, :-1], lifts[:, 1:]))
    assert np.max(projective_distance(img[:, 1:], neighbour2)) < 1e-11


# ---------------------------------------------------------------------------
# General Christoffel transform


def test_general_christoffel_off_diagonal(exp_pair_small):
    field = general_christoffel(exp_pair_small)
    assert field.closure_residual < 1e-12
    recovered = off_diagonal_part(field)
    diff = recovered - (exp_pair_small.f_star.values - exp_pair_small.f_star.values[5, 5])
    assert np.max(qnorm(diff - diff[0, 0])) < 1e-10


def test_general_christoffel_chart_independent(exp_pair_small, rng):
    field = general_christoffel(exp_pair_small)
    chart = AffineChart.from_points(
        point_normalize(rng.normal(size=(2, 4))),
        point_normalize(rng.normal(size=(2, 4))),
    )
    moved = goursat(exp_pair_small, chart, seed=np.zeros(4))
    field2 = general_christoffel(moved)
    assert np.max(np.abs(field.values - field2.values)) < 1e-9


# ---------------------------------------------------------------------------
# Darboux


def test_darboux_routes_agree(exp_pair_small):
    lam = 0.2
    init = exp_pair_small.f.origin_value() + INIT
    hat_r = darboux_riccati(exp_pair_small, lam, init)
    frame = integrate_T(build_connection(exp_pair_small), lam)
    hat_f = darboux_fixed_point(frame, STANDARD_CHART.lift(init))
    assert np.max(projective_distance(hat_r.values, hat_f.values)) < 1e-10
    assert hat_r.residual < 1e-12


def test_darboux_cross_ratio_conditions(exp_pair_small):
    lam = 0.2
    init = exp_pair_small.f.origin_value() + INIT
    hat = darboux_riccati(exp_pair_small, lam, init)
    res = darboux_residuals(exp_pair_small, hat)
    assert res["direction1"] < 1e-12
    assert res["direction2"] < 1e-12


def test_darboux_preserves_cross_ratios(exp_pair_small):
    hat = darboux_riccati(exp_pair_small, 0.2, exp_pair_small.f.origin_value() + INIT)
    q = quad_cross_ratios(exp_pair_small.f)
    qh = quad_cross_ratios(hat.to_affine())
    assert np.max(np.abs(q - qh)) < 1e-11


def test_darboux_involutive(exp_pair_small):
    lam = 0.2
    f = exp_pair_small.f
    hat = darboux_riccati(exp_pair_small, lam, f.origin_value() + INIT)
    hat_aff = hat.to_affine()
    hat_pair = christoffel(hat_aff, exp_pair_small.factorization, seed=np.zeros(4))
    back = darboux_riccati(hat_pair, lam, f.origin_value())
    assert np.max(qnorm(back.to_affine().values - f.values)) < 1e-9


def test_darboux_gates(exp_pair_small):
    with pytest.raises(BadInitialPoint):
        darboux_riccati(exp_pair_small, 0.2, exp_pair_small.f.origin_value())
    with pytest.raises(SingularLambda):
        darboux_riccati(exp_pair_small, 0.0, exp_pair_small.f.origin_value() + INIT)


def test_darboux_on_sphere_stays_on_sphere(exp_pair_small):
    # S^3-valued isothermic net: the boundary-sphere net g j; an initial
    # point on Im H keeps the transform there
    g, h = catenoid_pair(20, 5, 5)
    n_net = AffineNet(g.window, complex_to_cj(g.values))
    minus_jh = qmul(-J, np.stack([h.values.real, h.values.imag,
                                  np.zeros(h.window.shape), np.zeros(h.window.shape)],
                                 axis=-1))
    pair = pair_from_nets(n_net, AffineNet(g.window, minus_jh))
    init = I + 0.5 * J  # imaginary
    hat = darboux_riccati(pair, 0.2, init)
    vals = hat.to_affine().values
    form = HermitianForm.imaginary_sphere()
    residual = np.max(np.abs(form.value(hat.values)))
    assert residual < 1e-9
    assert np.max(np.abs(vals[..., 0])) < 1e-9


def test_darboux_hexahedron_cospherical(exp_pair_small):
    hat = darboux_riccati(exp_pair_small, 0.2, exp_pair_small.f.origin_value() + INIT)
    fv = exp_pair_small.f.to_projective().values
    hv = hat.values
    worst = 0.0
    for i in range(fv.shape[0] - 1):
        for j in range(fv.shape[1] - 1):
            pts = np.concatenate([
                fv[i:i + 2, j:j + 2].reshape(-1, 2, 4),
                hv[i:i + 2, j:j + 2].reshape(-1, 2, 4),
            ])
            worst = max(worst, cospherical_residual(pts))
    assert worst < 1e-10


# ---------------------------------------------------------------------------
# Bianchi / CD permutability


def test_bianchi_permutability(exp_pair_small):
    f = exp_pair_small.f
    hat1 = darboux_riccati(exp_pair_small, 0.15, f.origin_value() + INIT)
    hat2 = darboux_riccati(exp_pair_small, 0.35,
                           f.origin_value() + np.array([0.0, -0.4, 0.2, 0.8]))
    hat12 = bianchi_permute(exp_pair_small, hat1, hat2)
    # defining relation
    from isonets.projective import cross_ratio_points, normalize_cross_ratio

    cr = normalize_cross_ratio(cross_ratio_points(
        f.to_projective().values, hat2.values, hat12.values, hat1.values))
    assert np.max(np.abs(cr - 0.15 / 0.35)) < 1e-11
    # hat12 is D_{l2} of hat1 and D_{l1} of hat2
    pair1 = christoffel(hat1.to_affine(), exp_pair_small.factorization, seed=np.zeros(4))
    pair2 = christoffel(hat2.to_affine(), exp_pair_small.factorization, seed=np.zeros(4))
    r1 = darboux_residuals(pair1, DarbouxNet(hat12.values, hat12.window, 0.35))
    r2 = darboux_residuals(pair2, DarbouxNet(hat12.values, hat12.window, 0.15))
    assert max(r1["direction1"], r1["direction2"]) < 1e-9
    assert max(r2["direction1"], r2["direction2"]) < 1e-9


def test_bianchi_symmetric_in_transforms(exp_pair_small):
    f = exp_pair_small.f
    hat1 = darboux_riccati(exp_pair_small, 0.15, f.origin_value() + INIT)
    hat2 = darboux_riccati(exp_pair_small, 0.35,
                           f.origin_value() + np.array([0.0, -0.4, 0.2, 0.8]))
    a = bianchi_permute(exp_pair_small, hat1, hat2)
    b = bianchi_permute(exp_pair_small, hat2, hat1)
    assert np.max(projective_distance(a.values, b.values)) < 1e-10


def test_bianchi_rejects_equal_parameters(exp_pair_small):
    f = exp_pair_small.f
    hat1 = darboux_riccati(exp_pair_small, 0.2, f.origin_value() + INIT)
    with pytest.raises(DegenerateConfiguration):
        bianchi_permute(exp_pair_small, hat1, hat1)


def test_cd_permutability(exp_pair_small):
    lam = 0.15
    hat = darboux_riccati(exp_pair_small, lam, exp_pair_small.f.origin_value() + INIT)
    tilde_pair = cd_permute(exp_pair_small, hat)
    # simultaneously a C-transform of fhat ...
    assert dual_relations_residual(tilde_pair) < 1e-11
    # ... and a D_lam transform of f*, whose dual is f itself
    star_pair = ChristoffelPair(exp_pair_small.f_star, exp_pair_small.f,
                                exp_pair_small.factorization)
    assert riccati_residual(star_pair, tilde_pair.f_star.values, lam) < 1e-11


def test_cd_permute_rejects_touching(exp_pair_small):
    hat = darboux_riccati(exp_pair_small, 0.15, exp_pair_small.f.origin_value() + INIT)
    broken = DarbouxNet(exp_pair_small.f.to_projective().values, hat.window, 0.15)
    with pytest.raises(DegenerateDifference):
        cd_permute(exp_pair_small, broken)


# ---------------------------------------------------------------------------
# Goursat


def test_goursat_identity_chart(exp_pair_small):
    pair = goursat(exp_pair_small, exp_pair_small.f.chart,
                   seed=exp_pair_small.f_star.origin_value())
    assert np.max(np.abs(pair.f_star.values - exp_pair_small.f_star.values)) < 1e-12


def test_goursat_dual_relations_and_noncongruence(exp_pair_small):
    chart = AffineChart.from_points(
        STANDARD_CHART.vinf, STANDARD_CHART.lift(np.array([3.0, 0.2, -0.1, 0.5]))
    )
    moved = goursat(exp_pair_small, chart, seed=np.zeros(4))
    assert dual_relations_residual(moved) < 1e-11
    # non-congruent: edge length spectra differ
    from isonets.nets import edge_differences

    d1_old, _ = edge_differences(exp_pair_small.f_star)
    d1_new, _ = edge_differences(moved.f_star)
    old = np.sort(qnorm(d1_old).ravel())
    new = np.sort(qnorm(d1_new).ravel())
    assert np.max(np.abs(old / old[0] - new / new[0])) > 1e-2


def test_goursat_group_property(exp_pair_small, rng):
    chart1 = AffineChart.from_points(
        point_normalize(rng.normal(size=(2, 4))), point_normalize(rng.normal(size=(2, 4)))
    )
    chart2 = AffineChart.from_points(
        point_normalize(rng.normal(size=(2, 4))), point_normalize(rng.normal(size=(2, 4)))
    )
    step1 = goursat(exp_pair_small, chart1, seed=np.zeros(4))
    step12 = goursat(step1, chart2, seed=np.zeros(4))
    direct = goursat(exp_pair_small, chart2, seed=np.zeros(4))
    assert np.max(np.abs(step12.f_star.values - direct.f_star.values)) < 1e-9


def test_goursat_matches_direct_dual(exp_pair_small, rng):
    # the transported dual equals the Christoffel transform of the new
    # projection at the same (a, b)
    chart = AffineChart.from_points(
        point_normalize(rng.normal(size=(2, 4))), point_normalize(rng.normal(size=(2, 4)))
    )
    moved = goursat(exp_pair_small, chart, seed=np.zeros(4))
    direct = christoffel(moved.f, exp_pair_small.factorization, seed=np.zeros(4))
    assert np.max(np.abs(moved.f_star.values - direct.f_star.values)) < 1e-9


# ---------------------------------------------------------------------------
# Permutability suite and sphere preservation


def test_permutability_suite(exp_pair_small):
    rep = permutability_suite(exp_pair_small, 0.2, 0.45,
                              init=exp_pair_small.f.origin_value() + INIT)
    for name, value in rep.items():
        assert value < 1e-7, (name, value)


def test_permutability_suite_full_window(exp_pair_full):
    # the 21x21 exponential net is periodic in n, so grid corners coincide;
    # anchor selection must avoid the degenerate points
    rep = permutability_suite(exp_pair_full, 0.2, 0.45,
                              init=exp_pair_full.f.origin_value() + INIT)
    for name, value in rep.items():
        assert value < 1e-7, (name, value)


def test_tc_permutability_expected_values(exp_pair_small):
    rep = tc_permutability(exp_pair_small, 0.3)
    assert rep["dual_image_is_T_vinf"] < 1e-10
    assert rep["darboux_direction1"] < 1e-10
    assert rep["darboux_direction2"] < 1e-10


def test_sphere_preservation(exp_pair_small):
    g, _ = catenoid_pair(20, 5, 5)
    gauss = gauss_sphere_map(g)
    pair = christoffel(gauss)
    conn = build_connection(pair)
    for form in (HermitianForm.unit_sphere(), HermitianForm.imaginary_sphere()):
        assert step_sphere_residual(conn, 0.2, form) < 1e-9


def test_t_transform_of_sphere_net_stays_spherical():
    g, _ = catenoid_pair(20, 5, 5)
    gauss = gauss_sphere_map(g)
    pair = christoffel(gauss)
    image = t_transform(gauss, integrate_T(build_connection(pair), 0.15))
    assert sphere_span_residual(image.values.reshape(-1, 2, 4), 2) < 1e-10


# ---------------------------------------------------------------------------
# Negative control


def principal_not_isothermic():
    # all values on one circle, so every cross ratio is real, but a generic
    # angle function leaves nothing for the a_m/b_n split (a bilinear angle
    # would still factor and stay isothermic)
    w = GridWindow.centered(3, 3)
    mm, nn = np.meshgrid(w.m_values(), w.n_values(), indexing="ij")
    theta = 0.5 * mm + 0.8 * nn + 0.25 * np.sin(0.9 * mm + 1.3 * nn)
    return AffineNet.from_complex_grid(w, np.exp(1j * theta))


def test_negative_control():
    net = principal_not_isothermic()
    cls = classify(net)
    assert cls.regular and cls.principal and not cls.isothermic
    assert cls.reasons["factorization_residual"] > 1e-3
    from isonets.nets import factorize_cross_ratios

    best = factorize_cross_ratios(quad_cross_ratios(net).real, net.window, check=False)
    conn = control_connection(net, best)
    assert maurer_cartan_residual(conn, 0.3) > 1e-3
