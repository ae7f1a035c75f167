"""Invariant suites behind `isonets check` and the acceptance tests."""

import numpy as np

from .exceptions import NotChristoffelPair
from .nets import AffineNet, classify, quad_cross_ratios
from .projective import projective_distance
from .reports import InvariantReport
from .special import (
    HolomorphicNet,
    ball_margin,
    bryant_cousin,
    ccousin_coords,
    christoffel_identity_residual,
    dual_check,
    horospherical_from_gauss,
    poincare_ball,
)
from .transforms import (
    ChristoffelPair,
    DarbouxNet,
    build_connection,
    christoffel,
    cross_relation_residual,
    darboux_residuals,
    dual_consequences_residual,
    dual_relations_residual,
    integrate_T,
    pair_from_nets,
    permutability_suite,
    t_group_check,
    t_transform,
)


def _pair_for(net: AffineNet, dual: AffineNet | None) -> ChristoffelPair:
    if dual is not None:
        return pair_from_nets(net, dual)
    return christoffel(net)


def isothermic_suite(net: AffineNet) -> InvariantReport:
    rep = InvariantReport("isothermic")
    cls = classify(net)
    rep.add("regular", 0.0 if cls.regular else 1.0, 0.5)
    rep.add("principal_max_imag", cls.max_imag, 1e-9)
    resid = cls.factorization.residual if cls.factorization else \
        cls.reasons.get("factorization_residual", np.inf)
    rep.add("factorization_residual", resid, 1e-8)
    return rep


def christoffel_suite(net: AffineNet, dual: AffineNet) -> InvariantReport:
    rep = InvariantReport("christoffel")
    try:
        pair = pair_from_nets(net, dual)
    except NotChristoffelPair as exc:
        return rep.add(f"pair_validation [{exc}]", 1.0, 1e-9)
    rep.add("pair_validation", 0.0, 1e-9)
    rep.add("dual_relations", dual_relations_residual(pair), 1e-9)
    rep.add("dual_consequences", dual_consequences_residual(pair), 1e-9)
    rep.add("cross_relation", cross_relation_residual(pair), 1e-9)
    return rep


def darboux_suite(net: AffineNet, hat: AffineNet, lam: float,
                  dual: AffineNet | None = None) -> InvariantReport:
    rep = InvariantReport("darboux", params={"lambda": lam})
    pair = _pair_for(net, dual)
    hat_d = DarbouxNet(hat.to_projective().values, hat.window, lam)
    res = darboux_residuals(pair, hat_d)
    rep.add("edge_cross_ratio_direction1", res["direction1"], 1e-8)
    rep.add("edge_cross_ratio_direction2", res["direction2"], 1e-8)
    q = quad_cross_ratios(net)
    qh = quad_cross_ratios(hat)
    rep.add("same_cross_ratios", float(np.max(np.abs(q - qh))), 1e-8)
    return rep


def t_laws_suite(net: AffineNet, lam: float,
                 dual: AffineNet | None = None) -> InvariantReport:
    rep = InvariantReport("t-laws", params={"lambda": lam})
    pair = _pair_for(net, dual)
    conn = build_connection(pair)
    frame = integrate_T(conn, lam)
    rep.add("face_residual", frame.residual, 1e-10)
    image = t_transform(pair.f, frame)
    q = quad_cross_ratios(pair.f)
    fact = pair.factorization
    expected = q * (1.0 - lam * fact.b)[None, :] / (1.0 - lam * fact.a)[:, None]
    rep.add("q_lambda_law", float(np.max(np.abs(quad_cross_ratios(image) - expected))), 1e-8)
    group = t_group_check(pair, lam, 2.0 * lam)
    rep.add("group_composition", group["composition"], 1e-7)
    rep.add("group_inverse", group["inverse"], 1e-8)
    frame0 = integrate_T(conn, 0.0)
    img0 = t_transform(pair.f, frame0)
    rep.add("identity_at_zero",
            float(np.max(projective_distance(img0.values, pair.f.to_projective().values))),
            1e-12)
    return rep


def permutability_report(net: AffineNet, lam: float, mu: float,
                         dual: AffineNet | None = None, init=None) -> InvariantReport:
    rep = InvariantReport("permutability", params={"lambda": lam, "mu": mu})
    pair = _pair_for(net, dual)
    for name, value in permutability_suite(pair, lam, mu, init=init).items():
        rep.add(name, value, 1e-7)
    return rep


def horospherical_suite(g: HolomorphicNet, h: HolomorphicNet, lam: float,
                        p0=None) -> InvariantReport:
    rep = InvariantReport("horospherical", params={"lambda": lam})
    rep.add("christoffel_identity", christoffel_identity_residual(g, h), 1e-9)
    cousin = bryant_cousin(g, h, lam)
    rb = cousin.darboux_report()
    rep.add("bryant_gauss_darboux", max(rb["direction1"], rb["direction2"]), 1e-8)
    kwargs = {} if p0 is None else {"p0": p0}
    sharp = horospherical_from_gauss(g, h, lam, **kwargs)
    rs = sharp.darboux_report()
    rep.add("sharp_gauss_darboux", max(rs["direction1"], rs["direction2"]), 1e-8)
    dc = dual_check(g, h, lam, **kwargs)
    rep.add("dual_frame_identity", dc["secondary_frame_identity"], 1e-8)
    rep.add("dual_frame_identity_flipped", dc["secondary_frame_identity_flipped"], 1e-8)
    rep.add_margin("bryant_boundary_margin", cousin.boundary_margin())
    rep.add_margin("sharp_boundary_margin", sharp.boundary_margin())
    ball = poincare_ball(ccousin_coords(cousin.frame))
    rep.add_margin("poincare_ball_margin", ball_margin(ball))
    return rep
