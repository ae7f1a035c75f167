"""Quaternionic calculus for discrete isothermic nets.

Nets over rectangular Z^2 windows with values in the conformal 4-sphere
HP^1, their Christoffel (C), Goursat (G), Calapso/spectral (T) and
Darboux (D) transformations with all permutability relations, and the
discrete minimal / horospherical (cmc-1 in hyperbolic space) nets built
from them, including the catenoid-cousin pipeline.
"""

from .nets import (
    AffineNet,
    CrossRatioFactorization,
    GridWindow,
    ProjectiveNet,
    classify,
    edge_differences,
    factorize_cross_ratios,
    quad_cross_ratios,
)
from .projective import (
    AffineChart,
    HermitianForm,
    STANDARD_CHART,
    annihilator,
    cross_ratio,
    cross_ratio_affine,
    cross_ratio_points,
    fit_mobius_gauge,
    mobius_apply,
    normalize_cross_ratio,
    projective_distance,
    sphere_transform,
)
from .quaternions import Quaternion, quat_inv, quat_mul
from .special import (
    ComplexFrame,
    HolomorphicNet,
    HorosphericalNet,
    MinimalNet,
    bryant_cousin,
    catenoid_pair,
    ccousin_coords,
    dual_check,
    horospherical_from_gauss,
    integrate_H,
    minimal_cousin,
    poincare_ball,
    weierstrass_minimal,
)
from .transforms import (
    ChristoffelPair,
    ConnectionPair,
    DarbouxNet,
    GeneralChristoffelField,
    TTransformFrame,
    bianchi_permute,
    build_connection,
    cd_permute,
    christoffel,
    darboux_fixed_point,
    darboux_riccati,
    general_christoffel,
    goursat,
    integrate_T,
    pair_from_nets,
    permutability_suite,
    t_group_check,
    t_transform,
)

__version__ = "0.1.0"
