"""Discrete nets over rectangular Z^2 windows and their classification.

A net is regular when both forward edge differences are nonzero and
non-parallel (their quaternionic ratio has nonreal part), principal when
every elementary quadrilateral has real cross ratio, and isothermic when
those real cross ratios split as a_m / b_n.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateQuad, NotFactorizable
from .projective import (
    AffineChart,
    STANDARD_CHART,
    annihilator,
    cross_ratio_affine,
    cross_ratio_points,
    normalize_cross_ratio,
    point_normalize,
    projective_distance,
)
from .quaternions import as_quat, from_complex, imag_norm, qinv, qmul, qnorm

TOL_PRINCIPAL = 1e-9
TOL_FACTOR = 1e-8


@dataclass(frozen=True)
class GridWindow:
    """Inclusive index window [m_min, m_max] x [n_min, n_max] containing (0, 0)."""

    m_min: int
    m_max: int
    n_min: int
    n_max: int

    def __post_init__(self):
        if not (self.m_min <= 0 <= self.m_max and self.n_min <= 0 <= self.n_max):
            raise ValueError("window must contain the origin")
        if self.m_max - self.m_min < 1 or self.n_max - self.n_min < 1:
            raise ValueError("window must be at least 2x2")

    @classmethod
    def centered(cls, irg, jrg):
        return cls(-irg, irg, -jrg, jrg)

    @property
    def shape(self):
        return (self.m_max - self.m_min + 1, self.n_max - self.n_min + 1)

    @property
    def origin_index(self):
        return (-self.m_min, -self.n_min)

    def m_values(self):
        return np.arange(self.m_min, self.m_max + 1)

    def n_values(self):
        return np.arange(self.n_min, self.n_max + 1)

    def index(self, m, n):
        return (m - self.m_min, n - self.n_min)


@dataclass(frozen=True)
class AffineNet:
    """Quaternion-valued net: values[i, j] is the value at (m_min+i, n_min+j)."""

    window: GridWindow
    values: np.ndarray
    chart: AffineChart = field(default_factory=AffineChart.standard)

    def __post_init__(self):
        v = as_quat(self.values)
        if v.shape != self.window.shape + (4,):
            raise ValueError(f"value grid {v.shape} does not match window {self.window.shape}")
        object.__setattr__(self, "values", v.astype(np.float64))

    @classmethod
    def from_complex_grid(cls, window, grid, chart=None):
        return cls(window, from_complex(np.asarray(grid)), chart or AffineChart.standard())

    def lifts(self):
        """Homogeneous coordinates v0 + vinf*f; satisfies nuinf(f) = 1."""
        return self.chart.lift(self.values)

    def covectors(self):
        """nu0 - f nuinf; satisfies phi(vinf) = 1 and phi(lift) = 0."""
        return self.chart.covector(self.values)

    def to_projective(self):
        return ProjectiveNet(self.window, point_normalize(self.lifts()))

    def origin_value(self):
        i, j = self.window.origin_index
        return self.values[i, j]


@dataclass(frozen=True)
class ProjectiveNet:
    """HP^1-valued net stored by normalized homogeneous representatives."""

    window: GridWindow
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.window.shape + (2, 4):
            raise ValueError(f"value grid {v.shape} does not match window {self.window.shape}")
        object.__setattr__(self, "values", v)

    def to_affine(self, chart=None, tol=1e-12):
        chart = chart or STANDARD_CHART
        return AffineNet(self.window, chart.project(self.values, tol=tol), chart)

    def annihilators(self):
        return annihilator(self.values)


def edge_differences(net: AffineNet):
    """Forward differences along both directions: shapes (M-1,N,4), (M,N-1,4)."""
    f = net.values
    return f[1:, :] - f[:-1, :], f[:, 1:] - f[:, :-1]


def quad_cross_ratios(net):
    """Normalized cross ratio per elementary quadrilateral, complex (M-1, N-1).

    Affine nets go through the affine four-point formula (with the large
    value guard); projective nets use annihilator pairings, which makes
    the result chart independent.
    """
    if isinstance(net, AffineNet):
        f = net.values
        scale = float(np.max(qnorm(f))) + 1.0
        d23 = f[1:, :-1] - f[1:, 1:]
        d41 = f[:-1, 1:] - f[:-1, :-1]
        if np.any(qnorm(d23) <= 1e-13 * scale) or np.any(qnorm(d41) <= 1e-13 * scale):
            raise DegenerateQuad("coincident points in an elementary quadrilateral")
        q = cross_ratio_affine(f[:-1, :-1], f[1:, :-1], f[1:, 1:], f[:-1, 1:])
        return normalize_cross_ratio(q)
    v = net.values
    q = cross_ratio_points(v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:])
    return normalize_cross_ratio(q)


def regularity_report(net: AffineNet, tol=TOL_PRINCIPAL):
    """Check nonzero and non-parallel edge differences at every vertex."""
    d1, d2 = edge_differences(net)
    scale = float(np.max(qnorm(net.values))) + 1.0
    n1 = qnorm(d1)
    n2 = qnorm(d2)
    nonzero = bool(np.all(n1 > tol * scale)) and bool(np.all(n2 > tol * scale))
    if not nonzero:
        return {"regular": False, "reason": "zero edge difference"}
    # interior vertices carry both forward edges
    ratio = qmul(d2[:-1, :], qinv(d1[:, :-1]))
    parallel_margin = float(np.min(imag_norm(ratio) / qnorm(ratio)))
    if parallel_margin <= tol:
        return {"regular": False, "reason": "parallel edge differences", "margin": parallel_margin}
    return {"regular": True, "margin": parallel_margin}


@dataclass(frozen=True)
class CrossRatioFactorization:
    """Split q_{m,n} = a_m / b_n; a is indexed by the m-edge, b by the n-edge.

    The gauge freedom (a, b) -> (c a, c b) is fixed by b = -1 on the
    origin row, matching the conformal convention where q = -1 nets get
    a = +1, b = -1.  The scale matters: it couples to the spectral
    parameter of every transform built on top.
    """

    a: np.ndarray
    b: np.ndarray
    residual: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=np.float64))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=np.float64))

    def grid(self):
        return self.a[:, None] / self.b[None, :]

    def rescaled(self, c):
        return CrossRatioFactorization(self.a * c, self.b * c, self.residual)

    def transformed(self, lam):
        """Factorization of a T-transform: a/(1-lam a), b/(1-lam b)."""
        return CrossRatioFactorization(
            self.a / (1.0 - lam * self.a), self.b / (1.0 - lam * self.b), self.residual
        )


def factorize_cross_ratios(q, window: GridWindow, tol=TOL_FACTOR, check=True):
    """Recover (a_m, b_n) from a grid of real cross ratios.

    b is normalized to -1 on the origin row; residual is the worst
    relative deviation |q - a/b| / |q| over the grid.
    """
    q = np.asarray(q, dtype=np.float64)
    if np.any(q == 0.0):
        raise NotFactorizable("zero cross ratio cannot be factorized")
    i0, j0 = window.origin_index
    b0 = -1.0
    a = q[:, j0] * b0
    b = a[i0] / q[i0, :]
    residual = float(np.max(np.abs(q - a[:, None] / b[None, :]) / np.abs(q)))
    if check and residual > tol:
        raise NotFactorizable(f"cross ratios do not split as a_m/b_n (residual {residual:.3e})")
    return CrossRatioFactorization(a, b, residual)


@dataclass(frozen=True)
class NetClassification:
    regular: bool
    principal: bool
    isothermic: bool
    reasons: dict
    max_imag: float
    factorization: CrossRatioFactorization | None


def classify(net, tol_principal=TOL_PRINCIPAL, tol_factor=TOL_FACTOR):
    """Regular / principal / isothermic classification; never raises."""
    affine = net if isinstance(net, AffineNet) else None
    reasons = {}
    if affine is not None:
        reg = regularity_report(affine, tol=tol_principal)
        regular = reg.pop("regular")
        reasons.update(reg)
    else:
        # projective nets: consecutive points must be distinct
        v = net.values
        d1 = projective_distance(v[1:, :], v[:-1, :])
        d2 = projective_distance(v[:, 1:], v[:, :-1])
        regular = bool(min(np.min(d1), np.min(d2)) > tol_principal)
        if not regular:
            reasons["reason"] = "projectively coincident neighbours"
    if not regular:
        return NetClassification(False, False, False, reasons, np.inf, None)
    try:
        q = quad_cross_ratios(net)
    except DegenerateQuad as exc:
        return NetClassification(True, False, False, {"reason": str(exc)}, np.inf, None)
    max_imag = float(np.max(q.imag))
    principal = max_imag < tol_principal
    if not principal:
        reasons["reason"] = "nonreal cross ratios"
        return NetClassification(True, False, False, reasons, max_imag, None)
    window = net.window
    try:
        fact = factorize_cross_ratios(q.real, window, tol=tol_factor)
    except NotFactorizable as exc:
        best = factorize_cross_ratios(q.real, window, check=False)
        reasons["reason"] = str(exc)
        reasons["factorization_residual"] = best.residual
        return NetClassification(True, True, False, reasons, max_imag, None)
    return NetClassification(True, True, True, reasons, max_imag, fact)
