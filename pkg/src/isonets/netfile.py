"""Versioned text format for net grids.

Layout (one record per file):

    qnet 1
    kind affine-quaternion | projective | complex | imaginary
    window <m_min> <m_max> <n_min> <n_max>
    lambda <float>              # optional
    meta <key> <value...>       # optional, repeatable
    chart                       # optional; then 4 lines v0/vinf/nu0/nuinf,
                                # 8 floats each (two quaternions)
    values
    <one vertex per line, row-major in (m, n)>
    end

Floats are written with repr, the shortest decimal that round-trips
binary64, so save/load is bit-exact and files are stable across runs.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import KindMismatch, ParseError
from .nets import AffineNet, GridWindow, ProjectiveNet
from .projective import AffineChart, STANDARD_CHART

MAGIC = "qnet 1"

ARITY = {
    "affine-quaternion": 4,
    "projective": 8,
    "complex": 2,
    "imaginary": 3,
}


def _fmt(x):
    return repr(float(x))


@dataclass
class NetFile:
    """In-memory image of a net file."""

    kind: str
    window: GridWindow
    values: np.ndarray  # (M, N, arity)
    chart: AffineChart | None = None
    lam: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ARITY:
            raise KindMismatch(f"unknown kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        expected = self.window.shape + (ARITY[self.kind],)
        if v.shape != expected:
            raise KindMismatch(f"value grid {v.shape} does not match kind/window {expected}")
        self.values = v

    # -- converters ---------------------------------------------------------

    @classmethod
    def from_affine(cls, net: AffineNet, lam=None, meta=None):
        chart = None
        if net.chart.duality_residual() != STANDARD_CHART.duality_residual() or \
                not _is_standard(net.chart):
            chart = net.chart
        return cls("affine-quaternion", net.window, net.values, chart, lam, meta or {})

    @classmethod
    def from_projective(cls, net: ProjectiveNet, lam=None, meta=None):
        flat = net.values.reshape(net.window.shape + (8,))
        return cls("projective", net.window, flat, None, lam, meta or {})

    @classmethod
    def from_complex_grid(cls, window, grid, lam=None, meta=None):
        grid = np.asarray(grid, dtype=np.complex128)
        vals = np.stack([grid.real, grid.imag], axis=-1)
        return cls("complex", window, vals, None, lam, meta or {})

    @classmethod
    def from_imaginary(cls, window, quats, lam=None, meta=None):
        quats = np.asarray(quats, dtype=np.float64)
        return cls("imaginary", window, quats[..., 1:], None, lam, meta or {})

    def as_affine(self) -> AffineNet:
        if self.kind == "affine-quaternion":
            return AffineNet(self.window, self.values, self.chart or STANDARD_CHART)
        if self.kind == "complex":
            vals = np.zeros(self.window.shape + (4,))
            vals[..., :2] = self.values
            return AffineNet(self.window, vals)
        if self.kind == "imaginary":
            vals = np.zeros(self.window.shape + (4,))
            vals[..., 1:] = self.values
            return AffineNet(self.window, vals)
        # projective nets project through the standard chart (PointAtInfinity
        # if a vertex sits at the chart infinity)
        return self.as_projective().to_affine()

    def as_projective(self) -> ProjectiveNet:
        if self.kind == "projective":
            return ProjectiveNet(self.window, self.values.reshape(self.window.shape + (2, 4)))
        return self.as_affine().to_projective()

    def as_complex_grid(self):
        if self.kind != "complex":
            raise KindMismatch(f"kind {self.kind!r} holds no complex grid")
        return self.values[..., 0] + 1j * self.values[..., 1]

    def as_imaginary(self):
        if self.kind != "imaginary":
            raise KindMismatch(f"kind {self.kind!r} holds no imaginary grid")
        vals = np.zeros(self.window.shape + (4,))
        vals[..., 1:] = self.values
        return vals


def _is_standard(chart: AffineChart) -> bool:
    std = STANDARD_CHART
    return all(
        np.array_equal(getattr(chart, k), getattr(std, k))
        for k in ("v0", "vinf", "nu0", "nuinf")
    )


def save_net(path, netfile: NetFile):
    lines = [MAGIC, f"kind {netfile.kind}",
             f"window {netfile.window.m_min} {netfile.window.m_max} "
             f"{netfile.window.n_min} {netfile.window.n_max}"]
    if netfile.lam is not None:
        lines.append(f"lambda {_fmt(netfile.lam)}")
    for key in netfile.meta:
        lines.append(f"meta {key} {netfile.meta[key]}")
    if netfile.chart is not None:
        lines.append("chart")
        for part in (netfile.chart.v0, netfile.chart.vinf, netfile.chart.nu0,
                     netfile.chart.nuinf):
            lines.append(" ".join(_fmt(x) for x in np.asarray(part).ravel()))
    lines.append("values")
    flat = netfile.values.reshape(-1, netfile.values.shape[-1])
    for row in flat:
        lines.append(" ".join(_fmt(x) for x in row))
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_net(path) -> NetFile:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise ParseError("missing magic header 'qnet 1'", line=1)
    kind = None
    window = None
    lam = None
    meta = {}
    chart = None
    idx = 1
    try:
        while idx < len(lines):
            line = lines[idx].strip()
            if line == "values":
                idx += 1
                break
            if not line:
                idx += 1
                continue
            head, _, rest = line.partition(" ")
            if head == "kind":
                kind = rest.strip()
            elif head == "window":
                parts = rest.split()
                if len(parts) != 4:
                    raise ParseError("window needs four integers", line=idx + 1)
                window = GridWindow(*map(int, parts))
            elif head == "lambda":
                lam = float(rest)
            elif head == "meta":
                key, _, value = rest.partition(" ")
                meta[key] = value
            elif head == "chart":
                rows = []
                for k in range(4):
                    idx += 1
                    vals = [float(x) for x in lines[idx].split()]
                    if len(vals) != 8:
                        raise ParseError("chart rows need 8 floats", line=idx + 1)
                    rows.append(np.array(vals).reshape(2, 4))
                chart = AffineChart(*rows)
            else:
                raise ParseError(f"unknown field {head!r}", line=idx + 1)
            idx += 1
        else:
            raise ParseError("missing 'values' section", line=len(lines))
    except (ValueError, IndexError) as exc:
        raise ParseError(str(exc), line=idx + 1) from exc
    if kind is None or window is None:
        raise ParseError("header must declare kind and window", line=idx)
    if kind not in ARITY:
        raise KindMismatch(f"unknown kind {kind!r}")
    arity = ARITY[kind]
    rows, cols = window.shape
    data = np.empty((rows * cols, arity))
    for k in range(rows * cols):
        if idx + k >= len(lines):
            raise ParseError("file truncated inside values", line=idx + k)
        parts = lines[idx + k].split()
        if len(parts) != arity:
            raise KindMismatch(
                f"kind {kind!r} expects {arity} components, got {len(parts)}")
        try:
            data[k] = [float(x) for x in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=idx + k + 1) from exc
    return NetFile(kind, window, data.reshape(rows, cols, arity), chart, lam, meta)
