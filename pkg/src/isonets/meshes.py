"""Quad mesh export for net grids (ascii OBJ and PLY).

One vertex per grid point, row-major in (m, n); one quad face per cell
with corners (i,j), (i+1,j), (i+1,j+1), (i,j+1).  Coordinates come from
the vector part of imaginary quaternion values, written with repr so
exports are byte-stable.
"""

import numpy as np

from .quaternions import as_quat


def _vertices(points):
    points = np.asarray(points, dtype=np.float64)
    if points.shape[-1] == 4:
        points = as_quat(points)[..., 1:]
    if points.ndim != 3 or points.shape[-1] != 3:
        raise ValueError("expected an (M, N, 3) or (M, N, 4) grid")
    if points.shape[0] < 2 or points.shape[1] < 2:
        raise ValueError("mesh needs at least a 2x2 grid")
    return points


def _faces(rows, cols):
    idx = np.arange(rows * cols).reshape(rows, cols)
    return np.stack(
        [idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]], axis=-1
    ).reshape(-1, 4)


def export_mesh(points, path, fmt="obj"):
    """Write a quad mesh; fmt is 'obj' (1-based faces) or ascii 'ply'."""
    verts = _vertices(points)
    rows, cols = verts.shape[:2]
    faces = _faces(rows, cols)
    flat = [tuple(map(float, row)) for row in verts.reshape(-1, 3)]
    if fmt == "obj":
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in flat]
        lines += [f"f {a + 1} {b + 1} {c + 1} {d + 1}" for a, b, c, d in faces]
    elif fmt == "ply":
        lines = [
            "ply",
            "format ascii 1.0",
            f"element vertex {len(flat)}",
            "property double x",
            "property double y",
            "property double z",
            f"element face {len(faces)}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
        lines += [f"{x!r} {y!r} {z!r}" for x, y, z in flat]
        lines += [f"4 {a} {b} {c} {d}" for a, b, c, d in faces]
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return len(flat), len(faces)


def read_mesh(path):
    """Minimal reader for the two formats above; returns (vertices, faces)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh.read().splitlines() if ln.strip()]
    verts, faces = [], []
    if lines and lines[0] == "ply":
        k = lines.index("end_header") + 1
        nv = int(next(ln.split()[2] for ln in lines if ln.startswith("element vertex")))
        for ln in lines[k:k + nv]:
            verts.append([float(x) for x in ln.split()])
        for ln in lines[k + nv:]:
            parts = ln.split()
            faces.append([int(x) for x in parts[1:1 + int(parts[0])]])
    else:
        for ln in lines:
            if ln.startswith("v "):
                verts.append([float(x) for x in ln.split()[1:]])
            elif ln.startswith("f "):
                faces.append([int(x) - 1 for x in ln.split()[1:]])
    return np.array(verts), np.array(faces, dtype=int)
