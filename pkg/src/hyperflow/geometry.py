"""Vectorised geometric primitives used by the surface and reflection code.

Everything here operates on raw numpy arrays; the mesh containers live in
``hypersurface``.  Point classification uses winding numbers (signed crossing
count in the plane, summed solid angle in space) so it stays robust for the
nearly-touching configurations the reflection audits produce.
"""

from __future__ import annotations

import numpy as np

_CHUNK = 256  # query points per broadcast block


def polygon_area(vertices: np.ndarray) -> float:
    """Signed area of a closed polygon (positive for counter-clockwise)."""
    x, y = vertices[:, 0], vertices[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def mesh_volume(vertices: np.ndarray, faces: np.ndarray) -> float:
    """Signed enclosed volume of an oriented triangle mesh (divergence theorem)."""
    a = vertices[faces[:, 0]]
    b = vertices[faces[:, 1]]
    c = vertices[faces[:, 2]]
    return float(np.einsum("ij,ij->", a, np.cross(b, c))) / 6.0


def circumcircle_curvature(prev: np.ndarray, cur: np.ndarray, nxt: np.ndarray) -> np.ndarray:
    """Signed curvature 1/R of the circle through three consecutive points.

    Positive where the triple turns counter-clockwise.  Exact (up to
    rounding) whenever the three points lie on a common circle.
    """
    ab = cur - prev
    bc = nxt - cur
    ca = prev - nxt
    cross = ab[:, 0] * (-ca[:, 1]) - ab[:, 1] * (-ca[:, 0])  # cross(ab, ac)
    la = np.linalg.norm(ab, axis=1)
    lb = np.linalg.norm(bc, axis=1)
    lc = np.linalg.norm(ca, axis=1)
    denom = la * lb * lc
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 2.0 * cross / denom
    return np.where(denom > 0.0, k, 0.0)


def winding_number_2d(vertices: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Integer winding numbers of a closed polygon around each query point."""
    points = np.atleast_2d(points)
    x1 = vertices[:, 0]
    y1 = vertices[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)
    out = np.empty(points.shape[0], dtype=np.int64)
    for s in range(0, points.shape[0], _CHUNK):
        px = points[s : s + _CHUNK, 0][:, None]
        py = points[s : s + _CHUNK, 1][:, None]
        up = (y1[None, :] <= py) & (y2[None, :] > py)
        down = (y1[None, :] > py) & (y2[None, :] <= py)
        left = (x2 - x1)[None, :] * (py - y1[None, :]) - (px - x1[None, :]) * (y2 - y1)[None, :]
        wn = np.sum(up & (left > 0.0), axis=1) - np.sum(down & (left < 0.0), axis=1)
        out[s : s + _CHUNK] = wn
    return out


def winding_number_3d(vertices: np.ndarray, faces: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Generalised winding number: summed signed solid angle over 4*pi.

    Close to 1 inside a consistently oriented closed surface and close to 0
    outside (van Oosterom-Strackee per-triangle solid angles).
    """
    points = np.atleast_2d(points)
    ta = vertices[faces[:, 0]]
    tb = vertices[faces[:, 1]]
    tc = vertices[faces[:, 2]]
    out = np.empty(points.shape[0], dtype=float)
    for s in range(0, points.shape[0], _CHUNK):
        p = points[s : s + _CHUNK]
        a = ta[None, :, :] - p[:, None, :]
        b = tb[None, :, :] - p[:, None, :]
        c = tc[None, :, :] - p[:, None, :]
        la = np.linalg.norm(a, axis=2)
        lb = np.linalg.norm(b, axis=2)
        lc = np.linalg.norm(c, axis=2)
        num = np.einsum("qij,qij->qi", a, np.cross(b, c))
        den = (
            la * lb * lc
            + np.einsum("qij,qij->qi", a, b) * lc
            + np.einsum("qij,qij->qi", b, c) * la
            + np.einsum("qij,qij->qi", c, a) * lb
        )
        omega = 2.0 * np.arctan2(num, den)
        out[s : s + _CHUNK] = np.sum(omega, axis=1) / (4.0 * np.pi)
    return out


def point_segment_distance(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Min distance from each point to a set of segments, shape (P,)."""
    points = np.atleast_2d(points)
    d = seg_b - seg_a
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd > 0.0, dd, 1.0)
    out = np.empty(points.shape[0], dtype=float)
    for s in range(0, points.shape[0], _CHUNK):
        p = points[s : s + _CHUNK]
        ap = p[:, None, :] - seg_a[None, :, :]
        t = np.clip(np.einsum("qij,ij->qi", ap, d) / dd[None, :], 0.0, 1.0)
        closest = seg_a[None, :, :] + t[:, :, None] * d[None, :, :]
        dist = np.linalg.norm(p[:, None, :] - closest, axis=2)
        out[s : s + _CHUNK] = np.min(dist, axis=1)
    return out


def point_triangle_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Distance from each point to its paired triangle, all shapes (..., 3).

    Vectorised closest-point-on-triangle classification over the seven
    Voronoi regions of the triangle.
    """
    ab = b - a
    ac = c - a
    ap = points - a
    d1 = np.einsum("...i,...i->...", ab, ap)
    d2 = np.einsum("...i,...i->...", ac, ap)
    bp = points - b
    d3 = np.einsum("...i,...i->...", ab, bp)
    d4 = np.einsum("...i,...i->...", ac, bp)
    cp = points - c
    d5 = np.einsum("...i,...i->...", ab, cp)
    d6 = np.einsum("...i,...i->...", ac, cp)

    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    eps = 1e-300
    denom_bc = np.where(np.abs((d4 - d3) + (d5 - d6)) > eps, (d4 - d3) + (d5 - d6), 1.0)
    w_bc = np.clip((d4 - d3) / denom_bc, 0.0, 1.0)
    denom = va + vb + vc
    denom = np.where(np.abs(denom) > eps, denom, 1.0)
    v_in = vb / denom
    w_in = vc / denom

    t_ab = np.clip(d1 / np.where(np.abs(d1 - d3) > eps, d1 - d3, 1.0), 0.0, 1.0)
    t_ac = np.clip(d2 / np.where(np.abs(d2 - d6) > eps, d2 - d6, 1.0), 0.0, 1.0)

    closest = a + v_in[..., None] * ab + w_in[..., None] * ac  # interior default
    closest = np.where(((vc <= 0) & (d1 >= 0) & (d3 <= 0))[..., None], a + t_ab[..., None] * ab, closest)
    closest = np.where(((vb <= 0) & (d2 >= 0) & (d6 <= 0))[..., None], a + t_ac[..., None] * ac, closest)
    closest = np.where(
        ((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0))[..., None],
        b + w_bc[..., None] * (c - b),
        closest,
    )
    closest = np.where(((d1 <= 0) & (d2 <= 0))[..., None], a, closest)
    closest = np.where(((d3 >= 0) & (d4 <= d3))[..., None], b, closest)
    closest = np.where(((d6 >= 0) & (d5 <= d6))[..., None], c, closest)
    return np.linalg.norm(points - closest, axis=-1)


def segments_intersect(a1, a2, b1, b2) -> np.ndarray:
    """Proper or touching intersection test for paired 2D segments."""

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (
            r[..., 0] - p[..., 0]
        )

    d1 = orient(b1, b2, a1)
    d2 = orient(b1, b2, a2)
    d3 = orient(a1, a2, b1)
    d4 = orient(a1, a2, b2)
    proper = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)

    def on_seg(p, q, r):
        collinear = orient(p, q, r) == 0.0
        within = (
            (np.minimum(p[..., 0], q[..., 0]) <= r[..., 0])
            & (r[..., 0] <= np.maximum(p[..., 0], q[..., 0]))
            & (np.minimum(p[..., 1], q[..., 1]) <= r[..., 1])
            & (r[..., 1] <= np.maximum(p[..., 1], q[..., 1]))
        )
        return collinear & within

    touching = on_seg(b1, b2, a1) | on_seg(b1, b2, a2) | on_seg(a1, a2, b1) | on_seg(a1, a2, b2)
    return proper | touching


def triangles_intersect(t1: np.ndarray, t2: np.ndarray) -> bool:
    """Exact-ish intersection test for two triangles in space.

    Separating-plane rejection first, then mutual edge-against-triangle
    segment tests.  Intended for the few candidate pairs that survive a
    spatial prune; shared-vertex pairs should be excluded by the caller.
    """
    n1 = np.cross(t1[1] - t1[0], t1[2] - t1[0])
    d2 = (t2 - t1[0]) @ n1
    if np.all(d2 > 1e-14) or np.all(d2 < -1e-14):
        return False
    n2 = np.cross(t2[1] - t2[0], t2[2] - t2[0])
    d1 = (t1 - t2[0]) @ n2
    if np.all(d1 > 1e-14) or np.all(d1 < -1e-14):
        return False
    for tri, other in ((t1, t2), (t2, t1)):
        for i in range(3):
            if _segment_hits_triangle(other[i], other[(i + 1) % 3], tri):
                return True
    return False


def _segment_hits_triangle(p, q, tri) -> bool:
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    nn = float(n @ n)
    if nn == 0.0:
        return False
    dp = float((p - tri[0]) @ n)
    dq = float((q - tri[0]) @ n)
    if dp * dq > 0.0:
        return False
    denom = dp - dq
    if denom == 0.0:
        return False  # coplanar segment, treated as non-crossing at this scale
    t = dp / denom
    x = p + t * (q - p)
    # barycentric containment
    v0 = tri[1] - tri[0]
    v1 = tri[2] - tri[0]
    v2 = x - tri[0]
    d00 = float(v0 @ v0)
    d01 = float(v0 @ v1)
    d11 = float(v1 @ v1)
    d20 = float(v2 @ v0)
    d21 = float(v2 @ v1)
    den = d00 * d11 - d01 * d01
    if den == 0.0:
        return False
    v = (d11 * d20 - d01 * d21) / den
    w = (d00 * d21 - d01 * d20) / den
    return v >= -1e-12 and w >= -1e-12 and v + w <= 1.0 + 1e-12


def fibonacci_sphere_directions(count: int) -> np.ndarray:
    """Low-discrepancy unit directions on the 2-sphere."""
    i = np.arange(count, dtype=float) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / count)
    golden = np.pi * (1.0 + np.sqrt(5.0))
    theta = golden * i
    return np.column_stack(
        [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
    )


def uniform_circle_directions(count: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(count, dtype=float) / count
    return np.column_stack([np.cos(theta), np.sin(theta)])
