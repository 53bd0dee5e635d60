"""Unit-sphere primitives: geodesics, triangle areas, barycenter tracking, alignment.

All functions accept single vectors of shape (3,) or batches of shape (..., 3)
and are safe to call from multiple threads (pure functions, no state).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FOUR_PI = 4.0 * np.pi


def normalize(v: np.ndarray) -> np.ndarray:
    """Scale vectors to unit length. Zero vectors are returned unchanged."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    safe = np.where(n > 0.0, n, 1.0)
    return v / safe


def geodesic_distance(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Great-circle distance between unit vectors.

    Uses atan2 of (cross norm, dot), which stays accurate near 0 and pi
    where arccos loses digits.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    cross = np.cross(u, v)
    sin_d = np.linalg.norm(cross, axis=-1)
    cos_d = np.sum(u * v, axis=-1)
    return np.arctan2(sin_d, cos_d)


def tangent_project(p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Project v onto the tangent plane of the sphere at p: v - <v,p> p."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    return v - np.sum(v * p, axis=-1, keepdims=True) * p


def lhuilier_excess(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Spherical excess (= area on the unit sphere) from the three side lengths.

    E = 4 arctan sqrt( tan(s/2) tan((s-a)/2) tan((s-b)/2) tan((s-c)/2) ),
    s = (a+b+c)/2.  Near-degenerate inputs where roundoff drives s - side
    slightly negative are clamped to zero, so collapsed triangles report
    zero area instead of NaN.
    """
    a, b, c = np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)
    s = 0.5 * (a + b + c)
    with np.errstate(invalid="ignore", over="ignore"):
        prod = (
            np.tan(0.5 * s)
            * np.tan(np.maximum(0.5 * (s - a), 0.0))
            * np.tan(np.maximum(0.5 * (s - b), 0.0))
            * np.tan(np.maximum(0.5 * (s - c), 0.0))
        )
    prod = np.maximum(prod, 0.0)
    return 4.0 * np.arctan(np.sqrt(prod))


def _triple(u, v, w):
    return np.sum(u * np.cross(v, w), axis=-1)


def barycenter_in_spanned_triangle(
    u: np.ndarray, v: np.ndarray, w: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """True where b lies in the minor triangle spanned by u, v, w.

    The minor triangle is the intersection of the three hemispheres whose
    boundary great circles carry the sides; the test compares b against each
    side plane with the sign of det[u, v, w].
    """
    d = _triple(u, v, w)
    s1 = _triple(u, v, b) * d
    s2 = _triple(v, w, b) * d
    s3 = _triple(w, u, b) * d
    return (s1 >= 0.0) & (s2 >= 0.0) & (s3 >= 0.0)


def excess_and_orientation(u: np.ndarray, v: np.ndarray, w: np.ndarray):
    """(L'Huilier excess of the minor triangle, det[u, v, w]) for corner triples.

    The two consistent signed fillings of the boundary (u, v, w) are
    sign(det) * excess (minor side) and -sign(det) * (4 pi - excess)
    (complementary side); det changes sign exactly where the two regions
    swap roles, so each filling varies continuously.
    """
    u, v, w = np.asarray(u, float), np.asarray(v, float), np.asarray(w, float)
    excess = lhuilier_excess(
        geodesic_distance(v, w), geodesic_distance(u, w), geodesic_distance(u, v)
    )
    return excess, _triple(u, v, w)


def signed_triangle_area(
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    barycenter: np.ndarray,
    winding: np.ndarray | int = 0,
) -> np.ndarray:
    """Signed area of the spherical triangle (u, v, w) selected by its barycenter.

    The sign is taken with respect to the vertex order (u, v, w): positive
    when the selected region's boundary runs counterclockwise seen from
    outside the sphere.  Triangles with nonzero winding (the wound state of
    the initial map) report 4*pi*winding regardless of vertex positions.

    For winding 0 the magnitude is the L'Huilier excess E when the tracked
    barycenter lies on the minor-triangle side (the centroid side of the
    great circle normal to u+v+w), and 4*pi - E when it lies on the
    complementary side; the two branches join continuously because
    det[u,v,w] changes sign exactly where the regions swap roles.
    """
    u, v, w = np.asarray(u, float), np.asarray(v, float), np.asarray(w, float)
    b = np.asarray(barycenter, float)
    winding = np.asarray(winding)

    excess, d = excess_and_orientation(u, v, w)
    orient = np.sign(d)
    # Branch selection via the centroid side: tracked barycenters are (shifted)
    # poles +/-normalize(u+v+w), for which this test is exact, and its
    # conditioning is ~||u+v+w|| rather than ~det[u,v,w].  The hemisphere
    # in/out test degrades into noise for near-collinear corner triples (a
    # squeezed component) and would let signed areas flip by 4 pi.
    inside = np.sum(b * (u + v + w), axis=-1) > 0.0
    signed = np.where(inside, orient * excess, -orient * (FOUR_PI - excess))
    return np.where(winding != 0, FOUR_PI * winding, signed)


def triangle_area(
    u: np.ndarray,
    v: np.ndarray,
    w: np.ndarray,
    barycenter: np.ndarray,
    winding: np.ndarray | int = 0,
) -> np.ndarray:
    """Unsigned area in [0, 4*pi*max(1, |winding|)] of the tracked triangle."""
    return np.abs(signed_triangle_area(u, v, w, barycenter, winding))


@dataclass
class SphericalTriangle:
    """One tracked triangle of a sphere-valued map.

    ``tracked_barycenter`` selects which of the two complementary regions
    bounded by the sides is meant; ``winding`` is nonzero only in the
    (near-)initial state where the triangle wraps the whole sphere.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    tracked_barycenter: np.ndarray
    winding: int = 0

    @property
    def signed_area(self) -> float:
        return float(
            signed_triangle_area(
                self.u, self.v, self.w, self.tracked_barycenter, self.winding
            )
        )

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def orientation(self) -> int:
        return int(np.sign(self.signed_area))


def update_barycenter(
    u: np.ndarray, v: np.ndarray, w: np.ndarray, previous: np.ndarray
) -> np.ndarray:
    """Normalized vertex centroid, pole-disambiguated by the previous barycenter.

    Returns the candidate +/-normalize(u+v+w) lying in the hemisphere of the
    previous barycenter; keeps the previous barycenter when the centroid is
    numerically zero (three vertices 120 degrees apart on a great circle).
    Works on batches: inputs shaped (..., 3).
    """
    u, v, w = np.asarray(u, float), np.asarray(v, float), np.asarray(w, float)
    prev = np.asarray(previous, float)
    centroid = u + v + w
    norm = np.linalg.norm(centroid, axis=-1, keepdims=True)
    ok = norm >= 1e-12
    cand = centroid / np.where(ok, norm, 1.0)
    flip = np.sum(cand * prev, axis=-1, keepdims=True) < 0.0
    cand = np.where(flip, -cand, cand)
    return np.where(ok, cand, prev)


def procrustes_align(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Orthogonal Q (reflections allowed) minimizing sum ||Q a_i - b_i||^2.

    Standard SVD solution on the cross-covariance; the input configurations
    must span at least a plane (two nonzero singular values), otherwise the
    rotation about the degenerate axis is arbitrary and we refuse.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[1] != 3:
        raise ValueError("expected matching (n, 3) point arrays")
    if A.shape[0] < 3:
        raise ValueError("need at least 3 corresponded points")
    M = A.T @ B
    U, s, Vt = np.linalg.svd(M)
    if s[1] <= 1e-12 * max(s[0], 1e-300):
        raise ValueError("degenerate configuration: rank < 2, alignment not unique")
    return Vt.T @ U.T


def to_azimuth_elevation(points: np.ndarray) -> np.ndarray:
    """Unit vectors -> (azimuth, elevation): atan2(y, x) in (-pi, pi], arcsin(z)."""
    p = np.asarray(points, dtype=float)
    az = np.arctan2(p[..., 1], p[..., 0])
    el = np.arcsin(np.clip(p[..., 2], -1.0, 1.0))
    return np.stack([az, el], axis=-1)


def from_azimuth_elevation(azel: np.ndarray) -> np.ndarray:
    """(azimuth, elevation) -> unit vectors; inverse of to_azimuth_elevation."""
    a = np.asarray(azel, dtype=float)
    az, el = a[..., 0], a[..., 1]
    ce = np.cos(el)
    return np.stack([ce * np.cos(az), ce * np.sin(az), np.sin(el)], axis=-1)


def wrap_angle(x: np.ndarray) -> np.ndarray:
    """Reduce angles to the principal branch (-pi, pi]."""
    r = np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(r == -np.pi, np.pi, r)
