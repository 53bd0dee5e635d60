"""Initial map construction (the canonical lift) and the evolving map states.

The sphere-valued initial map places every vertex at a basepoint; a 2-simplex
with integer cocycle coefficient n starts in the wound state (winding n,
tracked barycenter at the antipode), every other 2-simplex starts degenerate.
The circle-valued analog places vertices at a base angle with per-edge integer
windings.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .cohomology import Cochain, coboundary
from .complexes import FilteredComplex
from .errors import TopologyError
from . import geometry
from .geometry import FOUR_PI


def _tangent_frame(basepoint: np.ndarray, reference_tangent=None) -> np.ndarray:
    """Orthonormal (2, 3) frame in the tangent plane at the basepoint."""
    p = geometry.normalize(np.asarray(basepoint, dtype=float))
    if reference_tangent is None:
        reference_tangent = [0.0, 1.0, 0.0] if abs(p[1]) < 0.9 else [0.0, 0.0, 1.0]
    e1 = geometry.tangent_project(p, np.asarray(reference_tangent, dtype=float))
    n1 = np.linalg.norm(e1)
    if n1 < 1e-9:
        raise ValueError("reference tangent is parallel to the basepoint")
    e1 = e1 / n1
    e2 = np.cross(p, e1)
    return np.stack([e1, e2])


def wound_spread_directions(frame: np.ndarray, orientation: int) -> np.ndarray:
    """Canonical unit tangents along which a wound triangle's corners open up.

    Corner k of a positively oriented wound triangle spreads along the frame
    direction at angle -2*pi*k/3; the negative orientation uses the mirror
    image (+2*pi*k/3).  The chirality is fixed so that, right after opening,
    the complementary region tracked by the antipodal barycenter has signed
    area close to +4*pi per unit of positive winding (degree bookkeeping).
    """
    angles = -orientation * 2.0 * np.pi * np.arange(3) / 3.0
    return np.cos(angles)[:, None] * frame[0] + np.sin(angles)[:, None] * frame[1]


@dataclass
class SphericalMapState:
    """Vertex positions on S^2 plus per-triangle tracking data.

    ``tri_vertices[t]`` are rows into ``positions``; ``windings`` are nonzero
    only while a triangle is still in its initial wound state.  The filled
    region of a triangle is the one on the tracked barycenter's side (minor
    triangle when <barycenter, u+v+w> > 0, complement otherwise) and
    ``orientations`` carries its Jacobian sign: initialized from the cocycle
    coefficient's sign and flipped by the optimizer only when a face everts
    through zero area.  ``vertex_ids`` maps rows back to the original data
    points (pruning reindexes).
    """

    complex: FilteredComplex
    positions: np.ndarray
    tri_vertices: np.ndarray
    barycenters: np.ndarray
    windings: np.ndarray
    orientations: np.ndarray
    basepoint: np.ndarray
    frame: np.ndarray
    vertex_ids: np.ndarray
    iteration: int = 0

    @property
    def n_vertices(self) -> int:
        return self.positions.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.tri_vertices.shape[0]

    def corner_positions(self) -> np.ndarray:
        """(T, 3, 3): positions of the three corners of every triangle."""
        return self.positions[self.tri_vertices]

    def minor_side(self) -> np.ndarray:
        """True where the tracked barycenter selects the minor triangle."""
        p = self.corner_positions()
        return np.sum(self.barycenters * (p[:, 0] + p[:, 1] + p[:, 2]), axis=-1) > 0.0

    def unsigned_areas(self) -> np.ndarray:
        p = self.corner_positions()
        excess, _ = geometry.excess_and_orientation(p[:, 0], p[:, 1], p[:, 2])
        area = np.where(self.minor_side(), excess, geometry.FOUR_PI - excess)
        return np.where(
            self.windings != 0, geometry.FOUR_PI * np.abs(self.windings), area
        )

    def signed_areas(self) -> np.ndarray:
        p = self.corner_positions()
        excess, _ = geometry.excess_and_orientation(p[:, 0], p[:, 1], p[:, 2])
        area = np.where(self.minor_side(), excess, geometry.FOUR_PI - excess)
        signed = self.orientations * area
        return np.where(self.windings != 0, geometry.FOUR_PI * self.windings, signed)

    def areas(self) -> np.ndarray:
        return self.unsigned_areas()

    def triangle(self, t: int) -> geometry.SphericalTriangle:
        p = self.positions[self.tri_vertices[t]]
        return geometry.SphericalTriangle(
            p[0], p[1], p[2], self.barycenters[t], int(self.windings[t])
        )

    def copy(self) -> "SphericalMapState":
        return replace(
            self,
            positions=self.positions.copy(),
            barycenters=self.barycenters.copy(),
            windings=self.windings.copy(),
            orientations=self.orientations.copy(),
        )


@dataclass
class CircularMapState:
    """Vertex angles on S^1 plus per-edge integer windings."""

    complex: FilteredComplex
    angles: np.ndarray
    edges: np.ndarray
    windings: np.ndarray
    vertex_ids: np.ndarray
    iteration: int = 0

    @property
    def n_vertices(self) -> int:
        return self.angles.shape[0]

    def signed_arcs(self) -> np.ndarray:
        """Signed arc length per edge, winding included."""
        delta = self.angles[self.edges[:, 0]] - self.angles[self.edges[:, 1]]
        return geometry.wrap_angle(delta) + 2.0 * np.pi * self.windings

    def copy(self) -> "CircularMapState":
        return replace(self, angles=self.angles.copy(), windings=self.windings.copy())


def _verify_integer_cocycle(alpha: Cochain, complex: FilteredComplex):
    if alpha.prime is not None:
        raise ValueError("expected an integer cochain (prime=None)")
    residue = coboundary(alpha, complex)
    if residue.data:
        simplex = next(iter(residue.data))
        raise TopologyError(
            f"cochain is not a cocycle: alternating sum {residue.data[simplex]} "
            f"on simplex {simplex}"
        )


def initial_spherical_map(
    alpha: Cochain,
    complex: FilteredComplex,
    basepoint=(1.0, 0.0, 0.0),
    reference_tangent=None,
) -> SphericalMapState:
    """Canonical lift of an integer 2-cocycle: the pipeline's initial map.

    Every vertex sits at the basepoint.  A 2-simplex with coefficient n != 0
    is wound n times (area 4*pi*|n|, barycenter at the antipode); all others
    are degenerate with zero area.
    """
    if alpha.degree != 2:
        raise ValueError("spherical initial map needs a degree-2 cochain")
    _verify_integer_cocycle(alpha, complex)
    p0 = geometry.normalize(np.asarray(basepoint, dtype=float))
    n = complex.n_vertices
    tris = complex.simplices[2].copy()
    T = tris.shape[0]
    windings = np.array([alpha(tuple(s)) for s in tris.tolist()], dtype=np.int64)
    positions = np.tile(p0, (n, 1))
    barycenters = np.tile(p0, (T, 1))
    barycenters[windings != 0] = -p0
    return SphericalMapState(
        complex=complex,
        positions=positions,
        tri_vertices=tris,
        barycenters=barycenters,
        windings=windings,
        orientations=np.sign(windings).astype(np.int8),
        basepoint=p0,
        frame=_tangent_frame(p0, reference_tangent),
        vertex_ids=np.arange(n, dtype=np.int64),
    )


def initial_circular_map(
    alpha: Cochain, complex: FilteredComplex, base_angle: float = 0.0
) -> CircularMapState:
    """All vertices at the base angle; each edge winds by its cocycle coefficient."""
    if alpha.degree != 1:
        raise ValueError("circular initial map needs a degree-1 cochain")
    _verify_integer_cocycle(alpha, complex)
    edges = complex.simplices[1].copy()
    windings = np.array([alpha(tuple(e)) for e in edges.tolist()], dtype=np.int64)
    angles = np.full(complex.n_vertices, float(base_angle) % (2.0 * np.pi))
    return CircularMapState(
        complex=complex,
        angles=angles,
        edges=edges,
        windings=windings,
        vertex_ids=np.arange(complex.n_vertices, dtype=np.int64),
    )


def extract_coordinates(state) -> np.ndarray:
    """Per-vertex coordinates: (azimuth, elevation) columns for sphere-valued
    states, a single angle column in [0, 2*pi) for circle-valued ones."""
    if isinstance(state, SphericalMapState):
        return geometry.to_azimuth_elevation(state.positions)
    if isinstance(state, CircularMapState):
        return np.mod(state.angles, 2.0 * np.pi).reshape(-1, 1)
    raise TypeError(f"unsupported state type {type(state)!r}")


def geometric_orientations(state: SphericalMapState) -> np.ndarray:
    """Jacobian signs of an unfolded state: sign(det[u,v,w]) for a minor-side
    region, its negation for the complement.  Used to initialize orientation
    state for directly constructed (non-pipeline) states."""
    p = state.corner_positions()
    _, det = geometry.excess_and_orientation(p[:, 0], p[:, 1], p[:, 2])
    sgn = np.sign(det)
    return np.where(state.minor_side(), sgn, -sgn).astype(np.int8)


def surface_degree(state: SphericalMapState, face_signs: dict) -> float:
    """(1/4pi) * sum of fundamental-cycle-signed areas over a closed surface.

    ``face_signs`` maps 2-simplices to the +/-1 coefficients of a fundamental
    cycle (see cohomology.fundamental_class_signs); faces of the state outside
    the dict are ignored.  Conserved along homotopies, so it must stay at the
    cocycle pairing throughout optimization.
    """
    signed = state.signed_areas()
    total = 0.0
    for t, simplex in enumerate(map(tuple, state.tri_vertices.tolist())):
        sign = face_signs.get(simplex)
        if sign is not None:
            total += sign * signed[t]
    return total / FOUR_PI
