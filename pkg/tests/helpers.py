"""Shared pipeline shortcuts for the test suite."""
import numpy as np

from cohomap import (
    build_vr,
    build_vr_from_points,
    cocycle_at,
    compute_barcode,
    fundamental_class_signs,
    lift_to_integers,
    load_complex,
    select_bar,
)
from cohomap.complexes import pairwise_distances
from cohomap.mapping import initial_circular_map, initial_spherical_map
from oracles import octahedron_points, tetrahedron_boundary_description


def lifted_cocycle(complex, dim, p=47, strategy="longest", epsilon=None):
    """(alpha over Z, restricted complex, epsilon, bar) for the selected bar."""
    bar = select_bar(compute_barcode(complex, dim, p), strategy)
    if epsilon is None:
        death = bar.death if np.isfinite(bar.death) else complex.max_value()
        epsilon = 0.5 * (bar.birth + death)
    sub = complex.restrict(epsilon)
    alpha = lift_to_integers(cocycle_at(bar, complex, epsilon), sub)
    return alpha, sub, epsilon, bar


def octahedron_setup(p=47):
    """Initial spherical state on the octahedron plus fundamental-cycle data."""
    c = build_vr(pairwise_distances(octahedron_points()), max_dim=3, max_scale=2.0)
    alpha, sub, eps, bar = lifted_cocycle(c, 2, p=p)
    signs = fundamental_class_signs([tuple(s) for s in sub.simplices[2].tolist()])
    state = initial_spherical_map(alpha, sub)
    return state, alpha, signs, sub


def tetrahedron_setup(p=47):
    c = load_complex(tetrahedron_boundary_description())
    alpha, sub, eps, bar = lifted_cocycle(c, 2, p=p, epsilon=1.0)
    signs = fundamental_class_signs([tuple(s) for s in sub.simplices[2].tolist()])
    state = initial_spherical_map(alpha, sub)
    return state, alpha, signs, sub


def circle_complex(n=8, max_scale=2.0, max_dim=2):
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack([np.cos(t), np.sin(t)], axis=1)
    return build_vr_from_points(pts, max_dim=max_dim, max_scale=max_scale), t


def circle_initial_state(n=8, max_scale=0.8):
    """Canonical circular lift on the bare n-cycle (consecutive edges only)."""
    c, t = circle_complex(n, max_scale=max_scale)
    alpha, sub, eps, bar = lifted_cocycle(c, 1)
    return initial_circular_map(alpha, sub), alpha, sub


def restrict_to_triangles(state, sl):
    """Copy of a spherical state keeping only the triangles selected by ``sl``."""
    out = state.copy()
    out.tri_vertices = state.tri_vertices[sl]
    out.barycenters = state.barycenters[sl]
    out.windings = state.windings[sl]
    out.orientations = state.orientations[sl]
    return out
