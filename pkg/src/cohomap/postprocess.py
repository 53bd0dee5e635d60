"""Pruning of near-degenerate simplices with re-optimization, and recovery metrics."""
from __future__ import annotations

import numpy as np

from . import geometry
from .complexes import FilteredComplex
from .energy import EnergyConfig
from .errors import TopologyError
from .mapping import SphericalMapState
from .optimize import OptimizerConfig, RunReport, minimize_spherical


def _subcomplex_of_triangles(complex: FilteredComplex, tris: np.ndarray, remap: np.ndarray) -> FilteredComplex:
    """Complex spanned by the given triangles (and their faces), reindexed."""
    keep_edges = set()
    for i, j, k in tris.tolist():
        keep_edges.update([(i, j), (i, k), (j, k)])
    edge_idx = complex.row_index(1)
    tri_idx = complex.row_index(2)
    verts = np.unique(tris)
    edges = sorted(keep_edges)
    sims = {
        0: remap[verts].reshape(-1, 1),
        1: remap[np.array(edges, dtype=np.int64)],
        2: remap[tris],
    }
    vals = {
        0: np.zeros(len(verts)),
        1: np.array([complex.values[1][edge_idx[e]] for e in edges]),
        2: np.array([complex.values[2][tri_idx[tuple(t)]] for t in tris.tolist()]),
    }
    return FilteredComplex(len(verts), sims, vals)


def prune_and_rerun(
    state: SphericalMapState,
    energy: EnergyConfig,
    config: OptimizerConfig = None,
    threshold: float = 1e-2,
) -> tuple[SphericalMapState, RunReport]:
    """Drop 2-simplices whose current image area is below the threshold, drop
    vertices left without any retained 2-simplex, and re-run the minimization
    from the surviving positions.

    ``vertex_ids`` of the result still refer to the original data points.
    """
    areas = state.areas()
    keep = areas >= threshold
    if not np.any(keep):
        raise TopologyError("no significant simplices remain after pruning")

    kept_tris = state.tri_vertices[keep]
    used = np.unique(kept_tris)
    remap = np.full(state.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))

    pruned = SphericalMapState(
        complex=_subcomplex_of_triangles(state.complex, kept_tris, remap),
        positions=state.positions[used].copy(),
        tri_vertices=remap[kept_tris],
        barycenters=state.barycenters[keep].copy(),
        windings=state.windings[keep].copy(),
        orientations=state.orientations[keep].copy(),
        basepoint=state.basepoint,
        frame=state.frame,
        vertex_ids=state.vertex_ids[used].copy(),
    )
    return minimize_spherical(pruned, energy, config)


def align_circular(final: np.ndarray, truth: np.ndarray) -> tuple[np.ndarray, dict]:
    """Best rotation (circular mean of differences) and reflection of circle
    coordinates onto the truth; returns aligned angles and the transform."""
    final = np.asarray(final, dtype=float).reshape(-1)
    truth = np.asarray(truth, dtype=float).reshape(-1)
    best = None
    for reflect in (1.0, -1.0):
        cand = reflect * final
        diff = truth - cand
        rot = float(np.arctan2(np.sin(diff).sum(), np.cos(diff).sum()))
        aligned = np.mod(cand + rot, 2.0 * np.pi)
        err = geometry.wrap_angle(aligned - truth)
        rms = float(np.sqrt(np.mean(err**2)))
        if best is None or rms < best[0]:
            best = (rms, aligned, {"reflection": reflect, "rotation": rot})
    return best[1], best[2]


def evaluate_recovery(final: np.ndarray, truth: np.ndarray, kind: str) -> tuple[dict, np.ndarray]:
    """Geodesic recovery error after optimal alignment.

    ``kind='sphere'``: coordinates are (azimuth, elevation) pairs, aligned by
    orthogonal Procrustes (reflections allowed).  ``kind='circle'``: single
    angles, aligned by rotation/reflection with wrap-around respected.
    Returns ({rms_geodesic, max_geodesic, ...}, aligned coordinates).
    """
    final = np.asarray(final, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if final.shape[0] != truth.shape[0]:
        raise ValueError("coordinate tables must have matching lengths")

    if kind == "sphere":
        fv = geometry.from_azimuth_elevation(final.reshape(-1, 2))
        tv = geometry.from_azimuth_elevation(truth.reshape(-1, 2))
        Q = geometry.procrustes_align(fv, tv)
        aligned_vecs = fv @ Q.T
        err = geometry.geodesic_distance(aligned_vecs, tv)
        aligned = geometry.to_azimuth_elevation(aligned_vecs)
    elif kind == "circle":
        aligned_ang, _ = align_circular(final.reshape(-1), truth.reshape(-1))
        err = np.abs(geometry.wrap_angle(aligned_ang - truth.reshape(-1)))
        aligned = aligned_ang.reshape(-1, 1)
    else:
        raise ValueError("kind must be 'sphere' or 'circle'")

    metrics = {
        "rms_geodesic": float(np.sqrt(np.mean(err**2))),
        "max_geodesic": float(np.max(err)),
        "n_points": int(final.shape[0]),
        "kind": kind,
    }
    return metrics, aligned
