"""Discrete simplicial harmonic and spring energies with per-vertex update rules.

Harmonic energy is sum over 2-simplices of (1/2) A^2 where A is the spherical
image area; spring energy replaces A by k (A - R).  Harmonic is exactly the
k = 1, R = 0 spring case and shares the code path.  The per-vertex update is
the heuristic descent direction: magnitude A (or k (A - R)) along the unit
tangent away from the tracked barycenter, summed over incident triangles;
taking a step against it pulls vertices toward their barycenters.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .mapping import CircularMapState, SphericalMapState, wound_spread_directions

DEGENERATE_TOL = 1e-12


@dataclass
class EnergyConfig:
    """kind 'harmonic' or 'spring'; k is the spring constant, R the rest area
    (2D, in [0, 4pi)) or rest length (1D, in [0, 2pi))."""

    kind: str = "harmonic"
    k: float = 1.0
    R: float = 0.0

    def __post_init__(self):
        if self.kind not in ("harmonic", "spring"):
            raise ValueError(f"unknown energy kind {self.kind!r}")
        if self.kind == "harmonic":
            self.k = 1.0
            self.R = 0.0
        if self.k <= 0:
            raise ValueError("spring constant must be positive")

    def magnitudes(self, extents: np.ndarray) -> np.ndarray:
        return self.k * (extents - self.R)


def total_energy(state: SphericalMapState, cfg: EnergyConfig) -> float:
    m = cfg.magnitudes(state.areas())
    return float(0.5 * np.sum(m * m))


def vertex_updates(state: SphericalMapState, cfg: EnergyConfig) -> np.ndarray:
    """(n, 3) tangent vectors; the optimizer steps along their negation.

    Degenerate corners (vertex at the barycenter) contribute nothing; wound
    triangles use the canonical spread directions of the basepoint frame in
    place of the barycenter tangent.
    """
    n = state.n_vertices
    updates = np.zeros((n, 3))
    if state.n_triangles == 0:
        return updates
    mags = cfg.magnitudes(state.areas())

    corners = state.corner_positions()  # (T, 3, 3)
    g = corners - state.barycenters[:, None, :]
    g -= np.sum(g * corners, axis=2, keepdims=True) * corners
    norms = np.linalg.norm(g, axis=2)
    ok = norms > DEGENERATE_TOL
    unit = np.where(ok[:, :, None], g / np.where(ok, norms, 1.0)[:, :, None], 0.0)
    contrib = mags[:, None, None] * unit

    wound = np.nonzero(state.windings)[0]
    for t in wound.tolist():
        dirs = wound_spread_directions(state.frame, int(np.sign(state.windings[t])))
        contrib[t] = -mags[t] * dirs

    np.add.at(updates, state.tri_vertices.reshape(-1), contrib.reshape(-1, 3))
    return updates


def total_energy_1d(state: CircularMapState, cfg: EnergyConfig) -> float:
    m = cfg.magnitudes(np.abs(state.signed_arcs()))
    return float(0.5 * np.sum(m * m))


def vertex_updates_1d(state: CircularMapState, cfg: EnergyConfig) -> np.ndarray:
    """Per-vertex angular pulls; stepping against them shrinks (or grows,
    when below rest length) every incident arc."""
    arcs = state.signed_arcs()
    pull = cfg.magnitudes(np.abs(arcs)) * np.sign(arcs)
    updates = np.zeros(state.n_vertices)
    np.add.at(updates, state.edges[:, 0], pull)
    np.add.at(updates, state.edges[:, 1], -pull)
    return updates
