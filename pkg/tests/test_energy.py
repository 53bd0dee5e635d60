import numpy as np
import pytest

from cohomap import Cochain, load_complex
from cohomap.energy import (
    EnergyConfig,
    total_energy,
    total_energy_1d,
    vertex_updates,
    vertex_updates_1d,
)
from cohomap.geometry import FOUR_PI, normalize, update_barycenter
from cohomap.mapping import geometric_orientations, initial_circular_map, initial_spherical_map
from helpers import circle_initial_state, octahedron_setup, restrict_to_triangles, tetrahedron_setup
from oracles import random_unit_vectors, tetrahedron_boundary_description


def random_nondegenerate_state(rng):
    """Octahedron-topology state with random positions and interior barycenters."""
    state, _, _, _ = octahedron_setup()
    state.windings[:] = 0
    state.positions = random_unit_vectors(rng, state.n_vertices)
    corners = state.corner_positions()
    centroid = corners.sum(axis=1)
    state.barycenters = update_barycenter(
        corners[:, 0], corners[:, 1], corners[:, 2], centroid
    )
    state.orientations = geometric_orientations(state)
    return state


def test_harmonic_equals_spring_with_unit_defaults():
    rng = np.random.default_rng(0)
    harmonic = EnergyConfig("harmonic")
    spring = EnergyConfig("spring", k=1.0, R=0.0)
    for _ in range(20):
        state = random_nondegenerate_state(rng)
        assert total_energy(state, harmonic) == total_energy(state, spring)
        assert np.array_equal(vertex_updates(state, harmonic), vertex_updates(state, spring))


def test_energy_config_validation():
    with pytest.raises(ValueError):
        EnergyConfig("elastic")
    with pytest.raises(ValueError):
        EnergyConfig("spring", k=0.0)
    cfg = EnergyConfig("harmonic", k=3.0, R=1.0)  # harmonic pins k=1, R=0
    assert cfg.k == 1.0 and cfg.R == 0.0


def test_initial_energies():
    state, alpha, signs, sub = octahedron_setup()
    n_wound = int(np.count_nonzero(state.windings))
    expected = n_wound * 0.5 * FOUR_PI**2
    assert total_energy(state, EnergyConfig()) == pytest.approx(expected)

    c = load_complex(tetrahedron_boundary_description())
    zero = initial_spherical_map(Cochain(2, {}, prime=None), c)
    assert total_energy(zero, EnergyConfig()) == 0.0


def test_degenerate_triangles_contribute_nothing():
    c = load_complex(tetrahedron_boundary_description())
    state = initial_spherical_map(Cochain(2, {}, prime=None), c)
    assert np.allclose(vertex_updates(state, EnergyConfig()), 0.0)


def test_spring_at_rest_area_contributes_nothing():
    rng = np.random.default_rng(1)
    state = random_nondegenerate_state(rng)
    # Single-triangle complex: keep one triangle, set R to its area exactly.
    state = restrict_to_triangles(state, slice(0, 1))
    area = float(state.areas()[0])
    cfg = EnergyConfig("spring", k=2.0, R=area)
    assert total_energy(state, cfg) == pytest.approx(0.0, abs=1e-20)
    assert np.allclose(vertex_updates(state, cfg), 0.0, atol=1e-12)


def test_updates_are_tangent_and_additive():
    rng = np.random.default_rng(2)
    cfg = EnergyConfig()
    for _ in range(10):
        state = random_nondegenerate_state(rng)
        ups = vertex_updates(state, cfg)
        dots = np.sum(ups * state.positions, axis=1)
        assert np.max(np.abs(dots)) < 1e-10

        # Additivity over triangles: sum of single-triangle states.
        total = np.zeros_like(ups)
        for t in range(state.n_triangles):
            total += vertex_updates(restrict_to_triangles(state, slice(t, t + 1)), cfg)
        assert np.allclose(total, ups, atol=1e-12)


def _single_triangle_energy(state, cfg, t=0):
    return total_energy(restrict_to_triangles(state, slice(t, t + 1)), cfg)


def test_step_against_update_decreases_energy_finite_difference():
    # Spec-level check: strict decrease of the per-triangle term for a small
    # step along the negative contribution (harmonic, and spring with A > R).
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 1000:
        state = random_nondegenerate_state(rng)
        areas = state.areas()
        t = int(rng.integers(state.n_triangles))
        if areas[t] < 1e-3:
            continue
        cfg = (
            EnergyConfig()
            if checked % 2 == 0
            else EnergyConfig("spring", k=1.5, R=float(areas[t]) * 0.5)
        )
        one = restrict_to_triangles(state, slice(t, t + 1))
        ups = vertex_updates(one, cfg)
        v = int(one.tri_vertices[0, rng.integers(3)])
        if np.linalg.norm(ups[v]) < 1e-9:
            continue
        e0 = total_energy(one, cfg)
        h = 1e-6
        moved = one.copy()
        moved.positions = one.positions.copy()
        moved.positions[v] = normalize(one.positions[v] - h * ups[v])
        e1 = total_energy(moved, cfg)
        assert e1 < e0, f"triangle {t}: energy rose from {e0} to {e1}"
        checked += 1


def test_octant_vertex_step_shrinks_area():
    state, _, _, _ = octahedron_setup()
    state.windings[:] = 0
    # Make triangle 0 the octant triangle with interior barycenter.
    tri = state.tri_vertices[0]
    state.positions[tri[0]] = [1.0, 0.0, 0.0]
    state.positions[tri[1]] = [0.0, 1.0, 0.0]
    state.positions[tri[2]] = [0.0, 0.0, 1.0]
    corners = state.corner_positions()
    state.barycenters = update_barycenter(
        corners[:, 0], corners[:, 1], corners[:, 2], corners.sum(axis=1)
    )
    state.orientations = geometric_orientations(state)
    one = restrict_to_triangles(state, slice(0, 1))
    ups = vertex_updates(one, EnergyConfig())
    for v in tri:
        h = 1e-6
        before = float(one.areas()[0])
        fwd = one.copy()
        fwd.positions = one.positions.copy()
        fwd.positions[v] = normalize(one.positions[v] - h * ups[v])
        bwd = one.copy()
        bwd.positions = one.positions.copy()
        bwd.positions[v] = normalize(one.positions[v] + h * ups[v])
        assert float(fwd.areas()[0]) < before < float(bwd.areas()[0])


# ---------------------------------------------------------------------------
# 1D


def test_1d_energies_basic_values():
    state, alpha, sub = circle_initial_state(n=8)
    zero = initial_circular_map(Cochain(1, {}, prime=None), sub)
    assert total_energy_1d(zero, EnergyConfig()) == 0.0
    # One wound edge, endpoints coincident: (1/2)(2 pi)^2.
    assert total_energy_1d(state, EnergyConfig()) == pytest.approx(0.5 * (2 * np.pi) ** 2)


def test_1d_equal_arcs_energy():
    state, alpha, sub = circle_initial_state(n=8)
    n = state.n_vertices
    state.angles = 2.0 * np.pi * np.arange(n) / n
    # Recompute windings so each consecutive arc is the short way around.
    state.windings[:] = 0
    arcs = np.abs(state.signed_arcs())
    assert np.allclose(arcs, 2 * np.pi / n)
    assert total_energy_1d(state, EnergyConfig()) == pytest.approx(n * 0.5 * (2 * np.pi / n) ** 2)
    cfg = EnergyConfig("spring", k=1.0, R=2 * np.pi / n)
    assert total_energy_1d(state, cfg) == pytest.approx(0.0, abs=1e-20)
    assert np.allclose(vertex_updates_1d(state, cfg), 0.0, atol=1e-12)


def test_1d_symmetric_configuration_zero_updates():
    state, alpha, sub = circle_initial_state(n=8)
    n = state.n_vertices
    state.angles = 2.0 * np.pi * np.arange(n) / n
    state.windings[:] = 0
    ups = vertex_updates_1d(state, EnergyConfig())
    assert np.allclose(ups, 0.0, atol=1e-12)


def test_1d_long_edge_pulls_endpoints_together():
    state, alpha, sub = circle_initial_state(n=8)
    n = state.n_vertices
    angles = 2.0 * np.pi * np.arange(n) / n
    angles[0] -= 0.3  # stretch the arc between vertex 0 and vertex 1
    state.angles = angles
    state.windings[:] = 0
    cfg = EnergyConfig()
    e0 = total_energy_1d(state, cfg)
    ups = vertex_updates_1d(state, cfg)
    h = 1e-6
    trial = state.copy()
    trial.angles = state.angles - h * ups
    assert total_energy_1d(trial, cfg) < e0
