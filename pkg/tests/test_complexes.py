import numpy as np
import pytest

from cohomap import build_vr, build_vr_from_points, enclosing_radius, load_complex
from cohomap.complexes import pairwise_distances, validate_distance_matrix
from oracles import octahedron_points, tetrahedron_boundary_description


def simplex_set(c, d):
    return {tuple(s) for s in c.simplices[d].tolist()}


def test_three_points_unit_triangle():
    D = np.ones((3, 3)) - np.eye(3)
    c = build_vr(D, max_dim=2, max_scale=1.0)
    assert c.count(0) == 3 and c.count(1) == 3 and c.count(2) == 1
    assert c.value_of((0, 1, 2)) == pytest.approx(1.0)


def test_three_points_below_scale_only_vertices():
    D = np.ones((3, 3)) - np.eye(3)
    c = build_vr(D, max_dim=2, max_scale=0.5)
    assert c.count(0) == 3 and c.count(1) == 0 and c.count(2) == 0


def test_octahedron_complex_counts():
    # Circumradius 1: edges sqrt(2) between non-antipodal pairs, diameter 2.
    # Verified against a brute-force distance enumeration.
    pts = octahedron_points()
    D = pairwise_distances(pts)
    close = D[np.triu_indices(6, 1)]
    assert sorted(set(np.round(close, 12))) == [pytest.approx(np.sqrt(2)), pytest.approx(2.0)]
    c = build_vr(D, max_dim=3, max_scale=1.8)
    assert c.count(1) == 12 and c.count(2) == 8 and c.count(3) == 0


def test_vr_value_is_max_edge_value():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(12, 3))
    D = pairwise_distances(pts)
    c = build_vr(D, max_dim=3, max_scale=np.median(D))
    for d in (2, 3):
        for row, val in zip(c.simplices[d].tolist(), c.values[d]):
            edges = [
                D[row[a], row[b]]
                for a in range(len(row))
                for b in range(a + 1, len(row))
            ]
            assert val == pytest.approx(max(edges))


def test_closure_property_random_instances():
    rng = np.random.default_rng(42)
    for _ in range(25):
        pts = rng.normal(size=(rng.integers(4, 9), rng.integers(2, 4)))
        D = pairwise_distances(pts)
        c = build_vr(D, max_dim=3, max_scale=float(rng.uniform(0.5, 2.5)))
        for d in (1, 2, 3):
            idx = c.row_index(d - 1)
            for row, val in zip(c.simplices[d].tolist(), c.values[d]):
                for j in range(d + 1):
                    face = tuple(row[:j] + row[j + 1 :])
                    assert face in idx
                    assert c.values[d - 1][idx[face]] <= val + 1e-12


def test_restrict_monotone_and_endpoints():
    pts = octahedron_points()
    c = build_vr(pairwise_distances(pts), max_dim=3, max_scale=2.0)
    low = c.restrict(0.5)
    assert low.count(0) == 6 and low.count(1) == 0
    full = c.restrict(c.max_value())
    for d in range(4):
        assert simplex_set(full, d) == simplex_set(c, d)
    mid = c.restrict(1.5)
    assert mid.count(1) == 12 and mid.count(2) == 8 and mid.count(3) == 0
    for eps1, eps2 in [(0.3, 1.5), (1.5, 2.0), (0.0, 0.3)]:
        a, b = c.restrict(eps1), c.restrict(eps2)
        for d in range(4):
            assert simplex_set(a, d) <= simplex_set(b, d)


def test_load_complex_tetrahedron_closure():
    c = load_complex(tetrahedron_boundary_description())
    assert c.count(0) == 4 and c.count(1) == 6 and c.count(2) == 4 and c.count(3) == 0
    assert c.value_of((0, 1)) == pytest.approx(1.0)


def test_load_complex_inserts_missing_edges_at_triangle_value():
    c = load_complex([{"vertices": [2, 0, 1], "value": 3.5}])
    assert simplex_set(c, 1) == {(0, 1), (0, 2), (1, 2)}
    assert all(v == pytest.approx(3.5) for v in c.values[1])


def test_load_complex_rejects_inconsistent_filtration():
    desc = [
        {"vertices": [0, 1], "value": 2.0},
        {"vertices": [0, 1, 2], "value": 1.0},
    ]
    with pytest.raises(ValueError, match=r"\(0, 1\)"):
        load_complex(desc)


def test_distance_matrix_validation():
    with pytest.raises(ValueError):
        validate_distance_matrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        validate_distance_matrix(np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ValueError):
        validate_distance_matrix(-np.ones((2, 2)) + np.eye(2))


def test_filtration_order_faces_first():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2], [0.5, 0.2]])
    c = build_vr_from_points(pts, max_dim=3, max_scale=2.0)
    dims, rows = c.filtration_order()
    seen = set()
    for d, r in zip(dims.tolist(), rows.tolist()):
        simplex = tuple(c.simplices[d][r])
        for j in range(d + 1):
            face = simplex[:j] + simplex[j + 1 :]
            if face:
                assert face in seen
        seen.add(simplex)


def test_enclosing_radius():
    pts = octahedron_points()
    D = pairwise_distances(pts)
    assert enclosing_radius(D) == pytest.approx(2.0)
