import numpy as np
import pytest

from cohomap import build_vr_from_points, compute_barcode, select_bar
from cohomap.complexes import pairwise_distances
from cohomap import synth


def test_generators_are_seed_deterministic():
    # (generator, whether it actually consumes randomness)
    cases = [
        (lambda s: synth.gen_circle(24, 0.05, seed=s), True),
        (lambda s: synth.gen_trefoil(32, seed=s), False),
        (lambda s: synth.gen_curvature_ellipse(40, seed=s), True),
        (lambda s: synth.gen_sphere(32, 0.02, embed_dim=10, seed=s), True),
        (lambda s: synth.gen_ellipsoid(32, seed=s), True),
        (lambda s: synth.gen_two_spheres(16, seed=s), True),
        (lambda s: synth.gen_two_circles(seed=s), False),
        (lambda s: synth.gen_sensor_walk(16, 4, 5, sigma=0.1, seed=s), True),
    ]
    for gen, randomized in cases:
        a, b = gen(123), gen(123)
        for x, y in zip(a, b):
            assert np.array_equal(np.asarray(x), np.asarray(y))
        if randomized:
            other = gen(124)
            assert any(
                not np.array_equal(np.asarray(x), np.asarray(z))
                for x, z in zip(a, other)
            )


def test_circle_generator_octagon():
    pts, truth = synth.gen_circle(8, 0.0, seed=0)
    assert pts.shape == (8, 2)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    assert np.allclose(truth, 2 * np.pi * np.arange(8) / 8)
    noisy, _ = synth.gen_circle(8, 0.1, seed=0)
    assert not np.allclose(np.linalg.norm(noisy, axis=1), 1.0, atol=1e-3)


def test_trefoil_has_one_dominant_h1_bar():
    # The crossings create secondary short cycles, so dominance is a clear
    # maximum rather than a 10x gap (lengths 1.43 vs 0.78 at this sampling).
    pts, truth = synth.gen_trefoil(64)
    c = build_vr_from_points(pts, max_dim=2, max_scale=2.5)
    bc = compute_barcode(c, 1, p=47)
    lengths = sorted((b.length for b in bc.bars), reverse=True)
    assert np.isfinite(lengths[0])
    assert lengths[0] > 1.5 * lengths[1]


def test_orthonormal_embedding_preserves_distances():
    rng = np.random.default_rng(0)
    E = synth.random_orthonormal_embedding(rng, 3, 50)
    assert np.allclose(E.T @ E, np.eye(3), atol=1e-12)

    pts, truth = synth.gen_sphere(40, 0.0, embed_dim=50, seed=1)
    assert pts.shape == (40, 50)
    base, _ = synth.gen_sphere(40, 0.0, seed=1)
    # Same seed, same base sphere: embedded pairwise distances match exactly.
    d_emb = pairwise_distances(pts)
    d_base = pairwise_distances(base)
    assert np.max(np.abs(d_emb - d_base)) < 1e-10


def test_fibonacci_lattice_near_equal_distribution():
    pts = synth.fibonacci_sphere(64)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    D = pairwise_distances(pts)
    np.fill_diagonal(D, np.inf)
    min_dist = D.min()
    # Hexagonal-packing scale: each point owns area 4 pi / n.
    packing = np.sqrt(8 * np.pi / (np.sqrt(3) * 64))
    assert min_dist > 0.75 * packing


def test_curvature_sampling_density_ratio():
    # Density in the parameter t is proportional to kappa * |r'|, giving an
    # end-to-side ratio of a^2/b^2 (computed analytically as the oracle).
    a, b = 2.0, 1.0
    pts, t = synth.gen_curvature_ellipse(20000, a=a, b=b, ambient_dim=2, noise_sigma=0.0, seed=3)
    near_end = np.sum((np.abs(np.cos(t)) > np.cos(0.25)))
    near_side = np.sum(np.abs(np.sin(t)) > np.cos(0.25))
    ratio = near_end / max(near_side, 1)
    assert ratio == pytest.approx((a / b) ** 2, rel=0.3)


def test_curvature_sampling_uniform_when_circular():
    pts, t = synth.gen_curvature_ellipse(20000, a=1.5, b=1.5, ambient_dim=2, seed=4)
    hist, _ = np.histogram(t, bins=16, range=(0, 2 * np.pi))
    assert hist.max() / hist.min() < 1.25


def test_ellipsoid_sphere_case_and_truth_roundtrip():
    from cohomap.geometry import from_azimuth_elevation

    pts, truth = synth.gen_ellipsoid(200, semi_axes=(1.0, 1.0, 1.0), seed=5)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    assert np.allclose(from_azimuth_elevation(truth), pts, atol=1e-12)

    stretched, truth2 = synth.gen_ellipsoid(100, semi_axes=(2.0, 1.0, 1.0), seed=6)
    on_surface = (stretched[:, 0] / 2) ** 2 + stretched[:, 1] ** 2 + stretched[:, 2] ** 2
    assert np.allclose(on_surface, 1.0, atol=1e-12)


def test_two_spheres_modes_and_labels():
    pts, truth, labels = synth.gen_two_spheres(30, mode="disjoint", seed=7)
    assert pts.shape == (60, 3) and labels.sum() == 30
    gap = np.linalg.norm(pts[labels == 1].mean(0) - pts[labels == 0].mean(0))
    assert gap == pytest.approx(4.0, abs=0.5)
    w_pts, _, w_labels = synth.gen_two_spheres(30, mode="wedge", seed=7)
    w_gap = np.linalg.norm(w_pts[w_labels == 1].mean(0) - w_pts[w_labels == 0].mean(0))
    assert w_gap == pytest.approx(2.0, abs=0.5)


def test_two_spheres_have_two_dominant_h2_bars():
    pts, truth, labels = synth.gen_two_spheres(40, mode="disjoint", seed=8)
    c = build_vr_from_points(pts, max_dim=3, max_scale=1.5)
    bc = compute_barcode(c, 2, p=47)
    assert len(bc) == 2
    assert all(not np.isfinite(b.death) for b in bc.bars)  # both survive truncation
    # One representative per sphere: supports do not mix components.
    supports = [set(v for s in b.representative.data for v in s) for b in bc.bars]
    assert any(max(sup) < 40 for sup in supports)
    assert any(min(sup) >= 40 for sup in supports)


def test_two_circles_layout():
    pts, truth, labels = synth.gen_two_circles(24, 12, r_small=0.4, seed=0)
    assert pts.shape == (36, 2)
    assert np.allclose(np.linalg.norm(pts[labels == 0], axis=1), 1.0, atol=1e-12)
    assert np.allclose(np.linalg.norm(pts[labels == 1] - [1.0, 0.0], axis=1), 0.4, atol=1e-12)
    assert np.allclose(truth, np.arctan2(pts[:, 1], pts[:, 0]))


def test_sensor_walk_shapes_and_response_formula():
    from cohomap.geometry import geodesic_distance, from_azimuth_elevation

    S, truth, walk = synth.gen_sensor_walk(16, 3, 5, step=0.1, sigma=0.0, seed=9)
    assert S.shape == (16, 15) and truth.shape == (16, 2) and walk.shape == (15, 3)
    assert np.all(S > 0.0) and np.all(S <= 1.0)
    assert np.allclose(np.linalg.norm(walk, axis=1), 1.0, atol=1e-12)
    # Independent recomputation of a few entries from the walk points.
    sensors = from_azimuth_elevation(truth)
    for j in (0, 7, 15):
        for i in (0, 4, 14):
            assert S[j, i] == pytest.approx(np.exp(-geodesic_distance(walk[i], sensors[j])), abs=1e-12)
    # Consecutive walk points are a geodesic step apart.
    within = geodesic_distance(walk[:-1], walk[1:])
    mask = np.ones(14, bool)
    mask[4::5] = False  # walk boundaries
    assert np.allclose(within[mask], 0.1, atol=1e-9)


def test_sensor_walk_noise_regimes():
    S0, _, _ = synth.gen_sensor_walk(8, 2, 4, sigma=0.0, seed=10)
    S2, _, _ = synth.gen_sensor_walk(8, 2, 4, sigma=0.2, seed=10)
    assert not np.allclose(S0, S2)


def test_generator_input_validation():
    with pytest.raises(ValueError):
        synth.gen_circle(2)
    with pytest.raises(ValueError):
        synth.gen_trefoil(4)
    with pytest.raises(ValueError):
        synth.gen_sphere(3)
    with pytest.raises(ValueError):
        synth.gen_sphere(10, method="bogus")
    with pytest.raises(ValueError):
        synth.gen_two_spheres(10, mode="touching")
    with pytest.raises(ValueError):
        synth.gen_curvature_ellipse(10, a=-1.0)
