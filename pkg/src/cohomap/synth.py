"""Seed-deterministic generators for the synthetic experiments.

Each generator returns numpy arrays: a point cloud plus a ground-truth table
in matching row order (plus labels where relevant).  Identical seeds give
bit-identical output.
"""
from __future__ import annotations

import numpy as np

from . import geometry

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def _rng(seed):
    return np.random.default_rng(seed)


def random_orthonormal_embedding(rng, d_from: int, d_to: int) -> np.ndarray:
    """(d_to, d_from) matrix with orthonormal columns: an isometry R^d_from -> R^d_to."""
    if d_to < d_from:
        raise ValueError("embedding dimension must not shrink")
    M = rng.normal(size=(d_to, d_from))
    Q, R = np.linalg.qr(M)
    return Q * np.sign(np.diag(R))


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly-equally distributed unit vectors (Fibonacci lattice)."""
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    az = GOLDEN_ANGLE * i
    return np.stack([r * np.cos(az), r * np.sin(az), z], axis=1)


def gen_circle(n: int, noise_sigma: float = 0.0, seed=0):
    """Evenly spaced points on the unit circle with isotropic Gaussian noise.

    Returns (points (n,2), truth angles (n,))."""
    if n < 3:
        raise ValueError("need at least 3 points")
    rng = _rng(seed)
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack([np.cos(t), np.sin(t)], axis=1)
    if noise_sigma > 0:
        pts = pts + rng.normal(scale=noise_sigma, size=pts.shape)
    return pts, t


def gen_trefoil(n: int, seed=0):
    """Trefoil knot in R^3 sampled at equal parameter steps; truth = parameter."""
    if n < 8:
        raise ValueError("need at least 8 points")
    t = 2.0 * np.pi * np.arange(n) / n
    pts = np.stack(
        [np.sin(t) + 2.0 * np.sin(2.0 * t), np.cos(t) - 2.0 * np.cos(2.0 * t), -np.sin(3.0 * t)],
        axis=1,
    )
    return pts, t


def gen_curvature_ellipse(
    n: int,
    a: float = 2.0,
    b: float = 1.0,
    ambient_dim: int = 50,
    noise_sigma: float = 0.0,
    seed=0,
):
    """Ellipse sampled at a rate proportional to its curvature, isometrically
    embedded in a high dimension, with Gaussian noise added in that space.

    Sampling density per unit arc length is kappa(t); in the parameter t that
    is kappa(t) |r'(t)| = a b / (a^2 sin^2 t + b^2 cos^2 t), inverted through
    a 10^4-bin discretized CDF with stratified uniforms.  Returns
    (points (n, ambient_dim), truth parameters (n,)).
    """
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    if ambient_dim < 2:
        raise ValueError("ambient dimension must be at least 2")
    rng = _rng(seed)
    grid = np.linspace(0.0, 2.0 * np.pi, 10_001)
    density = a * b / (a**2 * np.sin(grid) ** 2 + b**2 * np.cos(grid) ** 2)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    u = (np.arange(n) + rng.random(n)) / n
    t = np.interp(u, cdf, grid)
    plane = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
    E = random_orthonormal_embedding(rng, 2, ambient_dim)
    pts = plane @ E.T
    if noise_sigma > 0:
        pts = pts + rng.normal(scale=noise_sigma, size=pts.shape)
    return pts, t


def gen_sphere(
    n: int,
    noise_sigma: float = 0.0,
    method: str = "fibonacci",
    embed_dim: int | None = None,
    seed=0,
):
    """Points on the unit sphere (Fibonacci lattice or uniform), optionally
    embedded into a higher dimension by a random orthonormal map, with
    isotropic Gaussian noise added in the final space.

    Returns (points, truth (azimuth, elevation))."""
    if n < 4:
        raise ValueError("need at least 4 points")
    rng = _rng(seed)
    if method == "fibonacci":
        base = fibonacci_sphere(n)
    elif method == "uniform-random":
        base = geometry.normalize(rng.normal(size=(n, 3)))
    else:
        raise ValueError("method must be 'fibonacci' or 'uniform-random'")
    truth = geometry.to_azimuth_elevation(base)
    pts = base
    if embed_dim is not None:
        E = random_orthonormal_embedding(rng, 3, embed_dim)
        pts = pts @ E.T
    if noise_sigma > 0:
        pts = pts + rng.normal(scale=noise_sigma, size=pts.shape)
    return pts, truth


def gen_ellipsoid(n: int, semi_axes=(2.0, 1.0, 1.0), seed=0):
    """Area-proportional sample of an ellipsoid surface by rejection against
    the surface-area density; truth = (azimuth, elevation) of the unit-sphere
    preimage."""
    a, b, c = (float(x) for x in semi_axes)
    if min(a, b, c) <= 0:
        raise ValueError("semi-axes must be positive")
    rng = _rng(seed)
    m_max = max(a * b, b * c, a * c)
    out = np.empty((n, 3))
    pre = np.empty((n, 3))
    got = 0
    while got < n:
        u = geometry.normalize(rng.normal(size=(2 * (n - got) + 8, 3)))
        m = np.sqrt(
            (b * c * u[:, 0]) ** 2 + (a * c * u[:, 1]) ** 2 + (a * b * u[:, 2]) ** 2
        )
        accept = rng.random(len(u)) < m / m_max
        take = u[accept][: n - got]
        pre[got : got + len(take)] = take
        out[got : got + len(take)] = take * np.array([a, b, c])
        got += len(take)
    return out, geometry.to_azimuth_elevation(pre)


def gen_two_spheres(n_each: int, mode: str = "disjoint", seed=0):
    """Two unit spheres, centers 4 apart (disjoint) or 2 apart (wedge: tangent
    at one point).  Returns (points, truth azel per own sphere, labels)."""
    if n_each < 4:
        raise ValueError("need at least 4 points per sphere")
    if mode not in ("disjoint", "wedge"):
        raise ValueError("mode must be 'disjoint' or 'wedge'")
    rng = _rng(seed)
    separation = 4.0 if mode == "disjoint" else 2.0
    first = geometry.normalize(rng.normal(size=(n_each, 3)))
    second = geometry.normalize(rng.normal(size=(n_each, 3)))
    pts = np.vstack([first, second + np.array([separation, 0.0, 0.0])])
    truth = np.vstack(
        [geometry.to_azimuth_elevation(first), geometry.to_azimuth_elevation(second)]
    )
    labels = np.concatenate([np.zeros(n_each, dtype=np.int64), np.ones(n_each, dtype=np.int64)])
    return pts, truth, labels


def gen_two_circles(n_big: int = 24, n_small: int = 12, r_small: float = 0.4, seed=0):
    """A unit circle plus a smaller circle centered on its circumference.

    Returns (points, truth angles about the origin, labels)."""
    if n_big < 3 or n_small < 3:
        raise ValueError("need at least 3 points per circle")
    tb = 2.0 * np.pi * np.arange(n_big) / n_big
    ts = 2.0 * np.pi * np.arange(n_small) / n_small
    big = np.stack([np.cos(tb), np.sin(tb)], axis=1)
    small = np.stack([1.0 + r_small * np.cos(ts), r_small * np.sin(ts)], axis=1)
    pts = np.vstack([big, small])
    truth = np.arctan2(pts[:, 1], pts[:, 0])
    labels = np.concatenate([np.zeros(n_big, dtype=np.int64), np.ones(n_small, dtype=np.int64)])
    return pts, truth, labels


def gen_sensor_walk(
    n_sensors: int = 64,
    n_walks: int = 25,
    walk_len: int = 25,
    step: float = 0.1,
    sigma: float = 0.0,
    seed=0,
):
    """Fibonacci-lattice sensors observing random geodesic walks on the sphere.

    Each walk starts at a uniform point and takes geodesic steps of the given
    length in fresh uniformly random tangent directions.  Sensor j's response
    to walk point x is exp(-geodesic(x, sensor_j)) plus Gaussian noise.  The
    data points are the sensors, one feature per walk step: returns
    (features (n_sensors, n_walks*walk_len), truth azel (n_sensors, 2),
    walk points (n_walks*walk_len, 3)).
    """
    rng = _rng(seed)
    sensors = fibonacci_sphere(n_sensors)
    walk_points = np.empty((n_walks * walk_len, 3))
    row = 0
    for _ in range(n_walks):
        x = geometry.normalize(rng.normal(size=3))
        for _ in range(walk_len):
            t = geometry.tangent_project(x, rng.normal(size=3))
            t = t / np.linalg.norm(t)
            x = np.cos(step) * x + np.sin(step) * t
            walk_points[row] = x
            row += 1
    D = geometry.geodesic_distance(walk_points[:, None, :], sensors[None, :, :])
    S = np.exp(-D)
    if sigma > 0:
        S = S + rng.normal(scale=sigma, size=S.shape)
    return S.T.copy(), geometry.to_azimuth_elevation(sensors), walk_points
