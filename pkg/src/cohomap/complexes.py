"""Filtered Vietoris-Rips complexes up to dimension 3, plus direct ingestion.

A simplex is a sorted tuple of vertex indices; its filtration value in a VR
complex is the largest pairwise distance among its vertices.  Ties in the
filtration order are broken by (dimension, lexicographic vertex order) so
reductions and barcodes are reproducible.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


def validate_distance_matrix(D: np.ndarray) -> np.ndarray:
    """Check symmetry, zero diagonal and nonnegativity; returns a float copy.

    The triangle inequality is deliberately not required: VR construction
    accepts any dissimilarity.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(D, D.T, atol=1e-12):
        raise ValueError("distance matrix must be symmetric")
    if not np.allclose(np.diag(D), 0.0, atol=1e-12):
        raise ValueError("distance matrix must have zero diagonal")
    if np.any(D < 0):
        raise ValueError("distance matrix entries must be nonnegative")
    return 0.5 * (D + D.T)


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Euclidean distance matrix of a point cloud shaped (n, d)."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("point cloud must be a nonempty (n, d) array")
    sq = np.sum(X**2, axis=1)
    D2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(D2, 0.0, out=D2)
    D = np.sqrt(D2)
    np.fill_diagonal(D, 0.0)
    return D


@dataclass
class FilteredComplex:
    """Simplices up to dimension 3 with filtration values.

    ``simplices[d]`` is an (m_d, d+1) int array with strictly increasing
    vertex indices per row; ``values[d]`` the matching filtration values.
    Rows within each dimension are sorted by (value, vertex order).  Every
    face of every simplex is present with a value no larger than its
    cofacet's.  Instances are immutable after construction and safe to share.
    """

    n_vertices: int
    simplices: dict[int, np.ndarray] = field(default_factory=dict)
    values: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self._row_index: dict[int, dict[tuple, int]] = {}
        for d in sorted(self.simplices):
            sims = np.asarray(self.simplices[d], dtype=np.int64).reshape(-1, d + 1)
            vals = np.asarray(self.values.get(d, ()), dtype=float).reshape(-1)
            if sims.shape[0] != vals.shape[0]:
                raise ValueError(f"simplex/value count mismatch in dimension {d}")
            order = np.lexsort(tuple(sims[:, i] for i in range(d, -1, -1)) + (vals,))
            self.simplices[d] = sims[order]
            self.values[d] = vals[order]
        for d in range(4):
            self.simplices.setdefault(d, np.zeros((0, d + 1), dtype=np.int64))
            self.values.setdefault(d, np.zeros(0))

    def row_index(self, dim: int) -> dict[tuple, int]:
        """Map sorted vertex tuple -> row within this dimension (cached)."""
        if dim not in self._row_index:
            self._row_index[dim] = {
                tuple(row): i for i, row in enumerate(self.simplices[dim].tolist())
            }
        return self._row_index[dim]

    def count(self, dim: int) -> int:
        return self.simplices[dim].shape[0]

    @property
    def max_dim(self) -> int:
        return max((d for d in range(4) if self.count(d) > 0), default=0)

    def max_value(self) -> float:
        vals = [self.values[d].max() for d in range(4) if self.count(d) > 0]
        return float(max(vals)) if vals else 0.0

    def value_of(self, simplex: tuple) -> float:
        d = len(simplex) - 1
        return float(self.values[d][self.row_index(d)[tuple(simplex)]])

    def facet_rows(self, dim: int) -> np.ndarray:
        """(m_dim, dim+1) array: row i gives, for each omitted-vertex position k,
        the row of the facet in dimension dim-1.  Facet k carries sign (-1)^k."""
        idx = self.row_index(dim - 1)
        sims = self.simplices[dim]
        m, k = sims.shape
        out = np.empty((m, k), dtype=np.int64)
        for i, row in enumerate(sims.tolist()):
            for j in range(k):
                out[i, j] = idx[tuple(row[:j] + row[j + 1 :])]
        return out

    def filtration_order(self):
        """All simplices sorted by (value, dimension, vertex order).

        Returns (dims, rows): parallel int arrays; ``rows`` indexes into the
        per-dimension tables.
        """
        dims_list, rows_list, vals_list = [], [], []
        for d in range(4):
            m = self.count(d)
            if m == 0:
                continue
            dims_list.append(np.full(m, d, dtype=np.int64))
            rows_list.append(np.arange(m, dtype=np.int64))
            vals_list.append(self.values[d])
        dims = np.concatenate(dims_list)
        rows = np.concatenate(rows_list)
        vals = np.concatenate(vals_list)
        # Per-dimension tables are already vertex-sorted within equal values,
        # so a stable sort on (value, dim) yields the full tie-broken order.
        order = np.lexsort((dims, vals))
        return dims[order], rows[order]

    def restrict(self, epsilon: float) -> "FilteredComplex":
        """Subcomplex of simplices with filtration value <= epsilon."""
        if epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        sims, vals = {}, {}
        for d in range(4):
            keep = self.values[d] <= epsilon
            sims[d] = self.simplices[d][keep]
            vals[d] = self.values[d][keep]
        return FilteredComplex(self.n_vertices, sims, vals)


def build_vr(D: np.ndarray, max_dim: int = 2, max_scale: float = np.inf) -> FilteredComplex:
    """Filtered Vietoris-Rips complex from a validated distance matrix.

    A simplex enters when all its pairwise distances are <= max_scale, at
    filtration value equal to its largest pairwise distance (0 for vertices).
    Triangles and tetrahedra are enumerated by common-neighbor intersection
    over the edge list rather than by scanning all tuples.
    """
    if max_dim not in (1, 2, 3):
        raise ValueError("max_dim must be 1, 2 or 3")
    if not max_scale > 0:
        raise ValueError("max_scale must be positive")
    D = validate_distance_matrix(D)
    n = D.shape[0]

    sims = {0: np.arange(n, dtype=np.int64).reshape(-1, 1)}
    vals = {0: np.zeros(n)}

    adj = (D <= max_scale) & ~np.eye(n, dtype=bool)
    ii, jj = np.nonzero(np.triu(adj))
    sims[1] = np.stack([ii, jj], axis=1).astype(np.int64)
    vals[1] = D[ii, jj]

    if max_dim >= 2:
        tris = []
        for i, j in sims[1].tolist():
            ks = np.nonzero(adj[i] & adj[j])[0]
            ks = ks[ks > j]
            for k in ks.tolist():
                tris.append((i, j, k))
        t = np.array(tris, dtype=np.int64).reshape(-1, 3)
        sims[2] = t
        vals[2] = (
            np.maximum(np.maximum(D[t[:, 0], t[:, 1]], D[t[:, 0], t[:, 2]]), D[t[:, 1], t[:, 2]])
            if len(t)
            else np.zeros(0)
        )

    if max_dim >= 3:
        tets = []
        for i, j, k in sims[2].tolist():
            ls = np.nonzero(adj[i] & adj[j] & adj[k])[0]
            ls = ls[ls > k]
            for l in ls.tolist():
                tets.append((i, j, k, l))
        q = np.array(tets, dtype=np.int64).reshape(-1, 4)
        sims[3] = q
        if len(q):
            pair_max = np.zeros(len(q))
            for a in range(4):
                for b in range(a + 1, 4):
                    np.maximum(pair_max, D[q[:, a], q[:, b]], out=pair_max)
            vals[3] = pair_max
        else:
            vals[3] = np.zeros(0)

    return FilteredComplex(n, sims, vals)


def build_vr_from_points(points: np.ndarray, max_dim: int = 2, max_scale: float = np.inf) -> FilteredComplex:
    return build_vr(pairwise_distances(points), max_dim=max_dim, max_scale=max_scale)


def load_complex(description) -> FilteredComplex:
    """FilteredComplex from a list of {"vertices": [...], "value": v} entries.

    Missing faces are auto-inserted at the minimum filtration value of their
    cofaces.  An explicitly listed face with a value larger than one of its
    cofaces is rejected, naming the offending pair.
    """
    if isinstance(description, (str, bytes)):
        description = json.loads(description)
    explicit: dict[tuple, float] = {}
    for entry in description:
        verts = tuple(sorted(int(v) for v in entry["vertices"]))
        if len(set(verts)) != len(verts):
            raise ValueError(f"repeated vertex in simplex {verts}")
        if len(verts) > 4:
            raise ValueError(f"simplex {verts} exceeds dimension 3")
        val = float(entry["value"])
        explicit[verts] = min(explicit.get(verts, np.inf), val)

    values = dict(explicit)
    # Propagate closure top-down so every face exists at <= its cofaces' values.
    for d in (3, 2, 1):
        for simplex in [s for s in list(values) if len(s) == d + 1]:
            val = values[simplex]
            for j in range(d + 1):
                face = simplex[:j] + simplex[j + 1 :]
                if face in explicit and explicit[face] > val:
                    raise ValueError(
                        f"inconsistent filtration: face {face} at {explicit[face]} "
                        f"exceeds coface {simplex} at {val}"
                    )
                values[face] = min(values.get(face, np.inf), val)

    if not values:
        raise ValueError("empty complex description")
    n = max(max(s) for s in values) + 1
    for v in range(n):
        values.setdefault((v,), 0.0)

    sims: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    vals: dict[int, list] = {0: [], 1: [], 2: [], 3: []}
    for simplex, val in values.items():
        d = len(simplex) - 1
        sims[d].append(simplex)
        vals[d].append(val)
    return FilteredComplex(
        n,
        {d: np.array(sims[d], dtype=np.int64).reshape(-1, d + 1) for d in range(4)},
        {d: np.array(vals[d], dtype=float) for d in range(4)},
    )


def enclosing_radius(D: np.ndarray) -> float:
    """min_i max_j D[i, j]: beyond this scale the VR complex is a cone."""
    D = np.asarray(D, dtype=float)
    return float(np.min(np.max(D, axis=1)))
