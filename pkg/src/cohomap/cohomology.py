"""Persistent cohomology over F_p with representative cocycles, and integer lifting.

The barcode computation processes simplices in increasing filtration order and
maintains, per degree, a basis of live cocycles of the current subcomplex (the
dual formulation of the anti-transposed coboundary column reduction; both
produce the same pairing).  When a simplex enters, the live cocycles one
degree down are evaluated on its boundary: if all vanish, the simplex starts a
new cocycle; otherwise the youngest hit cocycle dies and the others are
repaired by pivot elimination.  Representatives come for free: the column
frozen at death restricts to a valid cocycle at every parameter in the bar.

Births and deaths are reported in the homological convention (bar = [value of
creating simplex, value of destroying simplex)), matching standard software.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .complexes import FilteredComplex
from .errors import TopologyError


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    for q in range(2, int(math.isqrt(p)) + 1):
        if p % q == 0:
            return False
    return True


def inverse_table(p: int) -> np.ndarray:
    """inv[i] = i^-1 mod p for 0 < i < p (inv[0] unused).  Requires p < 2**16."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p >= 1 << 16:
        raise ValueError("primes above 2**16 are not supported")
    inv = np.zeros(p, dtype=np.int64)
    inv[1:] = [pow(i, p - 2, p) for i in range(1, p)]
    return inv


@dataclass
class Cochain:
    """Coefficient assignment on simplices of one degree.

    ``prime`` is the field characteristic, or None for integer coefficients.
    Omitted simplices carry coefficient 0; stored coefficients are nonzero
    (and reduced to {0, ..., p-1} over F_p).
    """

    degree: int
    data: dict[tuple, int] = field(default_factory=dict)
    prime: int | None = None

    def __post_init__(self):
        clean = {}
        for simplex, coeff in self.data.items():
            simplex = tuple(int(v) for v in simplex)
            if len(simplex) != self.degree + 1:
                raise ValueError(
                    f"simplex {simplex} has the wrong degree (expected {self.degree})"
                )
            if self.prime is not None:
                coeff = int(coeff) % self.prime
            if coeff != 0:
                clean[simplex] = int(coeff)
        self.data = dict(sorted(clean.items()))

    def __call__(self, simplex) -> int:
        return self.data.get(tuple(simplex), 0)

    def to_vector(self, complex: FilteredComplex) -> np.ndarray:
        vec = np.zeros(complex.count(self.degree), dtype=np.int64)
        idx = complex.row_index(self.degree)
        for simplex, coeff in self.data.items():
            if simplex not in idx:
                raise ValueError(f"simplex {simplex} not in complex")
            vec[idx[simplex]] = coeff
        return vec

    def restrict(self, complex: FilteredComplex) -> "Cochain":
        """Drop coefficients on simplices absent from the given complex."""
        idx = complex.row_index(self.degree)
        return Cochain(
            self.degree,
            {s: c for s, c in self.data.items() if s in idx},
            self.prime,
        )


def coboundary(f: Cochain, complex: FilteredComplex) -> Cochain:
    """(df)(v0..vd) = sum_k (-1)^k f(v0..^vk..vd), mod p when f is over F_p."""
    if f.degree > 2:
        raise ValueError("coboundary supported up to degree 2 inputs")
    d = f.degree + 1
    if complex.count(d) == 0:
        return Cochain(d, {}, f.prime)
    vec = f.to_vector(complex)
    facets = complex.facet_rows(d)
    signs = (-1) ** np.arange(d + 1)
    out = (vec[facets] * signs).sum(axis=1)
    if f.prime is not None:
        out %= f.prime
    sims = complex.simplices[d]
    data = {tuple(sims[i]): int(out[i]) for i in np.nonzero(out)[0]}
    return Cochain(d, data, f.prime)


def is_cocycle(f: Cochain, complex: FilteredComplex) -> bool:
    return not coboundary(f, complex).data


@dataclass
class Bar:
    """One persistence interval with its representative cocycle."""

    dimension: int
    birth: float
    death: float  # np.inf for essential classes
    representative: Cochain

    @property
    def length(self) -> float:
        return self.death - self.birth

    def lifetime_contains(self, epsilon: float, max_value: float | None = None) -> bool:
        if epsilon < self.birth:
            return False
        if np.isinf(self.death):
            return max_value is None or epsilon <= max_value
        return epsilon < self.death


@dataclass
class Barcode:
    dimension: int
    prime: int
    bars: list[Bar] = field(default_factory=list)

    def __len__(self):
        return len(self.bars)

    def alive_at(self, value: float) -> int:
        return sum(1 for b in self.bars if b.birth <= value < b.death)


class _LiveCocycles:
    """Live cocycle columns of one degree, mod p, with slot recycling."""

    def __init__(self, n_rows: int, p: int):
        self.p = p
        self.Z = np.zeros((n_rows, 4), dtype=np.int64)
        self.birth_index = np.zeros(4, dtype=np.int64)
        self.birth_value = np.zeros(4)
        self.cols: list[int] = []  # alive column slots
        self.free: list[int] = [3, 2, 1, 0]

    def _grow(self):
        old = self.Z.shape[1]
        new = max(8, old * 2)
        self.Z = np.hstack([self.Z, np.zeros((self.Z.shape[0], new - old), dtype=np.int64)])
        self.birth_index = np.resize(self.birth_index, new)
        self.birth_value = np.resize(self.birth_value, new)
        self.free.extend(range(new - 1, old - 1, -1))

    def spawn(self, row: int, index: int, value: float):
        if not self.free:
            self._grow()
        col = self.free.pop()
        self.Z[:, col] = 0
        self.Z[row, col] = 1
        self.birth_index[col] = index
        self.birth_value[col] = value
        self.cols.append(col)

    def evaluate(self, facet_rows: np.ndarray, signs: np.ndarray) -> np.ndarray:
        """Values of all live cocycles on the boundary given by facet rows."""
        if not self.cols:
            return np.zeros(0, dtype=np.int64)
        block = self.Z[np.ix_(facet_rows, self.cols)]
        return (signs @ block) % self.p


def compute_barcode(complex: FilteredComplex, dim: int, p: int = 47) -> Barcode:
    """Barcode of PH^dim of the filtered complex, with one representative per bar.

    Requires dim in {1, 2}; death of dim-classes is detected through the
    (dim+1)-simplices present in the complex, so a complex built with
    max_dim < dim+1 reports every dim-class as essential.
    """
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    inv = inverse_table(p)

    live = {q: _LiveCocycles(complex.count(q), p) for q in range(dim + 1)}
    facets = {
        d: complex.facet_rows(d)
        for d in range(1, dim + 2)
        if complex.count(d) > 0
    }
    signs = {d: (-1) ** np.arange(d + 1) for d in range(1, dim + 2)}

    def freeze(q: int, col: int) -> Cochain:
        column = live[q].Z[:, col]
        rows = np.nonzero(column)[0]
        sims = complex.simplices[q]
        return Cochain(q, {tuple(sims[r]): int(column[r]) for r in rows}, p)

    bars: list[Bar] = []
    dims, rows = complex.filtration_order()
    for index in range(len(dims)):
        d = int(dims[index])
        r = int(rows[index])
        if d > dim + 1:
            continue
        value = float(complex.values[d][r])
        if d == 0:
            live[0].spawn(r, index, value)
            continue
        q = d - 1
        lc = live[q]
        ev = lc.evaluate(facets[d][r], signs[d])
        nz = np.nonzero(ev)[0]
        if nz.size == 0:
            if d <= dim:
                live[d].spawn(r, index, value)
            continue
        hit_cols = [lc.cols[i] for i in nz.tolist()]
        pivot_pos = int(np.argmax(lc.birth_index[hit_cols]))
        pivot = hit_cols[pivot_pos]
        cp_inv = int(inv[int(ev[nz[pivot_pos]])])
        others = [c for c in hit_cols if c != pivot]
        if others:
            coeffs = (ev[nz] * cp_inv) % p
            coeffs = np.array(
                [coeffs[i] for i, c in enumerate(hit_cols) if c != pivot], dtype=np.int64
            )
            lc.Z[:, others] = (lc.Z[:, others] - np.outer(lc.Z[:, pivot], coeffs)) % p
        birth = float(lc.birth_value[pivot])
        if q == dim and value > birth:
            bars.append(Bar(q, birth, value, freeze(q, pivot)))
        lc.cols.remove(pivot)
        lc.free.append(pivot)

    lc = live[dim]
    for col in lc.cols:
        bars.append(Bar(dim, float(lc.birth_value[col]), np.inf, freeze(dim, col)))

    bars.sort(key=lambda b: (b.birth, b.death, sorted(b.representative.data)))
    return Barcode(dim, p, bars)


def select_bar(barcode: Barcode, strategy="longest") -> Bar:
    """Pick a bar: 'longest' (default), 'shortest', integer k (k-th longest),
    or a (birth, death) pair.  Length ties are broken by earlier birth."""
    if not barcode.bars:
        raise TopologyError(f"no feature in dimension {barcode.dimension}")
    by_length = sorted(barcode.bars, key=lambda b: (-b.length, b.birth))
    if strategy == "longest":
        return by_length[0]
    if strategy == "shortest":
        return by_length[-1]
    if isinstance(strategy, int) and not isinstance(strategy, bool):
        if not 0 <= strategy < len(by_length):
            raise TopologyError(
                f"bar index {strategy} out of range ({len(by_length)} bars)"
            )
        return by_length[strategy]
    if isinstance(strategy, (tuple, list)) and len(strategy) == 2:
        birth, death = float(strategy[0]), float(strategy[1])
        for b in barcode.bars:
            if abs(b.birth - birth) < 1e-9 and (
                (np.isinf(death) and np.isinf(b.death)) or abs(b.death - death) < 1e-9
            ):
                return b
        raise TopologyError(f"no bar with (birth, death) = ({birth}, {death})")
    raise ValueError(f"unknown bar selection strategy: {strategy!r}")


def cocycle_at(bar: Bar, complex: FilteredComplex, epsilon: float) -> Cochain:
    """Representative restricted to X_epsilon, verified to be a cocycle there."""
    if not bar.lifetime_contains(epsilon, complex.max_value()):
        raise ValueError(
            f"epsilon = {epsilon} is outside the bar's lifetime "
            f"[{bar.birth}, {bar.death})"
        )
    sub = complex.restrict(epsilon)
    restricted = bar.representative.restrict(sub)
    if not is_cocycle(restricted, sub):
        raise TopologyError(
            f"representative fails the cocycle condition at epsilon = {epsilon}; "
            "recompute the barcode with a representative valid at this parameter"
        )
    return restricted


def lift_to_integers(alpha_p: Cochain, complex: FilteredComplex) -> Cochain:
    """Replace F_p coefficients by representatives in {-(p-1)/2, ..., (p-1)/2}.

    The result must satisfy the cocycle condition over the integers on every
    (degree+1)-simplex of the complex; if it does not (p-torsion, or a
    coboundary divisible by p), a different prime is the recommended fix.
    """
    p = alpha_p.prime
    if p is None:
        raise ValueError("input cochain must be over F_p")
    if not is_cocycle(alpha_p, complex):
        raise TopologyError("input cochain is not a cocycle over F_p")
    half = (p - 1) // 2
    data = {s: (c if c <= half else c - p) for s, c in alpha_p.data.items()}
    lifted = Cochain(alpha_p.degree, data, prime=None)
    if not is_cocycle(lifted, complex):
        raise TopologyError("integer lift failed; choose a different prime p")
    return lifted


def pair_with_chain(cochain: Cochain, chain: dict[tuple, int]) -> int:
    """Kronecker pairing: sum over simplices of chain coefficient * cochain value."""
    return sum(coeff * cochain(simplex) for simplex, coeff in chain.items())


def fundamental_class_signs(faces) -> dict[tuple, int]:
    """Signs eps_f with boundary(sum eps_f . f) = 0 for a closed surface's faces.

    Faces are 2-simplices given as sorted vertex tuples; every edge must bound
    exactly two of them.  Signs are propagated from the lexicographically first
    face; a consistency clash means the surface is non-orientable.
    """
    faces = [tuple(sorted(int(v) for v in f)) for f in faces]
    if len(set(faces)) != len(faces):
        raise ValueError("repeated face")

    def boundary_coeffs(face):
        out = {}
        for j in range(3):
            edge = face[:j] + face[j + 1 :]
            out[edge] = (-1) ** j
        return out

    edge_to_faces: dict[tuple, list] = {}
    coeffs = {f: boundary_coeffs(f) for f in faces}
    for f in faces:
        for e in coeffs[f]:
            edge_to_faces.setdefault(e, []).append(f)
    for e, fs in edge_to_faces.items():
        if len(fs) != 2:
            raise ValueError(f"edge {e} bounds {len(fs)} faces; not a closed surface")

    signs: dict[tuple, int] = {}
    ordered = sorted(faces)
    for start in ordered:
        if start in signs:
            continue
        signs[start] = 1
        stack = [start]
        while stack:
            f = stack.pop()
            for e, cf in coeffs[f].items():
                g = next(x for x in edge_to_faces[e] if x != f)
                want = -signs[f] * cf * coeffs[g][e]
                if g in signs:
                    if signs[g] != want:
                        raise ValueError("surface is non-orientable")
                else:
                    signs[g] = want
                    stack.append(g)

    # Verify: the signed boundary must cancel on every edge.
    total: dict[tuple, int] = {}
    for f in faces:
        for e, cf in coeffs[f].items():
            total[e] = total.get(e, 0) + signs[f] * cf
    if any(v != 0 for v in total.values()):
        raise ValueError("orientation propagation failed to close the cycle")
    return signs
