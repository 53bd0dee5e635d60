"""Alternating gradient-descent / approximate-Moebius energy minimization.

Each iteration moves vertices in their tangent planes against the per-vertex
update field, renormalizes to the sphere, refreshes tracked barycenters by the
pole rule, and (after a warmup of gradient-only iterations) shifts everything
toward zero center of mass and renormalizes again -- the iterated
approximation of the exact mass-centering Moebius transformation.

Per-iteration displacements are clamped and checked: keeping every vertex and
barycenter displacement under 2 guarantees successive maps are never pointwise
antipodal, hence homotopic, so the topological content of the initial map is
preserved by construction rather than by hope.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .cohomology import Cochain
from .complexes import FilteredComplex
from .energy import EnergyConfig, total_energy, total_energy_1d, vertex_updates, vertex_updates_1d
from .errors import NumericalError
from .mapping import CircularMapState, SphericalMapState

ENERGY_WINDOW = 10
ANTIPODAL_BOUND = 2.0
OPEN_TOL = 1e-9
# A det[u,v,w] sign change with the minor excess this close to zero is a
# genuine face eversion (Jacobian sign flip); near 2 pi it is a hemisphere
# transit (no flip).  Orientation state only ever flips at eversions, and a
# det value below the confidence floor is treated as unsigned noise (corners
# nearly coincident or coplanar) rather than as a crossing.
EVERSION_MARGIN = 1.0
DET_FLOOR = 1e-9
# Hard per-substep cap on any face's signed-area change; a continuous motion
# under the displacement clamp stays well below it, a filling teleport is ~4 pi.
JUMP_CAP = np.pi
LABEL_HOP_CAP = 1.0
MAX_HALVINGS = 20


@dataclass
class OptimizerConfig:
    delta_g: float = 0.05
    delta_m: float = 0.1
    warmup: int = 50
    max_iters: int = 5000
    tol_energy: float = 1e-6
    tol_center: float = 1e-3
    max_step: float = 1.0

    def __post_init__(self):
        if self.delta_g <= 0 or self.delta_m <= 0:
            raise ValueError("step sizes must be positive")
        if self.warmup < 1:
            raise ValueError("warmup must be at least 1")
        if not 0 < self.max_step < ANTIPODAL_BOUND:
            raise ValueError("max_step must lie in (0, 2)")


@dataclass
class RunReport:
    iterations: int = 0
    energy_trace: list = field(default_factory=list)
    final_center_norm: float = float("nan")
    max_displacement: float = 0.0
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_energy": self.energy_trace[-1] if self.energy_trace else None,
            "final_center_norm": self.final_center_norm,
            "max_displacement": self.max_displacement,
            "converged": self.converged,
            "energy_trace": list(self.energy_trace),
        }


def check_homotopy_guard(before: np.ndarray, after: np.ndarray, max_step: float = ANTIPODAL_BOUND) -> bool:
    """True iff every pointwise Euclidean displacement is < max_step (< 2)."""
    if np.shape(before) != np.shape(after):
        raise ValueError("position arrays must have matching shapes")
    if len(np.shape(before)) == 1:
        return bool(np.all(np.abs(np.subtract(after, before)) < max_step))
    disp = np.linalg.norm(np.subtract(after, before), axis=-1)
    return bool(np.all(disp < max_step))


def _max_displacement(before, after) -> float:
    d = np.linalg.norm(np.subtract(after, before), axis=-1)
    return float(d.max()) if d.size else 0.0


def _clamp_rows(step: np.ndarray, cap: float) -> np.ndarray:
    norms = np.linalg.norm(step, axis=-1, keepdims=True)
    scale = np.where(norms > cap, cap / np.where(norms > 0, norms, 1.0), 1.0)
    return step * scale


def _energy_window_converged(trace, tol) -> bool:
    if len(trace) <= ENERGY_WINDOW:
        return False
    old, new = trace[-1 - ENERGY_WINDOW], trace[-1]
    return abs(new - old) <= tol * max(abs(old), 1e-30)


class _TrialState:
    """One candidate move of the state, with the evolved per-face tracking.

    ``mobius_center`` switches the barycenter update from the pole rule (a
    gradient substep) to the shift-and-renormalize rule (a Moebius substep).
    The orientation state flips only where a face everted: det[u,v,w]
    changed sign with the minor excess near zero.  A det flip near excess
    2 pi is a hemisphere transit (the filled region crossing half the
    sphere), where the barycenter side test hands the area formula over
    between the two complementary regions continuously.
    """

    def __init__(
        self,
        state: SphericalMapState,
        new_positions: np.ndarray,
        prev_excess: np.ndarray,
        prev_det: np.ndarray,
        mobius_center: np.ndarray | None = None,
        delta_m: float = 0.0,
    ):
        self.positions = new_positions
        corners = new_positions[state.tri_vertices]

        wound = state.windings != 0
        opened = np.zeros(state.n_triangles, dtype=bool)
        if np.any(wound):
            spread = np.maximum(
                np.linalg.norm(corners[:, 0] - corners[:, 1], axis=1),
                np.maximum(
                    np.linalg.norm(corners[:, 0] - corners[:, 2], axis=1),
                    np.linalg.norm(corners[:, 1] - corners[:, 2], axis=1),
                ),
            )
            opened = wound & (spread > OPEN_TOL)
        self.windings = np.where(opened, 0, state.windings)
        still_wound = wound & ~opened

        if mobius_center is None:
            bary = geometry.update_barycenter(
                corners[:, 0], corners[:, 1], corners[:, 2], state.barycenters
            )
            bary[still_wound] = state.barycenters[still_wound]
        else:
            bary = geometry.normalize(state.barycenters - delta_m * mobius_center)
        self.barycenters = bary

        excess, det = geometry.excess_and_orientation(corners[:, 0], corners[:, 1], corners[:, 2])
        self.excess, self.det = excess, det

        orientations = state.orientations.copy()
        confident = (np.abs(prev_det) > DET_FLOOR) & (np.abs(det) > DET_FLOOR)
        fresh = (orientations == 0) & (np.abs(det) > DET_FLOOR) & (self.windings == 0)
        orientations[fresh] = np.sign(det[fresh]).astype(np.int8)
        everted = (
            confident
            & (prev_det * det < 0.0)
            & (np.minimum(prev_excess, excess) < EVERSION_MARGIN)
        )
        orientations[everted & (self.windings == 0) & ~opened] *= -1
        self.orientations = orientations

        minor = np.sum(bary * (corners[:, 0] + corners[:, 1] + corners[:, 2]), axis=-1) > 0.0
        self.minor_side = minor
        area = np.where(minor, excess, geometry.FOUR_PI - excess)
        self.area = np.where(
            self.windings != 0, geometry.FOUR_PI * np.abs(self.windings), area
        )
        self.signed = np.where(
            self.windings != 0, geometry.FOUR_PI * self.windings, orientations * area
        )

    def energy(self, cfg) -> float:
        m = cfg.magnitudes(self.area)
        return float(0.5 * np.sum(m * m))

    def commit(self, state: SphericalMapState):
        state.positions = self.positions
        state.barycenters = self.barycenters
        state.windings = self.windings
        state.orientations = self.orientations


def _tear(prev_signed, prev_excess, prev_det, prev_minor, prev_windings, trial: _TrialState) -> bool:
    """True if some face's signed area jumped past the continuity cap.

    Also rejects area drift of a face that still carries most of the sphere
    while its corner triple sits below the det resolution floor: its excess
    is numerical noise there, and letting it pulse would ratchet the carried
    area away without any representable eversion.  Faces leaving a
    |winding| >= 2 wound state are exempt: the tracked state space cannot
    represent multiply-wound fillings, so their opening is a known
    4 pi (|w| - 1) discontinuity.
    """
    legit_open = (prev_windings != 0) & (trial.windings == 0)
    jump = np.abs(trial.signed - prev_signed)
    size_tear = jump > JUMP_CAP
    sub_resolution = (
        (np.abs(prev_signed) > 2.0 * np.pi)
        & (np.maximum(np.abs(prev_det), np.abs(trial.det)) < DET_FLOOR)
        & (jump > 1e-3)
    )
    # A confident det flip with the excess away from both transit values is a
    # mid-band eversion the orientation state cannot represent; committing it
    # would leak degree through a lune passage.
    min_excess = np.minimum(prev_excess, trial.excess)
    band_flip = (
        (prev_det * trial.det < 0.0)
        & (np.abs(prev_det) > DET_FLOOR)
        & (np.abs(trial.det) > DET_FLOOR)
        & (min_excess > EVERSION_MARGIN)
        & (min_excess < 2.0 * np.pi - EVERSION_MARGIN)
    )
    # The filled region may hand over between the complementary pair only
    # near the hemisphere transit, where the two areas agree; a barycenter
    # side hop anywhere else teleports |4 pi - 2 E| of area.
    label_hop = (prev_minor != trial.minor_side) & (jump > LABEL_HOP_CAP)
    return bool(np.any((size_tear | sub_resolution | band_flip | label_hop) & ~legit_open))


def _require_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NumericalError("non-finite value encountered during optimization")


def minimize_spherical(
    state: SphericalMapState,
    energy: EnergyConfig,
    config: OptimizerConfig = None,
    callback=None,
) -> tuple[SphericalMapState, RunReport]:
    """Run the alternating scheme until the energy stalls over a 10-iteration
    window with the center of mass inside tolerance, or max_iters.

    During warmup (gradient-only iterations) the step is automatically halved
    whenever it would increase the energy, so that stretch of the run is
    non-increasing.  ``callback(state, iteration)`` is invoked after every
    iteration with a read-only view of the evolving state.
    """
    config = config or OptimizerConfig()
    state = state.copy()
    report = RunReport()
    current_energy = total_energy(state, energy)
    report.energy_trace.append(current_energy)
    recent_motion = []

    for iteration in range(1, config.max_iters + 1):
        updates = vertex_updates(state, energy)
        _require_finite(updates)
        prev_signed = state.signed_areas()
        corners = state.corner_positions()
        prev_excess, prev_det = geometry.excess_and_orientation(
            corners[:, 0], corners[:, 1], corners[:, 2]
        )
        prev_minor = state.minor_side()

        # Step halving keeps every gradient substep non-increasing and free
        # of filling tears.  If no acceptable step exists, the move is
        # skipped: at frustrated equilibria (e.g. multi-component data
        # fighting the center-of-mass constraint) freezing is honest, whereas
        # committing a torn step silently changes the homotopy class.
        delta = config.delta_g
        update_scale = float(np.linalg.norm(updates, axis=1).max()) if updates.size else 0.0
        energy_slack = 1e-12 * max(1.0, abs(current_energy))
        motion = 0.0
        trial = None
        for _ in range(MAX_HALVINGS):
            if delta * update_scale < 1e-14:
                trial = None
                break
            step = _clamp_rows(delta * updates, config.max_step)
            cand = _TrialState(
                state, geometry.normalize(state.positions - step), prev_excess, prev_det
            )
            if cand.energy(energy) <= current_energy + energy_slack and not _tear(
                prev_signed, prev_excess, prev_det, prev_minor, state.windings, cand
            ):
                trial = cand
                break
            trial = None
            delta *= 0.5

        if trial is not None:
            _require_finite(trial.positions, trial.barycenters)
            if not check_homotopy_guard(state.positions, trial.positions, config.max_step * (1 + 1e-12)):
                raise NumericalError("homotopy guard violated by a gradient step")
            if not check_homotopy_guard(state.barycenters, trial.barycenters, ANTIPODAL_BOUND):
                raise NumericalError("homotopy guard violated by a barycenter update")
            motion = max(
                _max_displacement(state.positions, trial.positions),
                _max_displacement(state.barycenters, trial.barycenters),
            )
            report.max_displacement = max(report.max_displacement, motion)
            current_energy = trial.energy(energy)
            trial.commit(state)

        if iteration > config.warmup:
            prev_signed = state.signed_areas()
            corners = state.corner_positions()
            prev_excess, prev_det = geometry.excess_and_orientation(
                corners[:, 0], corners[:, 1], corners[:, 2]
            )
            prev_minor = state.minor_side()
            center = state.positions.mean(axis=0)
            center_scale = float(np.linalg.norm(center))
            # The Moebius shift is retried with a halved step if it would tear
            # a filling; when even a vanishing shift tears, it is skipped for
            # this iteration (the squeeze has hit the representable limit).
            delta_m = config.delta_m
            trial = None
            for _ in range(MAX_HALVINGS):
                if delta_m * center_scale < 1e-14:
                    trial = None
                    break
                cand = _TrialState(
                    state,
                    geometry.normalize(state.positions - delta_m * center),
                    prev_excess,
                    prev_det,
                    mobius_center=center,
                    delta_m=delta_m,
                )
                if not _tear(prev_signed, prev_excess, prev_det, prev_minor, state.windings, cand):
                    trial = cand
                    break
                trial = None
                delta_m *= 0.5
            if trial is not None:
                if not check_homotopy_guard(state.positions, trial.positions, ANTIPODAL_BOUND):
                    raise NumericalError("homotopy guard violated by a Moebius step")
                if not check_homotopy_guard(state.barycenters, trial.barycenters, ANTIPODAL_BOUND):
                    raise NumericalError("homotopy guard violated by a Moebius step")
                mobius_motion = max(
                    _max_displacement(state.positions, trial.positions),
                    _max_displacement(state.barycenters, trial.barycenters),
                )
                motion = max(motion, mobius_motion)
                report.max_displacement = max(report.max_displacement, mobius_motion)
                trial.windings = state.windings  # Moebius never opens wound faces
                trial.commit(state)
            current_energy = total_energy(state, energy)

        state.iteration = iteration
        _require_finite(state.positions, [current_energy])
        report.energy_trace.append(current_energy)
        report.iterations = iteration
        recent_motion.append(motion)
        if len(recent_motion) > ENERGY_WINDOW:
            recent_motion.pop(0)
        center_norm = float(np.linalg.norm(state.positions.mean(axis=0)))
        if callback is not None:
            callback(state, iteration)
        if (
            _energy_window_converged(report.energy_trace, config.tol_energy)
            and center_norm < config.tol_center
        ):
            report.converged = True
            break
        # A run pinned by its guards (no substep can move anything) will
        # never progress further; stop burning iterations on it.  Never fires
        # before the Moebius phase has had a window to shake the state loose.
        if (
            iteration > config.warmup + ENERGY_WINDOW
            and len(recent_motion) == ENERGY_WINDOW
            and max(recent_motion) < 1e-11
            and _energy_window_converged(report.energy_trace, config.tol_energy)
        ):
            break

    report.final_center_norm = float(np.linalg.norm(state.positions.mean(axis=0)))
    return state, report


def minimize_circular(
    state: CircularMapState,
    energy: EnergyConfig,
    config: OptimizerConfig = None,
    callback=None,
) -> tuple[CircularMapState, RunReport]:
    """First-order descent on vertex angles; no Moebius updates are needed on
    the circle.  Edge windings are adjusted whenever an arc's principal-branch
    representation crosses the +/-pi cut, keeping signed arcs continuous."""
    config = config or OptimizerConfig()
    state = state.copy()
    report = RunReport()
    current_energy = total_energy_1d(state, energy)
    report.energy_trace.append(current_energy)
    a, b = state.edges[:, 0], state.edges[:, 1]

    for iteration in range(1, config.max_iters + 1):
        updates = vertex_updates_1d(state, energy)
        _require_finite(updates)
        delta = config.delta_g
        for _ in range(40):
            step = np.clip(delta * updates, -config.max_step, config.max_step)
            new_angles = state.angles - step
            old_arcs = state.signed_arcs()
            raw_change = (new_angles[a] - new_angles[b]) - (state.angles[a] - state.angles[b])
            target = old_arcs + raw_change
            new_wind = np.rint(
                (target - geometry.wrap_angle(new_angles[a] - new_angles[b]))
                / (2.0 * np.pi)
            ).astype(np.int64)
            trial = state.copy()
            trial.angles, trial.windings = new_angles, new_wind
            trial_energy = total_energy_1d(trial, energy)
            if trial_energy <= current_energy + 1e-12:
                break
            delta *= 0.5
        _require_finite(new_angles, [trial_energy])

        report.max_displacement = max(
            report.max_displacement,
            float(np.max(2.0 * np.abs(np.sin(0.5 * step)))) if step.size else 0.0,
        )
        state.angles, state.windings = new_angles, new_wind
        state.iteration = iteration
        current_energy = trial_energy
        report.energy_trace.append(current_energy)
        report.iterations = iteration
        if callback is not None:
            callback(state, iteration)
        if _energy_window_converged(report.energy_trace, config.tol_energy):
            report.converged = True
            break

    report.final_center_norm = 0.0
    return state, report


def harmonic_representative_1d(alpha: Cochain, complex: FilteredComplex) -> CircularMapState:
    """Closed-form harmonic minimizer for the circle-valued problem.

    Solves the least-squares problem min || 2 pi alpha - d theta ||^2 over real
    vertex values (graph-Laplacian normal equations, one vertex pinned to 0
    per connected component) and returns the state whose edge arcs equal the
    harmonic real cocycle, with windings adjusted to match.
    """
    from scipy.sparse import csgraph, csr_matrix

    if alpha.degree != 1:
        raise ValueError("need a degree-1 cochain")
    if alpha.prime is not None:
        raise ValueError("need an integer cochain")
    edges = complex.simplices[1]
    n = complex.n_vertices
    target = 2.0 * np.pi * np.array([alpha(tuple(e)) for e in edges.tolist()], dtype=float)

    theta = np.zeros(n)
    if len(edges):
        a, b = edges[:, 0], edges[:, 1]
        adj = csr_matrix((np.ones(len(edges)), (a, b)), shape=(n, n))
        n_comp, labels = csgraph.connected_components(adj, directed=False)
        lap = np.zeros((n, n))
        np.add.at(lap, (a, a), 1.0)
        np.add.at(lap, (b, b), 1.0)
        np.add.at(lap, (a, b), -1.0)
        np.add.at(lap, (b, a), -1.0)
        rhs = np.zeros(n)
        np.add.at(rhs, b, target)
        np.add.at(rhs, a, -target)
        for comp in range(n_comp):
            members = np.nonzero(labels == comp)[0]
            if len(members) < 2:
                continue
            free = members[1:]  # pin the first vertex of the component to 0
            theta[free] = np.linalg.solve(lap[np.ix_(free, free)], rhs[free])

        arcs = target - (theta[b] - theta[a])
    else:
        arcs = target

    angles = np.mod(theta, 2.0 * np.pi)
    windings = np.zeros(len(edges), dtype=np.int64)
    if len(edges):
        principal = geometry.wrap_angle(angles[edges[:, 0]] - angles[edges[:, 1]])
        windings = np.rint((arcs - principal) / (2.0 * np.pi)).astype(np.int64)
    return CircularMapState(
        complex=complex,
        angles=angles,
        edges=edges.copy(),
        windings=windings,
        vertex_ids=np.arange(n, dtype=np.int64),
    )
