"""Circle- and sphere-valued coordinates for point clouds via persistent cohomology."""

__version__ = "0.1.0"

from .complexes import (
    FilteredComplex,
    build_vr,
    build_vr_from_points,
    enclosing_radius,
    load_complex,
    pairwise_distances,
    validate_distance_matrix,
)
from .cohomology import (
    Bar,
    Barcode,
    Cochain,
    coboundary,
    cocycle_at,
    compute_barcode,
    fundamental_class_signs,
    is_cocycle,
    lift_to_integers,
    pair_with_chain,
    select_bar,
)
from .energy import EnergyConfig, total_energy, total_energy_1d, vertex_updates, vertex_updates_1d
from .errors import NumericalError, TopologyError
from .mapping import (
    CircularMapState,
    SphericalMapState,
    extract_coordinates,
    initial_circular_map,
    initial_spherical_map,
    surface_degree,
)
from .optimize import (
    OptimizerConfig,
    RunReport,
    check_homotopy_guard,
    harmonic_representative_1d,
    minimize_circular,
    minimize_spherical,
)
from .postprocess import evaluate_recovery, prune_and_rerun
