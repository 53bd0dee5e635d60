"""Command-line driver: synth, barcode, map, prune, eval.

All numeric output is printed with 12 significant digits and every run is
deterministic given (inputs, flags, seed).  Exit codes: 0 success, 2 usage,
3 topology (no bar / lift failure / broken cocycle), 4 numerical
(non-convergence or non-finite state; partial outputs are still written).
"""
from __future__ import annotations

import argparse
import json
import os
import sys


def _set_thread_cap(n: int | None):
    if n is None:
        n = os.environ.get("COHOMAP_THREADS")
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, str(int(n)))


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) if not isinstance(x, (int, str)) else str(x) for x in row) + "\n")


def _load_table(path):
    import numpy as np

    with open(path) as fh:
        first = fh.readline()
    try:
        [float(x) for x in first.strip().split(",") if x != ""]
        skip = 0
    except ValueError:
        skip = 1
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    return data


def _load_complex_input(args):
    """(complex metadata) from a point-cloud CSV, distance CSV or complex JSON."""
    import numpy as np

    from . import complexes

    if args.input.endswith(".json"):
        with open(args.input) as fh:
            c = complexes.load_complex(json.load(fh))
        return c, None
    table = _load_table(args.input)
    if getattr(args, "distance_matrix", False):
        D = complexes.validate_distance_matrix(table)
    else:
        D = complexes.pairwise_distances(table)
    max_scale = args.max_scale
    if max_scale is None:
        max_scale = complexes.enclosing_radius(D)
    max_dim = args.max_dim
    if max_dim is None:
        max_dim = min(3, args.dim + 1)
    c = complexes.build_vr(D, max_dim=max_dim, max_scale=float(max_scale))
    return c, D


def _barcode_rows(barcode):
    for bar in barcode.bars:
        yield (barcode.dimension, bar.birth, bar.death)


def _cocycle_json(cochain):
    return {",".join(map(str, s)): int(v) for s, v in cochain.data.items()}


def _state_to_json(state):
    c = state.complex
    return {
        "n_vertices": int(c.n_vertices),
        "complex": {
            str(d): {
                "simplices": c.simplices[d].tolist(),
                "values": c.values[d].tolist(),
            }
            for d in range(3)
        },
        "positions": state.positions.tolist(),
        "tri_vertices": state.tri_vertices.tolist(),
        "barycenters": state.barycenters.tolist(),
        "windings": state.windings.tolist(),
        "orientations": state.orientations.tolist(),
        "basepoint": state.basepoint.tolist(),
        "frame": state.frame.tolist(),
        "vertex_ids": state.vertex_ids.tolist(),
        "iteration": int(state.iteration),
    }


def _state_from_json(doc):
    import numpy as np

    from .complexes import FilteredComplex
    from .mapping import SphericalMapState

    sims = {int(d): np.array(v["simplices"], dtype=np.int64).reshape(-1, int(d) + 1)
            for d, v in doc["complex"].items()}
    vals = {int(d): np.array(v["values"], dtype=float) for d, v in doc["complex"].items()}
    complex = FilteredComplex(int(doc["n_vertices"]), sims, vals)
    return SphericalMapState(
        complex=complex,
        positions=np.array(doc["positions"], dtype=float),
        tri_vertices=np.array(doc["tri_vertices"], dtype=np.int64).reshape(-1, 3),
        barycenters=np.array(doc["barycenters"], dtype=float),
        windings=np.array(doc["windings"], dtype=np.int64),
        orientations=np.array(doc["orientations"], dtype=np.int8),
        basepoint=np.array(doc["basepoint"], dtype=float),
        frame=np.array(doc["frame"], dtype=float),
        vertex_ids=np.array(doc["vertex_ids"], dtype=np.int64),
        iteration=int(doc.get("iteration", 0)),
    )


def _parse_bar_strategy(text):
    if text in ("longest", "shortest"):
        return text
    if "," in text:
        birth, death = text.split(",", 1)
        return (float(birth), float("inf") if death.strip() in ("inf", "") else float(death))
    return int(text)


def _write_map_outputs(prefix, state, report, coords_kind):
    import numpy as np

    from .mapping import extract_coordinates

    coords = extract_coordinates(state)
    if coords_kind == "sphere":
        header = ["vertex_id", "azimuth", "elevation"]
        rows = [(int(v), coords[i, 0], coords[i, 1]) for i, v in enumerate(state.vertex_ids)]
    else:
        header = ["vertex_id", "angle"]
        rows = [(int(v), coords[i, 0]) for i, v in enumerate(state.vertex_ids)]
    _write_csv(prefix + ".coords.csv", header, rows)
    with open(prefix + ".report.json", "w") as fh:
        doc = report.to_dict()
        doc["energy_trace"] = [float(_fmt(x)) for x in doc["energy_trace"]]
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    _write_csv(
        prefix + ".trace.csv",
        ["iteration", "energy"],
        [(i, e) for i, e in enumerate(report.energy_trace)],
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args):
    import numpy as np

    from . import synth

    out = args.out or args.generator
    labels = None
    walk = None
    if args.generator == "circle":
        pts, truth = synth.gen_circle(args.n, args.sigma, seed=args.seed)
        truth_header, truth_rows = ["angle"], [(t,) for t in truth]
    elif args.generator == "trefoil":
        pts, truth = synth.gen_trefoil(args.n, seed=args.seed)
        truth_header, truth_rows = ["angle"], [(t,) for t in truth]
    elif args.generator == "ellipse":
        pts, truth = synth.gen_curvature_ellipse(
            args.n, a=args.a, b=args.b, ambient_dim=args.ambient_dim,
            noise_sigma=args.sigma, seed=args.seed,
        )
        truth_header, truth_rows = ["angle"], [(t,) for t in truth]
    elif args.generator == "sphere":
        pts, truth = synth.gen_sphere(
            args.n, args.sigma, method=args.method,
            embed_dim=args.embed_dim, seed=args.seed,
        )
        truth_header = ["azimuth", "elevation"]
        truth_rows = [tuple(r) for r in truth]
    elif args.generator == "ellipsoid":
        pts, truth = synth.gen_ellipsoid(args.n, semi_axes=tuple(args.semi_axes), seed=args.seed)
        truth_header = ["azimuth", "elevation"]
        truth_rows = [tuple(r) for r in truth]
    elif args.generator == "two-spheres":
        pts, truth, labels = synth.gen_two_spheres(args.n, mode=args.mode, seed=args.seed)
        truth_header = ["azimuth", "elevation"]
        truth_rows = [tuple(r) for r in truth]
    elif args.generator == "two-circles":
        pts, truth, labels = synth.gen_two_circles(
            args.n, args.n_small, r_small=args.r_small, seed=args.seed
        )
        truth_header, truth_rows = ["angle"], [(t,) for t in truth]
    elif args.generator == "sensors":
        pts, truth, walk = synth.gen_sensor_walk(
            args.n, args.n_walks, args.walk_len, step=args.step,
            sigma=args.sigma, seed=args.seed,
        )
        truth_header = ["azimuth", "elevation"]
        truth_rows = [tuple(r) for r in truth]
    else:
        raise ValueError(f"unknown generator {args.generator!r}")

    _write_csv(out + ".points.csv", None, [tuple(r) for r in np.asarray(pts)])
    _write_csv(out + ".truth.csv", truth_header, truth_rows)
    if labels is not None:
        _write_csv(out + ".labels.csv", ["label"], [(int(l),) for l in labels])
    print(f"wrote {out}.points.csv ({len(pts)} points)")
    return 0


def cmd_barcode(args):
    from .cohomology import compute_barcode

    c, _ = _load_complex_input(args)
    barcode = compute_barcode(c, args.dim, p=args.prime)
    out = args.out or os.path.splitext(args.input)[0]
    _write_csv(out + ".barcode.csv", ["dimension", "birth", "death"], _barcode_rows(barcode))
    with open(out + ".cocycles.json", "w") as fh:
        json.dump(
            [
                {"birth": bar.birth, "death": None if bar.death == float("inf") else bar.death,
                 "cocycle": _cocycle_json(bar.representative)}
                for bar in barcode.bars
            ],
            fh, indent=1,
        )
        fh.write("\n")
    print(f"{len(barcode.bars)} bar(s) in dimension {args.dim}; wrote {out}.barcode.csv")
    return 0


def _pipeline_state(args):
    """Shared front of cmd_map: barcode -> bar -> epsilon -> lifted cocycle."""
    import numpy as np

    from .cohomology import cocycle_at, compute_barcode, lift_to_integers, select_bar

    c, _ = _load_complex_input(args)
    barcode = compute_barcode(c, args.dim, p=args.prime)
    bar = select_bar(barcode, _parse_bar_strategy(args.bar))
    if args.epsilon is not None:
        epsilon = args.epsilon
    else:
        death = bar.death if np.isfinite(bar.death) else c.max_value()
        epsilon = 0.5 * (bar.birth + death)
    restricted = c.restrict(epsilon)
    alpha = lift_to_integers(cocycle_at(bar, c, epsilon), restricted)
    print(
        f"selected bar [{_fmt(bar.birth)}, {_fmt(bar.death)}) in dimension {args.dim}; "
        f"epsilon = {_fmt(epsilon)}"
    )
    return restricted, alpha


def _energy_config(args, restricted):
    from .energy import EnergyConfig
    from .geometry import FOUR_PI

    if args.energy == "harmonic":
        return EnergyConfig("harmonic")
    if args.rest == "auto":
        if args.dim == 2:
            rest = FOUR_PI / max(restricted.count(2), 1)
        else:
            rest = 2.0 * 3.141592653589793 / max(restricted.count(1), 1)
    else:
        rest = float(args.rest)
    return EnergyConfig("spring", k=args.k, R=rest)


def _optimizer_config(args):
    from .optimize import OptimizerConfig

    return OptimizerConfig(
        delta_g=args.delta_g,
        delta_m=args.delta_m,
        warmup=args.warmup,
        max_iters=args.max_iters,
        tol_energy=args.tol_energy,
        tol_center=args.tol_center,
        max_step=args.max_step,
    )


def cmd_map(args):
    from .energy import total_energy_1d
    from .mapping import initial_circular_map, initial_spherical_map
    from .optimize import RunReport, harmonic_representative_1d, minimize_circular, minimize_spherical

    restricted, alpha = _pipeline_state(args)
    energy = _energy_config(args, restricted)
    config = _optimizer_config(args)
    out = args.out or os.path.splitext(args.input)[0]

    if args.dim == 2:
        state = initial_spherical_map(alpha, restricted)
        final, report = minimize_spherical(state, energy, config)
        _write_map_outputs(out, final, report, "sphere")
        with open(out + ".state.json", "w") as fh:
            json.dump(_state_to_json(final), fh)
            fh.write("\n")
        kind = "sphere"
    else:
        solver = args.solver
        if solver == "auto":
            solver = "exact" if energy.kind == "harmonic" else "descent"
        if solver == "exact":
            if energy.kind != "harmonic":
                raise ValueError("--solver exact is only defined for harmonic energy")
            final = harmonic_representative_1d(alpha, restricted)
            report = RunReport(iterations=0, energy_trace=[total_energy_1d(final, energy)],
                               final_center_norm=0.0, converged=True)
        else:
            # Spring descent starts from the harmonic representative: the
            # degenerate all-at-basepoint start can fold the map against the
            # spring barrier.  Harmonic descent runs from the canonical lift.
            if energy.kind == "spring":
                start = harmonic_representative_1d(alpha, restricted)
            else:
                start = initial_circular_map(alpha, restricted)
            final, report = minimize_circular(start, energy, config)
        _write_map_outputs(out, final, report, "circle")
        kind = "circle"

    status = "converged" if report.converged else "NOT converged"
    print(
        f"{kind} map: {status} after {report.iterations} iteration(s), "
        f"energy {_fmt(report.energy_trace[-1])}, "
        f"max displacement {_fmt(report.max_displacement)}"
    )
    print(f"wrote {out}.coords.csv, {out}.report.json, {out}.trace.csv")
    return 0 if report.converged else 4


def cmd_prune(args):
    from .postprocess import prune_and_rerun

    with open(args.state) as fh:
        state = _state_from_json(json.load(fh))
    energy = _energy_config(args, state.complex)
    config = _optimizer_config(args)
    final, report = prune_and_rerun(state, energy, config, threshold=args.threshold)
    out = args.out or os.path.splitext(os.path.splitext(args.state)[0])[0] + ".pruned"
    _write_map_outputs(out, final, report, "sphere")
    with open(out + ".state.json", "w") as fh:
        json.dump(_state_to_json(final), fh)
        fh.write("\n")
    kept = final.n_vertices
    print(f"pruned to {kept} vertex(es), {final.n_triangles} triangle(s)")
    return 0 if report.converged else 4


def cmd_eval(args):
    import numpy as np

    from .postprocess import evaluate_recovery

    coords = _load_table(args.coords)
    truth = _load_table(args.truth)
    # coords carry vertex ids in column 0; truth rows are per original point.
    ids = coords[:, 0].astype(int)
    values = coords[:, 1:]
    matched_truth = truth[ids]
    metrics, aligned = evaluate_recovery(values, matched_truth, kind=args.kind)
    out = args.out or os.path.splitext(args.coords)[0]
    with open(out + ".metrics.json", "w") as fh:
        json.dump({k: (float(_fmt(v)) if isinstance(v, float) else v) for k, v in metrics.items()}, fh, indent=1)
        fh.write("\n")
    header = ["vertex_id", "azimuth", "elevation"] if args.kind == "sphere" else ["vertex_id", "angle"]
    _write_csv(out + ".aligned.csv", header, [(int(i),) + tuple(row) for i, row in zip(ids, aligned)])
    print(f"rms_geodesic = {_fmt(metrics['rms_geodesic'])}, max_geodesic = {_fmt(metrics['max_geodesic'])}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_complex_flags(p, default_dim=2):
    p.add_argument("input", help="point-cloud CSV, distance-matrix CSV, or complex JSON")
    p.add_argument("--dim", type=int, default=default_dim, choices=(1, 2), help="feature dimension")
    p.add_argument("--prime", type=int, default=47, help="coefficient field characteristic")
    p.add_argument("--max-scale", type=float, default=None, help="VR truncation scale (default: enclosing radius)")
    p.add_argument("--max-dim", type=int, default=None, choices=(1, 2, 3), help="VR top dimension (default: dim+1)")
    p.add_argument("--distance-matrix", action="store_true", help="treat CSV input as a distance matrix")
    p.add_argument("--out", default=None, help="output prefix")


def _add_energy_flags(p):
    p.add_argument("--energy", choices=("harmonic", "spring"), default="harmonic")
    p.add_argument("--k", type=float, default=1.0, help="spring constant")
    p.add_argument("--rest", default="auto", help="rest area/length, or 'auto' for the equal-share default")


def _add_optimizer_flags(p):
    p.add_argument("--delta-g", type=float, default=0.05, help="gradient step size")
    p.add_argument("--delta-m", type=float, default=0.1, help="Moebius step size")
    p.add_argument("--warmup", type=int, default=50, help="gradient-only iterations before mass centering")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--tol-energy", type=float, default=1e-6, help="relative energy-stall tolerance (10-iteration window)")
    p.add_argument("--tol-center", type=float, default=1e-3, help="center-of-mass norm tolerance")
    p.add_argument("--max-step", type=float, default=1.0, help="per-iteration displacement cap (< 2)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cohomap",
        description="Circle- and sphere-valued coordinates for point clouds via persistent cohomology",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap worker/BLAS threads (env COHOMAP_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("generator", choices=(
        "circle", "trefoil", "ellipse", "sphere", "ellipsoid",
        "two-spheres", "two-circles", "sensors",
    ))
    p.add_argument("-n", type=int, default=64, help="points (per component where applicable)")
    p.add_argument("--sigma", type=float, default=0.0, help="Gaussian noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a", type=float, default=2.0, help="ellipse semi-axis a")
    p.add_argument("--b", type=float, default=1.0, help="ellipse semi-axis b")
    p.add_argument("--ambient-dim", type=int, default=50)
    p.add_argument("--embed-dim", type=int, default=None, help="orthonormal embedding dimension (sphere)")
    p.add_argument("--method", choices=("fibonacci", "uniform-random"), default="fibonacci")
    p.add_argument("--semi-axes", type=float, nargs=3, default=(2.0, 1.0, 1.0))
    p.add_argument("--mode", choices=("disjoint", "wedge"), default="disjoint")
    p.add_argument("--n-small", type=int, default=12, help="small-circle points (two-circles)")
    p.add_argument("--r-small", type=float, default=0.4, help="small-circle radius (two-circles)")
    p.add_argument("--n-walks", type=int, default=25)
    p.add_argument("--walk-len", type=int, default=25)
    p.add_argument("--step", type=float, default=0.1, help="geodesic walk step size")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("barcode", help="compute a persistence barcode with representatives")
    _add_complex_flags(p)
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("map", help="run the full pipeline: barcode, cocycle, lift, minimize")
    _add_complex_flags(p)
    p.add_argument("--bar", default="longest", help="longest | shortest | index k | birth,death")
    p.add_argument("--epsilon", type=float, default=None, help="parameter inside the bar (default: midpoint)")
    p.add_argument("--solver", choices=("auto", "exact", "descent"), default="auto",
                   help="dim-1 solver: explicit harmonic representative or first-order descent")
    _add_energy_flags(p)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("prune", help="drop low-area simplices from a saved state and re-run")
    p.add_argument("state", help="state JSON written by 'map --dim 2'")
    p.add_argument("--threshold", type=float, default=1e-2, help="minimum retained image area")
    p.add_argument("--dim", type=int, default=2, choices=(2,), help=argparse.SUPPRESS)
    _add_energy_flags(p)
    _add_optimizer_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("eval", help="recovery metrics of coordinates against ground truth")
    p.add_argument("coords", help="coords CSV from 'map'")
    p.add_argument("truth", help="truth CSV from 'synth'")
    p.add_argument("--kind", choices=("sphere", "circle"), required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _set_thread_cap(args.threads)

    from .errors import NumericalError, TopologyError

    try:
        return args.func(args)
    except TopologyError as exc:
        print(f"topology error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
