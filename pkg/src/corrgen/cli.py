"""Command-line front end: ``corrgen {generate,sweep,check,synth,export}``.

Each run prints one JSON summary line on stdout; logs go to stderr.
Exit codes: 0 ok, 1 input error, 2 solver failure, 3 corridor violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .corridor import sample_boundary_mesh
from .errors import CorrgenError, InputError, SolverError, UnboundedProblemError
from .optimize import (EigenBoundConfig, ProblemSpec, build_corridor, canonical_formulation,
                       degree_sweep, prepare)
from .projection import WrapperConfig, project_cloud, retained
from .scenes import FIXTURES, KINDS, SceneSpec, generate_scene

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VIOLATION = 0, 1, 2, 3

log = logging.getLogger("corrgen")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; that code means solver failure here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary) + "\n")
    sys.stdout.flush()


def _eigen_bounds(args):
    if args.eigen_min is None and args.eigen_max is None:
        return None
    if args.eigen_min is None or args.eigen_max is None:
        raise InputError("--eigen-min and --eigen-max must be given together")
    return EigenBoundConfig(args.eigen_min, args.eigen_max)


def _inputs(args):
    """Load cloud and path and check the flags agree with them."""
    cloud, cloud_dim = io.read_cloud(args.cloud)
    path = io.load_path(args.path)
    if args.dim == 3 and cloud_dim == 2:
        raise InputError("a planar (x,y) cloud cannot be used with --dim 3")
    if args.dim == 2 and len(cloud) and np.any(cloud[:, 2] != 0.0):
        raise InputError("--dim 2 needs a planar cloud (z = 0)")
    bounds = _eigen_bounds(args)
    if args.dim == 3 and args.wrapper_radius is None and bounds is None:
        raise InputError("--wrapper-radius is required for --dim 3 unless --eigen-min/--eigen-max are given")
    return cloud, path, bounds


def _spec_kwargs(args, bounds):
    kw = {"offset": not args.centered}
    if bounds is not None:
        kw["eigen_bounds"] = bounds
    if args.pd_epsilon is not None:
        kw["pd_epsilon"] = args.pd_epsilon
    if args.feas_tol is not None:
        kw["feas_tol"] = args.feas_tol
    return kw


def cmd_generate(args) -> int:
    cloud, path, bounds = _inputs(args)
    corridor, report = build_corridor(path, cloud, args.degree, wrapper_radius=args.wrapper_radius,
                                      formulation=args.formulation, dimension=args.dim,
                                      samples=args.samples, backend=args.backend,
                                      include_end_caps=args.include_endcaps, **_spec_kwargs(args, bounds))
    io.save_corridor(args.out, corridor)
    summary = report.to_dict()
    summary["out"] = args.out
    if args.mesh:
        if args.dim != 3:
            raise InputError("--mesh is only available for --dim 3")
        io.save_mesh(args.mesh, sample_boundary_mesh(corridor, args.mesh_stations, args.mesh_ring))
        summary["mesh"] = args.mesh
    log.info("corridor written to %s (%s %.6g)", args.out, "area" if args.dim == 2 else "volume",
             report.volume)
    _emit(summary)
    return EXIT_OK


def _parse_degrees(text: str):
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            degrees = list(range(lo, hi + 1))
        else:
            degrees = sorted({int(v) for v in text.split(",")})
    except ValueError:
        raise InputError(f"--degrees expects 'lo:hi' or a comma list, got {text!r}") from None
    if not degrees or min(degrees) < 0:
        raise InputError(f"--degrees {text!r} selects no valid degree")
    return degrees


def cmd_sweep(args) -> int:
    degrees = _parse_degrees(args.degrees)
    forms = [canonical_formulation(f.strip()) for f in args.formulations.split(",") if f.strip()]
    if not forms:
        raise InputError("--formulations selects nothing")
    cloud, path, bounds = _inputs(args)
    # one grid for every degree so the rows solve nested problems on identical data
    samples = max(args.samples or 100, 4 * (degrees[-1] + 1))
    spec = ProblemSpec(degree=degrees[0], dimension=args.dim, samples=samples,
                       xi_range=path.xi_range, **_spec_kwargs(args, bounds))
    wrapper = WrapperConfig(args.wrapper_radius, 16, samples) if args.wrapper_radius is not None else None
    data = prepare(path, cloud, spec, wrapper, args.include_endcaps)
    rows = degree_sweep(spec, data, degrees, forms, backend=args.backend, jobs=args.jobs, path=path)
    io.write_sweep_csv(args.out, rows)
    ok = sum(r.ok for r in rows)
    _emit({"rows": len(rows), "succeeded": ok, "failed": len(rows) - ok, "out": args.out})
    return EXIT_OK if ok else EXIT_SOLVER


def cmd_check(args) -> int:
    ref = io.load_path(args.path) if args.path else None
    corridor = io.load_corridor(args.corridor, ref)
    if corridor.path is None:
        raise InputError("corridor file carries no path; pass --path")
    cloud, cloud_dim = io.read_cloud(args.cloud)
    if cloud_dim != corridor.dim and not (corridor.dim == 2 and not np.any(cloud[:, 2])):
        raise InputError(f"cloud is {cloud_dim}D but corridor is {corridor.dim}D")
    proj = retained(project_cloud(corridor.path, cloud), args.include_endcaps)
    if corridor.dim == 2:
        vals = corridor.eval_inequality(proj.par, proj.ortho[:, 0])
    else:
        vals = corridor.eval_inequality(proj.par, proj.ortho)
    vals = np.atleast_1d(vals)
    bad = vals < -args.feas_tol
    summary = {"points": int(len(vals)), "min_value": float(vals.min()) if len(vals) else None,
               "violations": int(bad.sum()), "feas_tol": args.feas_tol,
               "excluded_end_caps": int(len(cloud) - len(proj))}
    if bad.any():
        worst = proj.source_index[bad][:10].tolist()
        summary["violating_points"] = worst
        log.error("%d point(s) inside the corridor", int(bad.sum()))
    _emit(summary)
    return EXIT_VIOLATION if bad.any() else EXIT_OK


def cmd_synth(args) -> int:
    if args.fixture:
        if args.fixture not in FIXTURES:
            raise InputError(f"unknown fixture {args.fixture!r}; choose from {', '.join(FIXTURES)}")
        fx = FIXTURES[args.fixture]
        scene = fx.scene
        extra = {"fixture": fx.name, "wrapper_radius": fx.wrapper_radius, "dim": fx.dimension}
    else:
        if args.kind not in KINDS:
            raise InputError(f"unknown scene kind {args.kind!r}; choose from {', '.join(KINDS)}")
        base = next((f.scene for f in FIXTURES.values() if f.scene.kind == args.kind and f.name == args.kind),
                    SceneSpec(args.kind))
        kw = {"seed": args.seed}
        if args.count is not None:
            kw["count"] = args.count
        if args.density is not None:
            kw["density"] = args.density
        scene = SceneSpec(**{**base.__dict__, **kw})
        extra = {"kind": scene.kind, "seed": scene.seed}
    path = scene.default_path()
    cloud = generate_scene(scene, path)
    planar = scene.kind == "channel"
    io.save_cloud(args.cloud, cloud, binary=args.binary or None, planar=planar and not args.binary)
    io.save_path(args.path, path)
    _emit({"points": int(len(cloud)), "cloud": args.cloud, "path": args.path, **extra})
    return EXIT_OK


def cmd_export(args) -> int:
    ref = io.load_path(args.path) if args.path else None
    corridor = io.load_corridor(args.corridor, ref)
    if corridor.dim != 3:
        raise InputError("mesh export needs a 3D corridor")
    mesh = sample_boundary_mesh(corridor, args.stations, args.ring)
    io.save_mesh(args.out, mesh)
    _emit({"vertices": int(len(mesh.vertices)), "faces": int(len(mesh.faces)), "out": args.out})
    return EXIT_OK


def _solve_flags(p):
    p.add_argument("--cloud", required=True, help="point cloud (CSV x,y,z / x,y or binary)")
    p.add_argument("--path", required=True, help="reference path JSON")
    p.add_argument("--dim", type=int, choices=(2, 3), default=3)
    p.add_argument("--wrapper-radius", type=float, help="wrapper radius (required in 3D without eigen bounds)")
    p.add_argument("--samples", type=int, help="parameter grid size N (default max(100, 4 (degree + 1)))")
    p.add_argument("--eigen-min", type=float)
    p.add_argument("--eigen-max", type=float)
    p.add_argument("--pd-epsilon", type=float)
    p.add_argument("--feas-tol", type=float)
    p.add_argument("--centered", action="store_true", help="force d = 0 (ellipses centred on the path)")
    p.add_argument("--include-endcaps", action="store_true", help="keep end-cap points as constraints")
    p.add_argument("--backend", choices=("highs", "clarabel"), help="solver override")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="corrgen", description="Collision-free polynomial corridors around a path.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="solve one corridor")
    _solve_flags(g)
    g.add_argument("--degree", type=int, default=6)
    g.add_argument("--formulation", default="lp", help="lp (diagonal dominance) or cone (exact)")
    g.add_argument("--out", required=True, help="corridor JSON output")
    g.add_argument("--mesh", help="optional OBJ boundary mesh")
    g.add_argument("--mesh-stations", type=int, default=50)
    g.add_argument("--mesh-ring", type=int, default=32)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sweep", help="solve over a range of degrees")
    _solve_flags(s)
    s.add_argument("--degrees", default="3:25", help="'lo:hi' inclusive or comma list")
    s.add_argument("--formulations", default="lp,cone")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True, help="sweep CSV output")
    s.set_defaults(func=cmd_sweep)

    c = sub.add_parser("check", help="verify a corridor against a cloud")
    c.add_argument("--corridor", required=True)
    c.add_argument("--cloud", required=True)
    c.add_argument("--path", help="override the path embedded in the corridor")
    c.add_argument("--feas-tol", type=float, default=1e-6)
    c.add_argument("--include-endcaps", action="store_true")
    c.set_defaults(func=cmd_check)

    y = sub.add_parser("synth", help="write a synthetic scene and its path")
    y.add_argument("--kind", default="mixed")
    y.add_argument("--fixture", help=f"bundled fixture: {', '.join(FIXTURES)}")
    y.add_argument("--seed", type=int, default=0)
    y.add_argument("--count", type=int)
    y.add_argument("--density", type=int)
    y.add_argument("--binary", action="store_true", help="write the binary cloud format")
    y.add_argument("--cloud", required=True)
    y.add_argument("--path", required=True)
    y.set_defaults(func=cmd_synth)

    e = sub.add_parser("export", help="corridor JSON to OBJ mesh")
    e.add_argument("--corridor", required=True)
    e.add_argument("--path")
    e.add_argument("--stations", type=int, default=50)
    e.add_argument("--ring", type=int, default=32)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, format="corrgen: %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        log.setLevel(logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING)
        return args.func(args)
    except (SolverError, UnboundedProblemError) as exc:
        log.error("%s", exc)
        _emit({"status": "error", "error": str(exc), "exit": EXIT_SOLVER})
        return EXIT_SOLVER
    except (CorrgenError, OSError, ValueError) as exc:
        log.error("%s", exc)
        _emit({"status": "error", "error": str(exc), "exit": EXIT_INPUT})
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
