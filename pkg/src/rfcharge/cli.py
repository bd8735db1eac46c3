"""Command line front end: ``simulate run|sweep|figures|dump-plan|dump-voronoi``.

Exit codes: 0 success, 1 bad configuration, 2 runtime failure, 3 a sweep in
which every run hit ``max_slots`` (no lifetime was observed).
"""
import argparse
import csv
import os
import sys

import numpy as np

from .config import FIELD_TYPES, coerce_overrides, echo_config, load_config
from .errors import ConfigError, SimulationError
from .experiment import (AXES, FIGURES, SweepSpec, emit_figure_data, run_sweep, sweep_filename,
                         write_sweep_csv)
from .geometry import Region, build_voronoi
from .mobility import ALL_MODELS, build_plan
from .sim import event_positions, run, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_CENSORED = 0, 1, 2, 3


def _add_overrides(parser):
    grp = parser.add_argument_group("configuration overrides")
    for key in FIELD_TYPES:
        grp.add_argument("--" + key.replace("_", "-"), dest="ov_" + key, metavar="VALUE", default=None)


def _overrides(args):
    return {k[3:]: v for k, v in vars(args).items() if k.startswith("ov_") and v is not None}


def _config(args):
    try:
        return load_config(args.config, _overrides(args))
    except OSError as exc:
        raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None


def _split(text):
    return [t for t in (s.strip() for s in text.split(",")) if t]


def cmd_run(args):
    cfg = _config(args)
    if args.echo:
        sys.stdout.write(echo_config(cfg))
    result = run(cfg)
    write_outputs(result, args.out)
    state = "censored" if result.censored else "coverage stop"
    print(f"lifetime {result.lifetime_s:g} s ({state}), consumed/cycle "
          f"{result.mean_consumed_per_cycle_j:.6g} J, final residual {result.final_residual_j:.6g} J")
    print(f"wrote {os.path.join(args.out, 'run.csv')} and run_summary.csv")
    return EXIT_OK


def cmd_sweep(args):
    base = _config(args)
    values = tuple(_split(args.values)) if args.values else AXES.get(args.axis)
    if not values:
        raise ConfigError(f"no default values for axis {args.axis!r}; pass --values")
    by_values = tuple(_split(args.by_values)) if args.by_values else ()
    if args.by and not by_values:
        by_values = AXES.get(args.by, ())
    spec = SweepSpec(args.axis, _coerce(args.axis, values), tuple(_split(args.variants)), args.seeds,
                     args.by, _coerce(args.by, by_values) if args.by else ())

    def progress(pt):
        extra = "" if pt.by_value is None else f" {spec.by}={pt.by_value}"
        print(f"  {spec.axis}={pt.value}{extra} {pt.variant.value}: lifetime {pt.mean('lifetime'):.1f} s, "
              f"{pt.censored} censored, {pt.failed} failed", file=sys.stderr)

    result = run_sweep(spec, base, progress=None if args.quiet else progress, jobs=args.jobs)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, sweep_filename(spec.axis, spec.by))
    write_sweep_csv(result, path)
    print(f"wrote {path}")
    if result.all_censored:
        print("every run reached max_slots; no lifetime observed", file=sys.stderr)
        return EXIT_CENSORED
    return EXIT_OK


def _coerce(axis, values):
    return tuple(coerce_overrides({axis: v})[axis] if isinstance(v, str) else v for v in values)


def cmd_figures(args):
    names = _split(args.names) if args.names else list(FIGURES)
    missing = 0
    for name in names:
        try:
            print(f"wrote {emit_figure_data(name, args.sweeps, args.out)}")
        except SimulationError as exc:
            missing += 1
            print(f"skipped {name}: {exc}", file=sys.stderr)
    return EXIT_RUNTIME if missing == len(names) else EXIT_OK


def _layout(cfg):
    eps = event_positions(cfg)
    diagram = build_voronoi(eps, Region(cfg.side))
    return eps, diagram


def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_dump_plan(args):
    cfg = _config(args)
    eps, diagram = _layout(cfg)
    plan = build_plan(cfg.model, eps, diagram, cfg.n_actors)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(("actor_id", "x", "y", "path_vertex_list"))
        for i in range(plan.n_actors):
            path = plan.paths[i]
            verts = "" if path is None else ";".join(f"{float(x)!r}:{float(y)!r}" for x, y in path.waypoints)
            w.writerow((i, repr(float(plan.positions[i, 0])), repr(float(plan.positions[i, 1])), verts))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_dump_voronoi(args):
    cfg = _config(args)
    _, diagram = _layout(cfg)
    inner = set(diagram.inner_vertices)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh)
        w.writerow(("kind", "id", "a", "b", "x", "y", "inner"))
        for i, (x, y) in enumerate(np.asarray(diagram.vertices)):
            w.writerow(("vertex", i, "", "", repr(float(x)), repr(float(y)), int(i in inner)))
        for i, (a, b) in enumerate(diagram.edges):
            w.writerow(("edge", i, a, b, "", "", ""))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="simulate", description="RF energy harvesting network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key = value configuration file")
        _add_overrides(p)

    p = sub.add_parser("run", help="simulate one scenario")
    common(p)
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--echo", action="store_true", help="print the effective configuration first")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter over the mobility variants")
    common(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", default=None, help="comma separated; defaults to the standard range")
    p.add_argument("--variants", default=",".join(m.value for m in ALL_MODELS))
    p.add_argument("--seeds", type=int, default=30)
    p.add_argument("--by", default=None, help="optional second axis")
    p.add_argument("--by-values", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweeps")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figures", help="project sweep CSVs onto per-figure tables")
    p.add_argument("--sweeps", default="sweeps", help="directory holding sweep_*.csv")
    p.add_argument("--names", default=None, help=f"comma separated subset of {', '.join(FIGURES)}")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_figures)

    for name, func, what in (("dump-plan", cmd_dump_plan, "actor deployment"),
                             ("dump-voronoi", cmd_dump_voronoi, "Voronoi vertices and edges")):
        p = sub.add_parser(name, help=f"write the {what} as CSV")
        common(p)
        p.add_argument("--out", default=None, help="CSV path (default: stdout)")
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
