"""Command-line interface: ``wsingular {capacitance,gamma,rate,mesh} ...``.

Results go to stdout (or ``--out``) as JSON by default, or CSV.  Exit codes:
0 success, 1 runtime or convergence failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import time

from . import __version__
from .analysis import make_holder, measure_rate, rule_family
from .capacitance import exact_capacitance, iterate_capacitance
from .errors import ArgumentError, WSingularError
from .mesh import (COLLOCATION_RULES, Ellipsoid, Sphere, build_surface, read_mesh,
                   read_triangle_soup, write_mesh)
from .periodic import gamma_constant, gamma_dyadic

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
CAPACITANCE_COLUMNS = ("c", "n", "m", "N", "exact", "capacitance", "error", "relative_error",
                       "iterations", "time_seconds")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fmt_real(x):
    return "null" if x is None else format(float(x), ".17g")


def to_json(obj, indent=2, _level=0):
    """JSON text with every real written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return {None: "null", True: "true", False: "false"}[obj]
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return fmt_real(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "tolist"):
        return to_json(obj.tolist(), indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def parse_shape(spec):
    """``ellipsoid:a,b,c`` | ``sphere:a`` | ``mesh:PATH`` -> (kind, value)."""
    kind, sep, rest = spec.partition(":")
    if not sep or not rest:
        raise UsageError(f"bad shape {spec!r}; expected ellipsoid:a,b,c | sphere:a | mesh:PATH")
    if kind == "mesh":
        return "mesh", rest
    try:
        vals = [float(x) for x in rest.split(",")]
    except ValueError:
        raise UsageError(f"bad number in shape {spec!r}") from None
    if any(not (v > 0 and math.isfinite(v)) for v in vals):
        raise UsageError(f"shape dimensions must be positive in {spec!r}")
    if kind == "sphere" and len(vals) == 1:
        return "shape", Sphere(vals[0])
    if kind == "ellipsoid" and len(vals) == 3:
        return "shape", Ellipsoid(*vals)
    raise UsageError(f"bad shape {spec!r}; expected ellipsoid:a,b,c | sphere:a | mesh:PATH")


def _check_mesh_params(n, m):
    if n < 3:
        raise UsageError("--n must be at least 3")
    if m < 2 or m % 2:
        raise UsageError("--m must be even and at least 2")


def _write(args, text):
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows, footer=()):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else fmt_real(v) if isinstance(v, float) else v for v in r])
    for line in footer:
        buf.write(line + "\n")
    return buf.getvalue()


def _threads(args):
    return args.threads if args.threads else (os.cpu_count() or 1)


def cmd_capacitance(args):
    shapes = args.shape or ["ellipsoid:1,1,0.5"]
    _check_mesh_params(args.n, args.m)
    if args.max_iter < 0:
        raise UsageError("--max-iter must be >= 0")
    if not args.stop_tol > 0:
        raise UsageError("--stop-tol must be positive")
    parsed = [parse_shape(s) for s in shapes]
    rows = []
    for spec, (kind, value) in zip(shapes, parsed):
        t0 = time.perf_counter()
        if kind == "mesh":
            mesh = read_mesh(value).with_collocation(args.collocation)
            shape, c = None, None
        else:
            shape = value
            mesh = build_surface(shape, args.n, args.m, collocation=args.collocation)
            c = shape.c if isinstance(shape, Ellipsoid) else None
        run = iterate_capacitance(mesh, epsilon0=args.epsilon0, max_iter=args.max_iter,
                                  stop_tol=args.stop_tol, operator=args.operator,
                                  threads=_threads(args))
        elapsed = time.perf_counter() - t0
        exact = exact_capacitance(shape, args.epsilon0) if shape is not None else None
        err = None if exact is None else run.capacitance - exact
        row = {
            "shape": spec, "c": c, "n": mesh.n, "m": mesh.m, "N": mesh.N,
            "exact": exact, "capacitance": run.capacitance, "error": err,
            "relative_error": None if exact is None else err / exact,
            "iterations": run.iterations, "converged": run.converged, "q_hat": run.q_hat,
            "sequence": run.to_dict()["sequence"],
        }
        if args.timing:
            row["time_seconds"] = elapsed
        row["_time"] = elapsed
        rows.append(row)
        logger.info("%s: C=%.8g (%d iterations, %.1fs)", spec, run.capacitance,
                    run.iterations, elapsed)
    if args.format == "csv":
        text = _csv_text(CAPACITANCE_COLUMNS,
                         [[r["c"], r["n"], r["m"], r["N"], r["exact"], r["capacitance"], r["error"],
                           r["relative_error"], r["iterations"], r["_time"]] for r in rows])
    else:
        for r in rows:
            del r["_time"]
        config = {"epsilon0": args.epsilon0, "n": args.n, "m": args.m, "max_iter": args.max_iter,
                  "stop_tol": args.stop_tol, "operator": args.operator,
                  "collocation": args.collocation}
        text = to_json({"command": "capacitance", "config": config, "rows": rows}) + "\n"
    _write(args, text)
    return EXIT_OK


def cmd_gamma(args):
    if not 0 < args.lam < 1:
        raise UsageError("--lambda must lie strictly between 0 and 1")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    value = gamma_constant(args.lam, args.tol)
    result = {"command": "gamma", "lambda": args.lam, "tol": args.tol, "gamma": value}
    if args.check:
        ref = gamma_dyadic(args.lam)
        result["dyadic_reference"] = ref
        result["relative_difference"] = value / ref - 1.0
    if args.format == "csv":
        keys = [k for k in result if k != "command"]
        text = _csv_text(keys, [[result[k] for k in keys]])
    else:
        text = to_json(result) + "\n"
    _write(args, text)
    return EXIT_OK


def cmd_rate(args):
    if not 0 < args.alpha <= 1:
        raise UsageError("--alpha must lie in (0, 1]")
    if not 0 < args.lam < 1:
        raise UsageError("--lambda must lie strictly between 0 and 1")
    try:
        sizes = [int(x) for x in args.grid_sizes.split(",")]
    except ValueError:
        raise UsageError("--grid-sizes must be a comma-separated list of integers") from None
    if len(sizes) < 2 or min(sizes) < 2:
        raise UsageError("--grid-sizes needs at least two sizes >= 2")
    function = args.function or args.family
    params = {"domain": args.family} if function == "lacunary" else None
    try:
        f = make_holder(function, args.alpha, params)
    except ArgumentError as exc:
        raise UsageError(str(exc)) from None
    family = rule_family(args.family, args.lam, args.alpha)
    try:
        report = measure_rate(family, f, seed=args.seed, grid_sizes=sizes,
                              oracle_resolution=args.oracle)
    except ArgumentError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        footer = [f"# fitted_order,{fmt_real(report.order)}",
                  f"# fit_residual,{fmt_real(report.residual)}",
                  f"# oracle_resolution,{report.oracle_resolution}",
                  f"# monotone,{str(report.monotone).lower()}"]
        text = _csv_text(("n", "sup_error"), zip(report.grid_sizes, report.errors), footer)
    else:
        d = report.to_dict()
        d.update(command="rate", function=function, alpha=args.alpha, **{"lambda": args.lam})
        text = to_json(d) + "\n"
    _write(args, text)
    return EXIT_OK


def _mesh_summary(mesh):
    return {"vertices": len(mesh.vertices), "triangles": mesh.N, "n": mesh.n, "m": mesh.m,
            "area": mesh.total_area, "closed": mesh.is_closed(),
            "consistently_oriented": mesh.is_consistently_oriented()}


def cmd_mesh(args):
    if args.action == "generate":
        _check_mesh_params(args.n, args.m)
        kind, shape = parse_shape(args.shape)
        if kind == "mesh":
            raise UsageError("mesh generate needs a parametric shape")
        mesh = build_surface(shape, args.n, args.m)
        if not args.out:
            raise UsageError("mesh generate needs --out")
        write_mesh(mesh, args.out)
        sys.stdout.write(to_json(_mesh_summary(mesh)) + "\n")
    elif args.action == "inspect":
        sys.stdout.write(to_json(_mesh_summary(read_mesh(args.path))) + "\n")
    else:
        if not args.out:
            raise UsageError("mesh convert needs --out")
        with open(args.path, "rb") as fh:
            native = fh.read(6) == b"wsmesh"
        mesh = read_mesh(args.path) if native else read_triangle_soup(args.path)
        write_mesh(mesh, args.out)
        sys.stdout.write(to_json(_mesh_summary(mesh)) + "\n")
    return EXIT_OK


def build_parser():
    p = _Parser(prog="wsingular", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: machine parallelism)")

    c = sub.add_parser("capacitance", help="iterative capacitance of a conductor")
    c.add_argument("--shape", action="append",
                   help="ellipsoid:a,b,c | sphere:a | mesh:PATH (repeatable)")
    c.add_argument("--n", type=int, default=40, help="azimuthal mesh count")
    c.add_argument("--m", type=int, default=30, help="polar mesh count (even)")
    c.add_argument("--max-iter", type=int, default=100)
    c.add_argument("--stop-tol", type=float, default=1e-7)
    c.add_argument("--epsilon0", type=float, default=1.0)
    c.add_argument("--operator", choices=("adjoint", "double_layer"), default="adjoint")
    c.add_argument("--collocation", choices=COLLOCATION_RULES, default="centroid")
    c.add_argument("--timing", action="store_true", help="include wall-clock time in JSON")
    common(c)
    c.set_defaults(func=cmd_capacitance)

    g = sub.add_parser("gamma", help="integral of the periodic kernel over its period")
    g.add_argument("--lambda", dest="lam", type=float, required=True)
    g.add_argument("--tol", type=float, default=1e-8)
    g.add_argument("--check", action="store_true", help="also report the dyadic reference")
    common(g)
    g.set_defaults(func=cmd_gamma)

    r = sub.add_parser("rate", help="empirical convergence order of a cubature family")
    r.add_argument("--family", choices=("periodic", "planar"), default="periodic")
    r.add_argument("--function", choices=("periodic", "planar", "radial", "lacunary"),
                   help="test function (default: the cusp matching --family)")
    r.add_argument("--alpha", type=float, default=0.5)
    r.add_argument("--lambda", dest="lam", type=float, default=0.5)
    r.add_argument("--grid-sizes", default="8,16,32,64")
    r.add_argument("--oracle", type=int, default=512, help="self-oracle grid size")
    common(r)
    r.set_defaults(func=cmd_rate)

    m = sub.add_parser("mesh", help="generate, inspect or convert mesh files")
    msub = m.add_subparsers(dest="action", required=True, parser_class=_Parser)
    mg = msub.add_parser("generate")
    mg.add_argument("--shape", default="sphere:1")
    mg.add_argument("--n", type=int, default=40)
    mg.add_argument("--m", type=int, default=30)
    mg.add_argument("--out")
    mi = msub.add_parser("inspect")
    mi.add_argument("path")
    mc = msub.add_parser("convert", help="mesh file or triangle soup (9 numbers per line) to mesh file")
    mc.add_argument("path")
    mc.add_argument("--out")
    m.set_defaults(func=cmd_mesh)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        sys.stderr.write("wsingular: --threads must be positive\n")
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"wsingular: {exc}\n")
        return EXIT_USAGE
    except (WSingularError, OSError) as exc:
        sys.stderr.write(f"wsingular: error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
