"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 domain violation,
4 verification failure.
"""

import argparse
import sys

import numpy as np

from . import io
from .exceptions import DewittError, DocumentError, DomainError, FieldPointError
from .fieldmanifold import (
    TangentField,
    energy,
    field_exp,
    field_existence_interval,
    field_geodesic,
    field_jacobi,
    field_log,
    global_ricci,
)
from .figure import figure1_svg
from .oracles import DEFAULT_SEED
from .pointgeo import curvature, ricci_like, scalar_like
from .suites import SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_VERIFY = 4


class UsageError(Exception):
    pass


def _same_base(*fields):
    first = fields[0].base
    for f in fields[1:]:
        if not first.same_as(f.base):
            raise UsageError("input fields have incompatible bases (ids, weights or n differ)")


def _time_grid(args, g0, h):
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if not 0 <= args.t_start < args.t_end:
        raise UsageError("need 0 <= --t-start < --t-end")
    interval = field_existence_interval(g0, h)
    if args.t_end >= interval.sup_t:
        raise FieldPointError(
            interval.point,
            DomainError(
                f"t_end={args.t_end!r} is not below sup_t = -4/t^h = {interval.sup_t!r}",
                predicate="existence",
            ),
        )
    k = np.arange(args.steps + 1)
    return args.t_start + k * ((args.t_end - args.t_start) / args.steps)


def cmd_geodesic(args):
    g0, h = io.read_metric(args.metric), io.read_tangent(args.dir)
    _same_base(g0, h)
    times = _time_grid(args, g0, h)
    io.write_path(field_geodesic(g0, h, times), args.out)


def cmd_exp(args):
    g0, h = io.read_metric(args.metric), io.read_tangent(args.dir)
    _same_base(g0, h)
    io.write_field(field_exp(g0, h), args.out)


def cmd_log(args):
    g0, g = io.read_metric(args.metric), io.read_metric(args.target)
    _same_base(g0, g)
    io.write_field(field_log(g0, g), args.out)


def cmd_jacobi(args):
    g0 = io.read_metric(args.metric)
    h, k, l = (io.read_tangent(p) for p in (args.dir, args.k, args.l))
    _same_base(g0, h, k, l)
    args.t_start = 0.0
    times = _time_grid(args, g0, h)
    io.write_path(field_jacobi(g0, h, k, l, times), args.out)


def cmd_curvature(args):
    g0 = io.read_metric(args.metric)
    h, k, l = (io.read_tangent(p) for p in (args.h, args.k, args.l))
    _same_base(g0, h, k, l)
    pm = g0.metric
    r = curvature(pm, h.values, k.values, l.values)
    ric = ricci_like(pm, h.values, l.values)
    doc = io.field_document(TangentField(g0.base, r))
    doc["kind"] = "curvature"
    for p, value in zip(doc["points"], ric.tolist()):
        p["ricci_like_h_l"] = float(value)
    doc["scalar_like"] = float(scalar_like(g0.base.n))
    doc["global_ricci_h_l"] = global_ricci(g0, h, l)
    io.write_document(doc, args.out)


def cmd_energy(args):
    path = io.read_path(args.path)
    if not isinstance(path, io.MetricPath):
        raise UsageError("energy needs a metric_path document")
    print(repr(float(energy(path))))


def cmd_figure1(args):
    try:
        radii = [float(r) for r in args.radii.split(",")] if args.radii else None
    except ValueError:
        raise UsageError(f"cannot parse --radii {args.radii!r}") from None
    try:
        svg = figure1_svg(args.n, args.grid, radii)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with open(args.out, "w", newline="\n") as fh:
        fh.write(svg)


def cmd_verify(args):
    names = None if args.suite == "all" else [args.suite]
    results = run_suites(names, seed=args.seed, tol=args.tol)
    ok = True
    for res in results:
        print("\n".join(res.lines()))
        ok &= res.passed
    total = sum(r.seconds for r in results)
    print(f"{'all suites passed' if ok else 'FAILED'} (seed {args.seed}, {total:.1f} s)")
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dewitt",
        description="Geodesics, exponential map, curvature and Jacobi fields of the canonical "
        "metric on the space of Riemannian metrics, for sampled metric fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("geodesic", help="sample the geodesic from a metric in a direction")
    p.add_argument("--metric", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("exp", help="field exponential map")
    p.add_argument("--metric", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exp)

    p = sub.add_parser("log", help="field logarithm (inverse of exp)")
    p.add_argument("--metric", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_log)

    p = sub.add_parser("jacobi", help="Jacobi field with J(0)=k, nabla J(0)=l")
    p.add_argument("--metric", required=True)
    p.add_argument("--dir", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("curvature", help="R(h,k)l, Ricci-like values and c(n)")
    p.add_argument("--metric", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--k", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("energy", help="energy of a metric path")
    p.add_argument("--path", required=True)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("figure1", help="SVG of the exponential map on span(Id, A)")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--grid", type=int, default=24, help="number of lines through the origin")
    p.add_argument("--radii", default=None, help="comma separated circle radii")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("verify", help="run the oracle suites")
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=None, help="tolerance for algebraic identities")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except FieldPointError as exc:
        pred = f" [{exc.predicate}]" if exc.predicate else ""
        print(f"domain violation at point {exc.point_id!r}{pred}: {exc.cause}", file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        pred = f" [{exc.predicate}]" if exc.predicate else ""
        print(f"domain violation{pred}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (UsageError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DewittError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
