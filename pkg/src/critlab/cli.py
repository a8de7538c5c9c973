"""Command-line front end: ``critlab verify | profile | scan``."""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import estimates as est
from . import identities as ids
from . import levelset as lvl
from .errors import CritlabError
from .geometry import SpaceForm
from .report import RunConfig, SuiteReport, load_config, render_scan, summary_row, to_csv
from .solutions import (
    BallSpec,
    SchwarzschildSpec,
    construct_ball,
    construct_schwarzschild,
    pointwise_residual,
)

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
PROFILES = ("phi", "F", "residual", "gradient_bound")


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value config file (default: $CRITLAB_CONFIG)")
    g.add_argument("--grid", dest="grid_size", type=int)
    g.add_argument("--tol-closed-form", type=float)
    g.add_argument("--tol-bvp", type=float)
    g.add_argument("--f-floor-fraction", type=float)
    g.add_argument("--format", choices=("json", "csv", "text"))
    g.add_argument("--output", "-o")
    return p


def _ball_flags(p, required=True):
    p.add_argument("--space", choices=[s.value for s in SpaceForm], required=required)
    p.add_argument("--radius", type=float, required=required)


def _schwarzschild_flags(p, required=True):
    p.add_argument("--mass", type=float, required=required)
    p.add_argument("--r2", type=float, required=required, help="boundary radius on the primary sheet")
    p.add_argument("--r1", type=float, help="boundary radius on the reflected sheet (derived when omitted)")
    p.add_argument("--ads", action="store_true", help="AdS-Schwarzschild, R = -n(n-1)")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="critlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="construct a solution and run the full check suite")
    vsub = verify.add_subparsers(dest="family", required=True)
    vb = vsub.add_parser("ball", parents=[common])
    _ball_flags(vb)
    vb.add_argument("--dim", type=int, required=True)
    vs = vsub.add_parser("schwarzschild", parents=[common])
    _schwarzschild_flags(vs)
    vs.add_argument("--dim", type=int, required=True)

    prof = sub.add_parser("profile", parents=[common], help="write a radial or level-set profile as CSV")
    prof.add_argument("quantity", choices=PROFILES)
    prof.add_argument("--dim", type=int, required=True)
    _ball_flags(prof, required=False)
    _schwarzschild_flags(prof, required=False)
    prof.add_argument("--component", type=int, default=0, help="component index for F")

    scan = sub.add_parser("scan", help="run the suite over a parameter range")
    ssub = scan.add_subparsers(dest="family", required=True)
    sb = ssub.add_parser("ball", parents=[common])
    sb.add_argument("--space", choices=[s.value for s in SpaceForm], required=True)
    sb.add_argument("--dim", type=int, required=True)
    sb.add_argument("--radius-range", required=True, metavar="LO:HI:STEP")
    sb.add_argument("--workers", type=int, default=1)
    ss = ssub.add_parser("schwarzschild", parents=[common])
    ss.add_argument("--dim", type=int, required=True)
    ss.add_argument("--mass", type=float)
    ss.add_argument("--r2", type=float)
    ss.add_argument("--r1", type=float)
    ss.add_argument("--ads", action="store_true")
    rng = ss.add_mutually_exclusive_group(required=True)
    rng.add_argument("--r2-range", metavar="LO:HI:STEP")
    rng.add_argument("--mass-range", metavar="LO:HI:STEP")
    ss.add_argument("--workers", type=int, default=1)
    return parser


def parse_range(text: str) -> list:
    """Inclusive ``lo:hi:step`` range."""
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"range {text!r} is not lo:hi:step") from None
    if not step > 0 or hi < lo:
        raise UsageError(f"range {text!r} is empty")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def _config(args) -> RunConfig:
    flags = {k: getattr(args, k, None) for k in
             ("grid_size", "tol_closed_form", "tol_bvp", "f_floor_fraction", "format", "output")}
    try:
        return load_config(flags, args.config)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _family(args) -> str:
    if getattr(args, "family", None):
        return args.family
    ball = args.space is not None or args.radius is not None
    bh = args.mass is not None or args.r2 is not None
    if ball == bh:
        raise UsageError("give either --space/--radius or --mass/--r2")
    if ball and (args.space is None or args.radius is None):
        raise UsageError("a ball needs both --space and --radius")
    if bh and (args.mass is None or args.r2 is None):
        raise UsageError("a Schwarzschild domain needs both --mass and --r2")
    return "ball" if ball else "schwarzschild"


def _construct(family: str, params: dict, grid_size: int):
    if family == "ball":
        return construct_ball(BallSpec(SpaceForm(params["space"]), params["dim"], params["radius"]), grid_size)
    spec = SchwarzschildSpec(params["dim"], params["mass"], params["r2"], params.get("r1"), params.get("ads", False))
    return construct_schwarzschild(spec, grid_size)


def _params(args, family) -> dict:
    if family == "ball":
        return {"space": args.space, "dim": args.dim, "radius": args.radius}
    return {"dim": args.dim, "mass": args.mass, "r2": args.r2, "r1": args.r1, "ads": args.ads}


def _emit(text: str, config: RunConfig):
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify(args) -> int:
    config = _config(args)
    solution = _construct(args.family, _params(args, args.family), config.grid_size)
    report = SuiteReport.build(solution, config)
    _emit(report.render(config.format), config)
    return EXIT_OK if report.overall_pass else EXIT_FAIL


def profile_rows(solution, quantity: str, config: RunConfig, component: int = 0):
    """``(columns, rows)`` for one profile quantity."""
    x = solution.metric.grid
    if quantity == "phi":
        prof = ids.phi_profile(solution, config.f_floor_fraction * solution.f_max)
        return ("coordinate", "phi"), list(zip(x, prof.phi))
    if quantity == "residual":
        return ("coordinate", "residual"), list(zip(x, pointwise_residual(solution)))
    if quantity == "gradient_bound":
        grad2, h = est.gradient_bound_profile(solution)
        return ("coordinate", "grad_f_squared", "bound"), list(zip(x, grad2, h))
    if quantity == "F":
        if not 0 <= component < len(solution.components):
            raise UsageError(f"component {component} out of range (0..{len(solution.components) - 1})")
        trace = lvl.f_functional(solution, solution.components[component])
        return ("t", "F"), list(zip(trace.t_grid, trace.F_values))
    raise UsageError(f"unknown profile quantity {quantity!r}")


def cmd_profile(args) -> int:
    config = _config(args)
    family = _family(args)
    solution = _construct(family, _params(args, family), config.grid_size)
    cols, rows = profile_rows(solution, args.quantity, config, args.component)
    _emit(to_csv(cols, rows), config)
    return EXIT_OK


def _scan_row(job):
    family, params, value, config = job
    try:
        solution = _construct(family, params, config.grid_size)
    except CritlabError as exc:
        return summary_row(value, None, config, exc)
    return summary_row(value, solution, config)


def cmd_scan(args) -> int:
    config = _config(args)
    if args.family == "ball":
        key, values = "radius", parse_range(args.radius_range)
        base = {"space": args.space, "dim": args.dim}
    else:
        base = {"dim": args.dim, "mass": args.mass, "r2": args.r2, "r1": args.r1, "ads": args.ads}
        if args.r2_range:
            key, values = "r2", parse_range(args.r2_range)
            if args.mass is None:
                raise UsageError("--r2-range needs --mass")
        else:
            key, values = "mass", parse_range(args.mass_range)
            if args.r2 is None:
                raise UsageError("--mass-range needs --r2")
    jobs = [(args.family, {**base, key: v}, v, config) for v in values]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_scan_row, jobs))
    else:
        rows = [_scan_row(j) for j in jobs]
    _emit(render_scan(key, rows, config, config.format), config)
    if any(r["status"] == "error" for r in rows):
        return EXIT_ERROR
    return EXIT_OK if all(r["overall_pass"] for r in rows) else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "profile": cmd_profile, "scan": cmd_scan}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"critlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (CritlabError, ValueError) as exc:
        print(f"critlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
