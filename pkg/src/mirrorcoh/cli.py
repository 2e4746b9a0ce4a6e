"""
Command-line entry point.

Exit status is 0 on success (warnings go to stderr and do not change it),
1 when the computation or I/O fails, and 2 for invalid command-line usage.
Failures print a single line ``error: <ErrorClass>: <message>`` on stderr.
"""

import argparse
import sys

import numpy as np

from . import config as config_mod
from .detector_state import Method, quadrature_components, saddle_components, saddle_valid
from .errors import MirrorCohError, UsageError
from .observables import closed_form_late_time, coherences
from .output import fmt, write_csv, write_heatmap
from .scan import FIELD_NAMES, Axis, GridSpec, scan_plane, sweep_omega
from .trajectory import MirrorTrajectory, energy_flux

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2

CONFIG_HELP = """\
config file: flat 'key = value' text, '#' comments, keys
  kappa omega sigma lambda t0 xA d     (kappa not needed for trajectory=static)
  epsilon  UV cutoff in units of sigma, real-axis quadrature only (default 0.01)
  nodes    Gauss-Legendre nodes per axis (default 160)
  box      half-width of the integration box in units of sigma (default 6)
  contour  shifted|real (default shifted)
  trajectory accelerating|static (default accelerating)
  method   saddle|quadrature|late_time (default saddle)
"""


def _range_arg(text):
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX:POINTS, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file")
    common.add_argument("--method", choices=[m.value for m in Method],
                        help="override the configured evaluation method")
    common.add_argument("--out", help="output file (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="mirrorcoh",
        description="Two-qubit detectors near an accelerating mirror.",
        epilog=CONFIG_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flux", parents=[common], help="energy flux <T_uu> on a u grid")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--trajectory", choices=["accelerating", "static"], default="accelerating")
    p.add_argument("--u-min", type=float, required=True)
    p.add_argument("--u-max", type=float, required=True)
    p.add_argument("--points", type=int, required=True)

    sub.add_parser("components", parents=[common], help="E_A, E_B, E_AB, X, X4")
    sub.add_parser("report", parents=[common], help="coherence report and band")

    p = sub.add_parser("sweep", parents=[common], help="sweep over omega -> CSV")
    p.add_argument("--axis", choices=["omega"], default="omega")
    p.add_argument("--min", type=float, required=True)
    p.add_argument("--max", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("scan", parents=[common], help="(t0, xA) plane -> CSV [+ PPM]")
    p.add_argument("--t0", type=_range_arg, required=True, metavar="A:B:N")
    p.add_argument("--xA", type=_range_arg, required=True, metavar="C:D:M")
    p.add_argument("--heatmap", choices=FIELD_NAMES, help="field rendered to --ppm")
    p.add_argument("--ppm", help="PPM output path")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _load(args):
    if not args.config:
        raise UsageError("--config is required for this subcommand")
    cfg = config_mod.load_config(args.config)
    method = Method(args.method) if args.method else cfg.method
    for w in cfg.warnings:
        if method is not Method.QUADRATURE:
            print(f"warning: {w}", file=sys.stderr)
    return cfg, method


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _components(cfg, method):
    det, traj = cfg.detector, cfg.trajectory
    if method is Method.SADDLE:
        return saddle_components(det, traj)
    if method is Method.QUADRATURE:
        return quadrature_components(det, traj, cfg.quadrature)
    if traj.is_static:
        raise UsageError("late_time method needs an accelerating mirror")
    comps, _ = closed_form_late_time(det.omega, det.sigma, traj.kappa, det.d, det.lam)
    return comps


def cmd_flux(args):
    if args.points < 2 or not args.u_min < args.u_max:
        raise UsageError("need --u-min < --u-max and --points >= 2")
    if args.trajectory == "static":
        traj = MirrorTrajectory.static()
    else:
        traj = MirrorTrajectory.accelerating(args.kappa)
    u = np.linspace(args.u_min, args.u_max, args.points)
    flux = energy_flux(traj, u)
    lines = ["u,flux"] + [f"{fmt(a)},{fmt(b)}" for a, b in zip(u, flux)]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_components(args):
    cfg, method = _load(args)
    c = _components(cfg, method)
    valid = saddle_valid(cfg.detector, cfg.trajectory)
    pairs = [("E_A", c.eA), ("E_B", c.eB), ("E_AB_re", c.eAB.real),
             ("E_AB_im", c.eAB.imag), ("X_re", c.x.real), ("X_im", c.x.imag),
             ("X4", c.x4)]
    lines = [f"{k}={fmt(v)}" for k, v in pairs]
    lines.append(f"valid_saddle={'true' if valid else 'false'}")
    _emit("\n".join(lines) + "\n", args.out)


def cmd_report(args):
    cfg, method = _load(args)
    rep = coherences(_components(cfg, method))
    lines = []
    for k, v in rep.as_dict().items():
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = fmt(v)
        lines.append(f"{k} = {v}")
    _emit("\n".join(lines) + "\n", args.out)


def _report_scan(fmap):
    md = fmap.metadata
    if md["missing"]:
        print(f"warning: {md['missing']} grid point(s) could not be evaluated",
              file=sys.stderr)
    if md["warnings"]:
        print(f"warning: {md['warnings']} grid point(s) outside saddle validity",
              file=sys.stderr)


def cmd_sweep(args):
    cfg, method = _load(args)
    if not args.out:
        raise UsageError("--out is required for sweep")
    grid = GridSpec(Axis("omega", args.min, args.max, args.points))
    fmap = sweep_omega(cfg.detector, grid, cfg.trajectory, method, cfg.quadrature,
                       workers=args.workers)
    write_csv(fmap, args.out)
    _report_scan(fmap)


def cmd_scan(args):
    cfg, method = _load(args)
    if not args.out:
        raise UsageError("--out is required for scan")
    if bool(args.heatmap) != bool(args.ppm):
        raise UsageError("--heatmap and --ppm must be given together")
    grid = GridSpec(Axis("t0", *args.t0), Axis("xA", *args.xA))
    fmap = scan_plane(cfg.detector, grid, cfg.trajectory, method, cfg.quadrature,
                      workers=args.workers)
    write_csv(fmap, args.out)
    if args.heatmap:
        write_heatmap(fmap, args.heatmap, args.ppm)
    _report_scan(fmap)


COMMANDS = {
    "flux": cmd_flux,
    "components": cmd_components,
    "report": cmd_report,
    "sweep": cmd_sweep,
    "scan": cmd_scan,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (MirrorCohError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
