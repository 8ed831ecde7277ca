"""Command-line driver: ``slres {check,green,sweep} --config FILE``.

Exit status: 0 on success (whatever the verdicts say), 2 for invalid
configuration, 3 when the boundary problem is singular, 1 for other
computational failures.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import warnings
from pathlib import Path

from . import config as cfgmod
from .conditions import all_verdicts, condition_metrics, eps_grid
from .green import NearSpectrumWarning, SingularBoundaryProblem, green_matrix
from .odeint import ResolutionError
from .quasi_system import system_matrix
from .resolvent import ConvergenceReport, EpsRecord, convergence_sweep

log = logging.getLogger("slresolvent")

OUTPUT_ENV = "SLRES_OUTPUT"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_SINGULAR = 0, 1, 2, 3


def _output_dir(args, cfg) -> Path:
    d = args.output or cfg.output.dir or os.environ.get(OUTPUT_ENV) or "out"
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_report(report: ConvergenceReport, out: Path, fmt: str) -> list[Path]:
    written = []
    if fmt in ("csv", "both"):
        p = out / "report.csv"
        p.write_text(report.to_csv())
        written.append(p)
    if fmt in ("json", "both"):
        p = out / "report.json"
        p.write_text(report.to_json())
        written.append(p)
    return written


def _write_verdicts(report: ConvergenceReport, out: Path) -> Path:
    p = out / "verdicts.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["condition", "eps", "value", "classification"])
        for v in report.verdicts:
            for name, e, val, cls in v.rows():
                w.writerow([name, f"{e:.17g}", f"{val:.17g}", cls])
    return p


def cmd_check(cfg, args) -> int:
    family, boundary, base = cfg.build_family(), cfg.build_boundary(), cfg.grid
    eps = cfg.eps_ladder
    metrics = [condition_metrics(family, e, base, boundary, cfg.points_per_scale) for e in eps]
    records = [EpsRecord(eps=e, grid_n=m["grid_n"], q_l2=m["q_l2"], cond2=m["cond2"], cond3=m["cond3"],
                         r_l1=m["r_l1"], rrv_l1=m["rrv_l1"], rvr_l1=m["rvr_l1"], comm_l1=m["comm_l1"],
                         z_dist=m["z_dist"], status="check", metrics=m)
               for e, m in zip(eps, metrics)]
    verdicts = all_verdicts(family, boundary, eps, base, cfg.thresholds, cfg.points_per_scale, metrics)
    warns = []
    if family.needs_resample(base):
        warns.append(f"tabulated potential resampled from n={family.native_grid.n} "
                     f"to n={base.n} by linear interpolation")
    report = ConvergenceReport(eps, records, None, verdicts, warns,
                               {"command": "check", "family": family.kind, "boundary": boundary.name})
    out = _output_dir(args, cfg)
    files = _write_report(report, out, args.format or cfg.output.format) + [_write_verdicts(report, out)]
    for v in verdicts:
        log.info("%-12s %s", v.name, v.classification)
    for w in warns:
        log.warning(w)
    print("\n".join(str(f) for f in files))
    return EXIT_OK


def cmd_green(cfg, args) -> int:
    family, boundary, base = cfg.build_family(), cfg.build_boundary(), cfg.grid
    eps = float(args.at)
    grid, stride = eps_grid(family, eps, base, cfg.points_per_scale)
    alpha, beta = boundary.at(eps)
    A = system_matrix(family(eps, grid), cfg.mu).A
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NearSpectrumWarning)
        K = green_matrix(A, alpha, beta, stride=stride, scale=family.oscillation_scale(eps),
                         mid=family.midpoint_rule,
                         singular_cond=cfg.singular_cond, warn_cond=cfg.warn_cond)
    notes = [str(w.message) for w in caught if issubclass(w.category, NearSpectrumWarning)]
    if family.needs_resample(base):
        notes.append("tabulated potential resampled by linear interpolation")
    out = _output_dir(args, cfg)
    path = out / f"kernel_{eps:.6g}.csv"
    t = K.grid.nodes
    g = K.gamma
    with open(path, "w", newline="") as fh:
        fh.write(f"# delta_cond: {K.delta_cond:.17g}\n")
        for n in notes:
            fh.write(f"# warning: {n}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "s", "re", "im"])
        for i in range(K.grid.n):
            for j in range(K.grid.n):
                w.writerow([f"{t[i]:.17g}", f"{t[j]:.17g}", f"{g[i, j].real + 0.0:.17g}", f"{g[i, j].imag + 0.0:.17g}"])
    for n in notes:
        log.warning(n)
    print(path)
    return EXIT_OK


def cmd_sweep(cfg, args) -> int:
    report = convergence_sweep(cfg.build_family(), cfg.build_boundary(), cfg.mu, cfg.eps_ladder,
                               cfg.grid, cfg.thresholds, cfg.points_per_scale,
                               cfg.singular_cond, jobs=args.jobs)
    report.meta["command"] = "sweep"
    out = _output_dir(args, cfg)
    files = _write_report(report, out, args.format or cfg.output.format)
    for w in report.warnings:
        log.warning(w)
    if report.rate and report.rate.rate is not None:
        log.info("fitted rate %.4f (residual %.2e)", report.rate.rate, report.rate.residual)
    print("\n".join(str(f) for f in files))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment YAML file")
    common.add_argument("--output", help=f"output directory (default: config, ${OUTPUT_ENV}, ./out)")
    common.add_argument("--format", choices=cfgmod.FORMATS, help="report format (default from config)")
    common.add_argument("--jobs", type=int, default=1, help="threads for per-eps work")
    common.add_argument("--grid-n", type=int, help="override base grid size")
    common.add_argument("--eps", help='override ladder: "g:kmin:kmax:base" or "0.1,0.01"')
    common.add_argument("--mu", help='override spectral parameter: "re,im"')
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="slres", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="evaluate convergence hypotheses on the eps ladder")
    g = sub.add_parser("green", parents=[common], help="dump the resolvent kernel at one eps")
    g.add_argument("--at", type=float, default=0.0, help="eps at which to build the kernel (0 = limit)")
    sub.add_parser("sweep", parents=[common], help="kernel distances over the eps ladder")
    return p


COMMANDS = {"check": cmd_check, "green": cmd_green, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="[%(levelname)s] %(name)s: %(message)s")
    try:
        cfg = cfgmod.load(args.config)
        cfg = cfgmod.with_overrides(cfg, grid_n=args.grid_n, eps=args.eps, mu=args.mu)
        cfg.build_family()
        cfg.build_boundary()
    except cfgmod.ConfigError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError, KeyError, SyntaxError) as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg, args)
    except SingularBoundaryProblem as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (ResolutionError, ValueError, KeyError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
