"""Command line: ldpc-cran {de,threshold,design,peel-mc,calibrate,simulate,sweep}."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import asdict
from fractions import Fraction

from . import cellular, code_design, harness
from .density_evolution import DeConfig, run_de, threshold
from .ensemble import default_palette_path, load_palette, regular_distribution, save_palette
from .peeling import peel_monte_carlo
from .schedulers import SCHEDULERS


def _add_code_args(p):
    p.add_argument("--code", help="palette label, e.g. 'R=1/2 dc=7'")
    p.add_argument("--dv", type=int)
    p.add_argument("--dc", type=int)
    p.add_argument("--palette", default=str(default_palette_path()))


def _pick_dist(args):
    if args.dv is not None and args.dc is not None:
        return regular_distribution(args.dv, args.dc)
    if args.code:
        return load_palette(args.palette).by_label(args.code).distribution
    raise SystemExit("select a code with --code LABEL or --dv/--dc")


def _de_cfg(args) -> DeConfig:
    return DeConfig(args.eps_thresh, args.max_iters)


def cmd_de(args):
    tr = run_de(_pick_dist(args), args.eps0, _de_cfg(args))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["iteration", "epsilon"])
    for i, e in enumerate(tr.eps_sequence):
        w.writerow([i, repr(e)])
    print(f"# {tr.status} after {tr.iterations} iterations", file=sys.stderr)


def cmd_threshold(args):
    print(f"{threshold(_pick_dist(args), x_lo=args.eps_thresh):.8f}")


def cmd_design(args):
    rates = [Fraction(r) for r in args.rate] if args.rate else code_design.TARGET_RATES
    pal = code_design.build_palette(rates, d_c=args.dc, d_max=args.d_max, n_grid=args.grid,
                                          eps_thresh=args.eps_thresh)
    for c in pal:
        print(f"{c.label}\trate={c.rate:.6f}\tthreshold={c.threshold:.6f}")
    if args.out:
        save_palette(pal, args.out)
        print(f"# wrote {args.out}", file=sys.stderr)


def cmd_peel_mc(args):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["trial", "success", "passes"])
    for t, ok, passes in peel_monte_carlo(_pick_dist(args), args.n, args.eps0, args.trials, args.seed):
        w.writerow([t, int(ok), passes])


def cmd_calibrate(args):
    curve = cellular.calibrate(args.drops, args.seed, args.cluster_size, args.alpha, args.gamma_db, args.s)
    if args.out:
        curve.save(args.out)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["# a", "b", "gamma_lo_db", "gamma_hi_db", "n_samples", "seed"])
    w.writerow([repr(curve.a), repr(curve.b), curve.gamma_lo_db, curve.gamma_hi_db, curve.n_samples, curve.seed])
    w.writerow(["sinr_db", "ccdf"])
    for g, p in zip(curve.ccdf_db, curve.ccdf_p):
        w.writerow([repr(g), repr(p)])


def _sim_cfg(args) -> harness.SimConfig:
    return harness.SimConfig(
        alpha=args.alpha, utilization=args.utilization, cluster_size=args.cluster_size,
        gamma_db=args.gamma_db, s=args.s, trials=args.trials, seed=args.seed,
        schedulers=tuple(args.scheduler or SCHEDULERS), c_server=args.c_server, c_loc=args.c_loc,
        palette=args.palette, calibration=args.calibration, mapping=args.mapping,
        de=DeConfig(args.eps_thresh, args.max_iters))


def _report(rows, out):
    if out:
        harness.emit_results(rows, out)
    for r in harness.sort_rows(rows):
        print(f"{r.scheduler:12s} alpha={r.alpha:g} u={r.utilization:g} N={r.cluster_size} "
              f"T={r.mean_throughput:.4f}±{r.stderr_throughput:.4f} outage={r.outage_prob:.3f}")


def cmd_simulate(args):
    cfg = _sim_cfg(args)
    logging.getLogger(__name__).info("config: %s", asdict(cfg))
    _report(harness.run_point(cfg), args.out)


def cmd_sweep(args):
    _report(harness.run_sweep(_sim_cfg(args), args.var, args.points), args.out)


def _add_sim_args(p):
    p.add_argument("--scheduler", action="append", choices=SCHEDULERS,
                   help="repeatable; default all four")
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--utilization", type=float, default=1.0)
    p.add_argument("--cluster-size", type=int, default=7)
    p.add_argument("--gamma-db", type=float, default=20.0)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-server", type=float)
    p.add_argument("--c-loc", type=float)
    p.add_argument("--palette", default=str(default_palette_path()))
    p.add_argument("--calibration", default=str(cellular.default_calibration_path()))
    p.add_argument("--mapping", choices=("exp", "table"), default="exp")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ldpc-cran", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def de_flags(p):
        p.add_argument("--eps-thresh", type=float, default=1e-3)
        p.add_argument("--max-iters", type=int, default=1000)

    p = sub.add_parser("de", help="density-evolution trace as CSV")
    _add_code_args(p)
    p.add_argument("--eps0", type=float, required=True)
    de_flags(p)
    p.set_defaults(func=cmd_de)

    p = sub.add_parser("threshold", help="BEC threshold eps*")
    _add_code_args(p)
    p.add_argument("--eps-thresh", type=float, default=1e-3)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("design", help="optimise check-regular codes")
    p.add_argument("--rate", action="append", help="target rate, repeatable (default: the eight palette rates)")
    p.add_argument("--dc", type=int, default=7)
    p.add_argument("--d-max", type=int, default=200)
    p.add_argument("--grid", type=int, default=500)
    p.add_argument("--eps-thresh", type=float, default=1e-3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("peel-mc", help="finite-length peeling Monte Carlo as CSV")
    _add_code_args(p)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_peel_mc)

    p = sub.add_parser("calibrate", help="fit the SINR -> eps0 curve")
    p.add_argument("--drops", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--cluster-size", type=int, default=7)
    p.add_argument("--gamma-db", type=float, default=20.0)
    p.add_argument("--s", type=float, default=0.1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="one parameter point, all schedulers")
    _add_sim_args(p)
    de_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="sweep alpha, utilization or cluster size")
    _add_sim_args(p)
    de_flags(p)
    p.add_argument("--var", choices=harness.SWEEP_VARS, required=True)
    p.add_argument("--points", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.func(args)


if __name__ == "__main__":
    main()
