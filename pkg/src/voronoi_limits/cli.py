"""Command-line entry point: ``voronoi-limits <experiment> --seed S [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import EXPERIMENT_DEFAULTS, EXPERIMENTS, OUT_ENV, ConfigError, parse_config
from .experiments import run_experiment
from .report import write_report

HELP = {
    "figure31": "histograms of n*mu(L_n(x)) and n*mu(A_n(x))",
    "edges": "mean and second moment of edge counts of A_n(x) and P_n(x)",
    "ks": "KS distance between A_n(x) and P_n(x) statistics along an n-ladder",
    "diameter-tail": "tail of the scaled diameter of L_n(x)",
    "moments": "E[(n*mu(L_n(x)))^k] against its limit",
    "lebesgue": "KS between n*f(x)*lambda(L_n(x)) and n*mu(L_n(x))",
    "independence": "dependence of the cells containing two probes",
    "dk-sample": "draws of the limit variable D_k",
}


def _json_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc.msg}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _defaults_text(name):
    items = EXPERIMENT_DEFAULTS[name]
    return "defaults: " + ", ".join(f"{k}={json.dumps(v)}" for k, v in items.items())


def _add_common(p):
    p.add_argument("--config", metavar="PATH", help="JSON config file; flags override its values")
    p.add_argument("--seed", type=int, help="master seed, unsigned 64-bit (required here or in the config)")
    p.add_argument("--out", help=f"output directory (default results; env {OUT_ENV} also sets it)")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--check", action="store_true", help="exit 2 if any declared tolerance fails")
    p.add_argument("--d", type=int, help="dimension (default 2)")
    p.add_argument("--density", type=_json_arg, metavar="JSON",
                   help='density spec, e.g. \'{"kind": "gaussian", "sigma": 1}\' (default uniform on [-1,1]^d)')
    p.add_argument("--probe", type=_float_list, metavar="X,Y", help="probe point (default origin)")
    p.add_argument("--probes", type=_json_arg, metavar="JSON", help="two probe points as a JSON list")
    p.add_argument("--n", type=int, help="sample size")
    p.add_argument("--n-ladder", dest="n_ladder", type=_int_list, metavar="N1,N2,...", help="sample-size ladder")
    p.add_argument("--trials", type=int, help="independent trials per sample size")
    p.add_argument("--k", type=int, help="moment order / D_k index (default 1)")
    p.add_argument("--bin-width", dest="bin_width", type=float, help="histogram bin width (default 0.05)")
    p.add_argument("--t-grid", dest="t_grid", type=_float_list, metavar="T1,T2,...",
                   help="scaled-diameter thresholds")
    p.add_argument("--mc-samples", dest="mc_samples", type=int, help="Monte Carlo points per cell measure")
    p.add_argument("--n-outer", dest="n_outer", type=int, help="outer draws for the limiting moment")
    p.add_argument("--n-inner", dest="n_inner", type=int, help="inner points per Monte Carlo union volume")
    p.add_argument("--samples", type=int, help="number of D_k draws")
    p.add_argument("--statistic", choices=("edge_count", "area"), help="cell statistic for ks (default edge_count)")
    p.add_argument("--mu-method", dest="mu_method", choices=("exact", "mc"), help="cell-measure method")


CONTROL = ("config", "threads", "check", "command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voronoi-limits",
                                     description="Monte Carlo experiments on random Voronoi cells.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name], epilog=_defaults_text(name))
        _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in CONTROL}
    overrides["experiment"] = args.command
    try:
        cfg = parse_config(args.config, overrides, env=os.environ)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.threads is not None and args.threads < 1:
        print("error: threads: must be a positive integer", file=sys.stderr)
        return 1
    report = run_experiment(cfg, threads=args.threads)
    out = write_report(report, cfg.out)
    for c in report.checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']} {c['relation']} {c['threshold']}")
    print(f"wrote {out}")
    if args.check and not report.passed:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
