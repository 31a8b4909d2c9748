"""Command-line entry point: ``trustregion {solve,sweep,verify,oracle}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import InputError
from .runner import EXIT_INVALID, ExperimentConfig, run_experiment, verify_bundle

EPILOG = """\
tasks (config "task" field):
  binary-trust   utility, tau, alpha|alphas      -> binary_trust.csv  alpha,lo,hi,cutoff
  binary-action  distribution, alpha|alphas      -> binary_action.csv alpha,alpha_hat,regime,
                                                    sigma_low,sigma_high,value
  spherical      instance, alpha|alphas          -> spherical.csv     alpha,r_star,residual
  mva            matrix_csv|matrix|construct     -> mva.csv           alpha_star,rank,n_states,
                 [random_audit]                                       n_signals
                                                    mva_audit.csv     index,n_states,n_signals,
                                                                      rank,alpha_star,within_bounds
  oracle         game (JSON path), [alpha|alphas] -> oracle.csv       alpha,value,u0,v,
                                                                      exploit_agent,exploit_adversary
  sweep          target, alphas                  -> sweep_<target>.csv (target's columns)
  verify-tre     [bundle]                        re-checks an emitted bundle

CSV files use ',' separators, '.' decimals, LF line endings and %.6g numbers.
JSON artifacts carry schema_version "1". Numeric config fields accept decimal
strings. Exit status: 0 ok, 1 verification failed, 2 invalid input, 3 solver error.
Set TRUST_REGION_LOG=error|info|debug to control logging.
"""


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--out", metavar="DIR", help="artifact directory")
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="parallel workers for sweeps (default 1)")
    common.add_argument("--seed", type=int, metavar="N", help="seed for randomized audits")
    common.add_argument("--tolerance", type=float, metavar="X",
                        help="override the default tolerance where a solver permits")
    p = argparse.ArgumentParser(prog="trustregion", epilog=EPILOG,
                                formatter_class=argparse.RawDescriptionHelpFormatter,
                                description="Optimal trust regions for advice from a possibly "
                                            "misaligned adviser.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("solve", "run the config's task"),
                       ("sweep", "run an alpha sweep (task 'sweep' or a sweepable task)"),
                       ("verify", "re-verify an artifact bundle (--out or config bundle)"),
                       ("oracle", "solve a finite game exactly")):
        sub.add_parser(name, parents=[common], help=text, epilog=EPILOG,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return p


def _configure_logging():
    level = os.environ.get("TRUST_REGION_LOG", "error").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    args = _parser().parse_args(argv)
    if args.command == "verify" and args.config is None:
        if args.out is None:
            print("validation error: verify needs --out DIR or --config", file=sys.stderr)
            return EXIT_INVALID
        report = verify_bundle(args.out, tolerance=args.tolerance)
        for line in report.lines():
            print(line)
        return report.status
    if args.config is None:
        print("validation error: --config is required", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = ExperimentConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.tolerance is not None:
            cfg.tolerance = args.tolerance
        if args.command == "verify":
            cfg.task = "verify-tre"
        elif args.command == "oracle" and cfg.task != "oracle":
            raise InputError(f"config.task: 'oracle' command needs task 'oracle', got {cfg.task!r}")
        elif args.command == "sweep" and cfg.task != "sweep":
            if cfg.task not in ("binary-trust", "binary-action", "spherical"):
                raise InputError(f"config.task: task {cfg.task!r} cannot be swept")
            cfg.params["target"] = cfg.task
            cfg.task = "sweep"
    except InputError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = run_experiment(cfg, out=args.out, jobs=args.jobs)
    if result.message:
        print(result.message, file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
