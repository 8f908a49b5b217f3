"""Command-line entry point: ``sparsebo run | report | demo-homotopy``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from sparsebo.harness.config import ExperimentConfig
from sparsebo.harness.reports import emit_reports, load_report

THREADS_ENV = "SPARSEBO_THREADS"


def _threads(arg):
    if arg is not None:
        return max(1, int(arg))
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


def cmd_run(args) -> int:
    from sparsebo.harness.runner import run_experiment

    loaded = ExperimentConfig.load(args.config)
    configs = loaded if isinstance(loaded, list) else [loaded]
    workers = _threads(args.threads)
    for cfg in configs:
        cfg = cfg.with_overrides(args.reps, args.seed_base)
        out = args.out if len(configs) == 1 else os.path.join(args.out, cfg.name)
        logging.info("running %s: %d replication(s) x %d trials", cfg.name, cfg.replications,
                     cfg.num_trials)
        report = run_experiment(cfg, workers=workers)
        for path in emit_reports(report, out):
            logging.info("wrote %s", path)
    return 0


def cmd_report(args) -> int:
    report = load_report(args.input)
    for path in emit_reports(report, args.out or args.input):
        logging.info("wrote %s", path)
    return 0


def cmd_demo(args) -> int:
    from sparsebo.harness.demo import homotopy_demo

    result = homotopy_demo(args.seed, args.seed)
    text = json.dumps(result, indent=1, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"candidate x = {result['x'][0]!r}, clamped dims = {result['clamped_dims']}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsebo", description="Sparsity-aware Bayesian optimization experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--reps", type=int, default=None, help="override the number of replications")
    run.add_argument("--seed-base", type=int, default=None, help="seeds become base, base+1, ...")
    run.add_argument("--threads", type=int, default=None,
                     help=f"parallel replications (default ${THREADS_ENV} or 1)")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="regenerate tables from a run directory")
    rep.add_argument("--in", dest="input", required=True)
    rep.add_argument("--out", default=None, help="output directory (default: the input directory)")
    rep.set_defaults(func=cmd_report)

    demo = sub.add_parser("demo-homotopy", help="1-D homotopy trace as JSON")
    demo.add_argument("--out", default=None)
    demo.add_argument("--seed", type=int, default=0)
    demo.set_defaults(func=cmd_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
