"""Command line entry point: ``ppm-traceback run`` and ``ppm-traceback verify``."""
from __future__ import annotations

import argparse
import sys

from .experiment import OUT_DIR_ENV, ConfigError, ExperimentConfig, load_config, run_experiment
from .simulators import MODELS
from .verification import FULL, QUICK, format_table, run_checks

EXIT_USAGE = 2


def _workers(text):
    if text == "auto":
        return text
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("must be 'auto' or a positive integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be 'auto' or a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppm-traceback",
        description="Simulate the number of packets needed to reconstruct an attack path under edge sampling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write values + summary")
    run.add_argument("--config", help="JSON experiment config; command-line flags override its fields")
    run.add_argument("--model", choices=MODELS)
    run.add_argument("--n", type=int, help="path length (number of marking routers)")
    run.add_argument("--lambda", dest="lam", type=float, help="marking coefficient; p = lambda / n")
    run.add_argument("--M", type=int, help="number of trials")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=_workers, help="worker processes, or 'auto'")
    run.add_argument("--out", help=f"output directory (default: ${OUT_DIR_ENV} or ./results)")
    run.add_argument("--format", choices=("csv", "json"), help="per-trial values file format")
    run.add_argument("--plot-data", action="store_true", default=None,
                     help="also write histogram, ECDF and theory-curve CSVs")
    run.add_argument("--packet-mode", choices=("faithful", "fast"),
                     help="packet-level engine: route through every router, or draw marks directly")

    verify = sub.add_parser("verify", help="run the acceptance checks and print a PASS/FAIL table")
    verify.add_argument("--config", help="JSON config; only seed and workers are used")
    verify.add_argument("--quick", action="store_true", help="n=10^3, M=10^4 with widened tolerances")
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--workers", type=_workers, default=None)
    return parser


def _run_config(args) -> ExperimentConfig:
    base = load_config(args.config).to_dict() if args.config else ExperimentConfig().to_dict()
    overrides = {
        "model": args.model, "n": args.n, "lambda": args.lam, "M": args.M, "seed": args.seed,
        "workers": args.workers, "out": args.out, "format": args.format, "plot_data": args.plot_data,
        "packet_mode": args.packet_mode,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = _run_config(args)
            run_experiment(config)
            return 0

        seed, workers = 20240101, 1
        if args.config:
            cfg = load_config(args.config)
            seed, workers = cfg.seed, cfg.workers
        seed = args.seed if args.seed is not None else seed
        workers = args.workers if args.workers is not None else workers
        scale = QUICK if args.quick else FULL
        print(f"verify scale={scale.name} seed={seed}")
        results = run_checks(scale, seed, workers, echo=print)
        print(format_table(results))
        return 0 if all(r.passed for r in results) else 1
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
