"""``simulate`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .config import ConfigError, load_config, parse_schemes
from .sweep import emit_csv, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Monte-Carlo spectral-efficiency sweep of robust and non-robust hybrid/fully-digital designs.",
    )
    parser.add_argument("--config", required=True, help="JSON file whose keys are SystemConfig field names")
    parser.add_argument("--sweep", choices=("snr", "nrf"), help="x-axis of the sweep")
    parser.add_argument("--trials", type=int, help="channel realizations per sweep point")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", default="results.csv", help="output CSV path (default: %(default)s)")
    parser.add_argument("--schemes", help="comma-separated subset of r-hyb,nr-hyb,r-db,nr-db")
    parser.add_argument("--workers", type=int, default=1, help="worker processes (default: %(default)s)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    try:
        schemes = parse_schemes(args.schemes) if args.schemes else None
        config = load_config(args.config, sweep=args.sweep, trials=args.trials, seed=args.seed, schemes=schemes)
        if args.sweep == "snr" and len(config.n_rf_list) > 1 or args.sweep == "nrf" and len(config.snr_db_list) > 1:
            raise ConfigError(f"--sweep {args.sweep} conflicts with the lists in {args.config}")
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        results = run_sweep(config, workers=args.workers)
        path = emit_csv(results, args.out)
    except (ConfigError, OSError) as exc:
        print(f"simulate: error: {exc}", file=sys.stderr)
        return 2
    logging.getLogger(__name__).info("wrote %d rows to %s", len(results), path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
