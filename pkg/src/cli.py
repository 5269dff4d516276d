"""
Command-line entry point: ``annuli <experiment> [options]``.

Exit codes: 0 when every tolerance check passes, 1 when a check fails or an
agent errors, 2 for usage and domain errors, 3 when a resource budget is
exceeded.
"""

import argparse
import logging
import sys
from typing import List, Optional

from . import __version__
from .pipeline import run_experiment
from .utils.config_loader import EXPERIMENTS, load_config, resolve_config, setup_logging
from .utils.errors import DomainError, ResourceError, UsageError

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="annuli",
        description="Lattice points in thin elliptic annuli: experiments and consistency checks.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS, help="Experiment to run.")
    p.add_argument("--config", default=None, help="YAML configuration (default: configs/experiment_config.yaml).")
    p.add_argument("--alpha", default=None, help="Aspect ratio α or a preset name (e, sqrt2, two_pow_quarter, golden).")
    p.add_argument("--T", type=float, default=None, dest="T", help="Ensemble scale T.")
    p.add_argument("--L", type=float, default=None, dest="L", help="Inverse annulus width L.")
    p.add_argument("--M", type=float, default=None, dest="M", help="Smoothness parameter M (default: L³).")
    p.add_argument("--samples", type=int, default=None, dest="n_samples", help="Ensemble size.")
    p.add_argument("--seed", type=int, default=None, help="Root seed.")
    p.add_argument("--out", default=None, dest="out_dir", help="Output directory.")
    p.add_argument("--threads", type=int, default=None, help="Worker threads (overrides ANNULI_THREADS).")
    p.add_argument("--progress", action="store_true", default=None, help="Show progress bars.")
    p.add_argument("--verbose", "-v", action="store_true", help="Debug logging.")
    p.add_argument("--version", action="version", version=f"annuli {__version__}")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logger = logging.getLogger("ExperimentPipeline")
    try:
        raw = load_config(args.config)
        logger = setup_logging(raw, "DEBUG" if args.verbose else None)
        overrides = {
            "alpha": args.alpha,
            "T": args.T,
            "L": args.L,
            "M": args.M,
            "n_samples": args.n_samples,
            "seed": args.seed,
            "out_dir": args.out_dir,
            "threads": args.threads,
            "progress": args.progress,
        }
        config = resolve_config(args.experiment, raw, overrides)
        outcome = run_experiment(config, logger)
    except (UsageError, DomainError) as e:
        logger.error(str(e))
        print(f"annuli: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceError as e:
        logger.error(str(e))
        print(f"annuli: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except RuntimeError:
        return EXIT_CHECKS_FAILED

    return EXIT_OK if outcome['passed'] else EXIT_CHECKS_FAILED


if __name__ == "__main__":
    sys.exit(main())
