#!/usr/bin/env python3
"""
Demo script for the annuli pipeline

Runs the cheap experiments (spectrum, zeta_check, dioph_scan) with the
repository configuration and prints each report summary.
"""

import sys
from pathlib import Path

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from src.pipeline import ExperimentPipeline
from src.utils.config_loader import load_config, resolve_config, setup_logging
from src.utils.report_formatter import format_summary

DEMO_EXPERIMENTS = ("spectrum", "zeta_check", "dioph_scan")


def main():
    """Run demo pipeline."""
    print("annuli Pipeline Demo")
    print("=" * 50)

    raw = load_config(project_root / "configs" / "experiment_config.yaml")
    logger = setup_logging(raw, "WARNING")

    exit_code = 0
    for experiment in DEMO_EXPERIMENTS:
        config = resolve_config(experiment, raw, {"out_dir": str(project_root / "outputs" / "demo" / experiment)})
        print(f"\nRunning {experiment} (α = {config.alpha})...")
        pipeline = ExperimentPipeline(config, logger)
        outcome = pipeline.run()
        print(format_summary(outcome['report']))
        for name, path in outcome['artifacts'].items():
            print(f"  {name}: {path}")
        if not outcome['passed']:
            exit_code = 1

    print("\nDemo completed!")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
