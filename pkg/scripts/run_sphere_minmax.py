#!/usr/bin/env python3
"""Sphere min-max continuation followed by the acceptance report."""

import sys
import logging
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from cli.acceptance import evaluate_acceptance
from cli.config import load_run_config
from cli.pipeline import run_experiment
from phasefield.exceptions import PhaseFieldError

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


def main():
    """Run configs/run.toml and check it."""
    config_path = sys.argv[1] if len(sys.argv) > 1 else "configs/run.toml"
    config = load_run_config(config_path, experiment="minmax")

    try:
        report = run_experiment(config)
    except PhaseFieldError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        sys.exit(1)

    for record in report.records:
        logger.info(
            f"eps={record.epsilon:g}: E={record.energy:.5f} index={record.index} "
            f"length={record.level_set_length:.4f} xi/E={record.xi_l1_relative:.4f}"
        )

    acceptance = evaluate_acceptance(config.output_dir)
    if not acceptance.passed:
        logger.error(f"Acceptance failed: {acceptance.failed()}")
        sys.exit(1)
    logger.info("All acceptance checks passed")


if __name__ == "__main__":
    main()
