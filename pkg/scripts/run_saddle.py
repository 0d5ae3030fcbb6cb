#!/usr/bin/env python3
"""Four-ended saddle: gluing, Newton refinement, nested-box index and density checks."""

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
    """Run configs/saddle.toml and check it."""
    config_path = sys.argv[1] if len(sys.argv) > 1 else "configs/saddle.toml"
    config = load_run_config(config_path, experiment="entire")

    try:
        report = run_experiment(config)
    except PhaseFieldError as e:
        logger.error(f"Run failed: {e}", exc_info=True)
        sys.exit(1)

    entire = report.entire
    logger.info(
        f"k={entire.k}, R={entire.R:.4f}: index {entire.index} >= {entire.index_bound} "
        f"({entire.index_passed}); nested {entire.nested_indices} on {entire.nested_half_widths}"
    )
    logger.info(
        f"Density ratio {entire.density_ratio:.4f}, asymptotic {entire.asymptotic_density_ratio}; "
        f"junction {entire.junction}; symmetry defect {entire.symmetry_defect}"
    )

    acceptance = evaluate_acceptance(config.output_dir)
    if not acceptance.passed:
        logger.error(f"Acceptance failed: {acceptance.failed()}")
        sys.exit(1)
    logger.info("All acceptance checks passed")


if __name__ == "__main__":
    main()
