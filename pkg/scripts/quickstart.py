#!/usr/bin/env python3
"""Quick start: potential, profile and the constant-state spectrum on the unit sphere."""

import sys
import logging
from pathlib import Path

import numpy as np

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from phasefield.mesh.operators import assemble_operators
from phasefield.mesh.surface import build_surface
from phasefield.model.heteroclinic import eval_profile, solve_heteroclinic
from phasefield.model.potential import get_potential, interface_constants, validate_potential
from phasefield.solver.energy import PhaseField
from phasefield.solver.spectrum import morse_index

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
logger = logging.getLogger(__name__)


def main():
    """Run the cheap oracles end to end."""
    p = get_potential("quartic")
    report = validate_potential(p)
    if not report.passed:
        logger.error(f"Quartic potential fails {report.failed()}")
        sys.exit(1)

    constants = interface_constants(p)
    logger.info(f"sigma = {constants.sigma:.12f} (2 sqrt(2)/3 = {2 * np.sqrt(2) / 3:.12f})")

    profile = solve_heteroclinic(p)
    s = np.linspace(-10.0, 10.0, 2001)
    error = np.max(np.abs(eval_profile(profile, s) - np.tanh(s / np.sqrt(2.0))))
    logger.info(f"Profile sup error against tanh(s/sqrt 2): {error:.2e}")

    mesh = build_surface("sphere", 4)
    ops = assemble_operators(mesh)
    zero = PhaseField(values=np.zeros(mesh.n_vertices), epsilon=1.0, mesh_id=mesh.mesh_id)
    summary = morse_index(zero, ops, p, q=6)
    logger.info(
        f"u = 0 on the unit sphere: index {summary.index}, nullity {summary.nullity}, "
        f"lowest {np.round(summary.lowest_eigenvalues[:4], 4).tolist()} (expected -1, 1, 1, 1)"
    )
    if summary.index != 1 or summary.nullity != 0:
        logger.error("Spectral oracle failed")
        sys.exit(1)

    logger.info("Quick start complete. Next: phasefield minmax --config configs/run.toml")


if __name__ == "__main__":
    main()
