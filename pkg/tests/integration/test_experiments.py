"""End-to-end runs on small meshes."""

import json
from pathlib import Path

import numpy as np
import pytest

from cli.acceptance import evaluate_acceptance
from cli.config import load_run_config
from cli.main import EXIT_OK, main
from cli.pipeline import load_run, run_experiment
from phasefield.analysis.levelset import extract_level_set
from phasefield.solver.energy import energy
from phasefield.solver.minmax import periodic_band
from phasefield.solver.newton import NewtonOptions, newton_refine
from tests.conftest import AXIS_ANGLES

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def sphere_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sphere")
    config = load_run_config(
        output_dir=str(out),
        epsilon_schedule=[0.4, 0.3],
        surface={"kind": "sphere", "resolution": 3, "params": {"radius": 1.0}},
        minmax={"nodes": 9, "max_iters": 60, "reparam_every": 5},
        spectrum={"q": 4},
        varifold={"probe_radii": [0.25, 0.5]},
    )
    return config, run_experiment(config)


@pytest.fixture(scope="module")
def saddle_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("saddle")
    config = load_run_config(
        experiment="entire",
        output_dir=str(out),
        entire={
            "angles": AXIS_ANGLES,
            "box": 8.0,
            "h": 0.25,
            "nested": [4.0, 6.0, 8.0],
            "density_radii": [3.0, 4.0, 5.0, 6.0],
            "symmetry": ["swap", 1],
        },
    )
    return config, run_experiment(config)


def test_sphere_minmax_run(sphere_run):
    """Test every epsilon step yields a converged critical point and its artifacts."""
    config, report = sphere_run
    assert report.complete
    assert [r.epsilon for r in report.records] == [0.4, 0.3]
    for record in report.records:
        assert record.residual <= 1e-8
        assert record.index is not None
        assert record.energy > 0
    manifest = json.loads((Path(config.output_dir) / "manifest.json").read_text())
    assert manifest["complete"] is True
    assert "field_eps_0.3" in manifest["artifacts"]
    assert "levelset_eps_0.3" in manifest["artifacts"]


def test_stored_sphere_run_reopens(sphere_run):
    """Test a finished run rebuilds its mesh and returns the finest field."""
    config, _ = sphere_run
    run = load_run(config.output_dir)
    u = run.field()
    assert u.epsilon == 0.3
    assert u.mesh_id == run.mesh.mesh_id
    assert run.config.epsilon_schedule == [0.4, 0.3]


def test_acceptance_on_sphere_run(sphere_run):
    """Test the acceptance report is written with the residual check passing."""
    config, _ = sphere_run
    result = evaluate_acceptance(config.output_dir)
    checks = {c.name: c for c in result.checks}
    assert checks["complete"].passed
    assert checks["residual"].passed
    assert "energy_vs_great_circle" in checks


def test_diagnostic_commands_on_stored_run(sphere_run, tmp_path, capsys):
    """Test index, levelset and density commands work on a finished run."""
    config, _ = sphere_run
    assert main(["index", "--run", config.output_dir]) == EXIT_OK
    assert "index" in json.loads(capsys.readouterr().out)
    curves_csv = tmp_path / "curves.csv"
    assert main(["levelset", "--run", config.output_dir, "--output", str(curves_csv)]) == EXIT_OK
    assert curves_csv.exists()
    assert main(["density", "--run", config.output_dir, "--center", "0", "0", "1"]) == EXIT_OK
    assert "ratio" in json.loads(capsys.readouterr().out)


def test_saddle_entire_run(saddle_run):
    """Test the refined saddle meets the index bound and keeps its symmetry."""
    config, report = saddle_run
    assert report.complete
    record = report.entire
    assert record.k == 2
    assert record.balanced
    assert record.residual <= 1e-8
    assert record.index_passed
    assert record.nested_indices == sorted(record.nested_indices)
    assert record.euler_consistent
    assert record.nodal_domains >= 2
    assert record.jacobi_changes_sign
    assert record.asymptotic_density_ratio == pytest.approx(2.0, abs=0.05)
    assert record.density_core_deficit > 0.0
    assert record.junction == "transverse_crossing"
    assert record.symmetry_defect < 1e-6
    nodal = json.loads((Path(config.output_dir) / "nodal.json").read_text())
    assert nodal["domain_count"] == 4


def test_flat_torus_band_refines(flat_torus, quartic, profile):
    """Test Newton turns the glued band into a critical point of energy 2 sigma."""
    mesh, ops = flat_torus
    band = periodic_band(mesh, 0.1, profile)
    result = newton_refine(band, ops, quartic, NewtonOptions(tol=1e-9))
    assert result.residual <= 1e-9
    sigma = 2.0 * np.sqrt(2.0) / 3.0
    assert energy(result.solution, ops, quartic) == pytest.approx(2.0 * sigma, rel=0.05)
    curves = extract_level_set(result.solution.values, mesh, 0.0)
    assert curves.n_curves == 2
    assert curves.total_length == pytest.approx(2.0, rel=0.02)
