"""Unit tests for configuration loading, acceptance checks and the command line."""

import json
import math
from pathlib import Path

import pandas as pd
import pytest

from cli.acceptance import entire_checks, minmax_checks
from cli.config import RunConfig, config_hash, load_run_config
from cli.main import EXIT_INVALID, EXIT_OK, main
from cli.models import AcceptanceReport, EntireRecord, EpsilonRecord
from phasefield.exceptions import ConfigValidationError

CONFIGS = Path(__file__).parents[2] / "configs"


def test_load_sphere_run_file():
    """Test the shipped sphere run file loads with its values."""
    cfg = load_run_config(CONFIGS / "run.toml")
    assert cfg.experiment == "minmax"
    assert cfg.surface.kind == "sphere"
    assert cfg.surface.resolution == 6
    assert cfg.epsilon_schedule == [0.2, 0.1, 0.05]
    assert cfg.varifold.monotonicity_m == 1.0


def test_load_saddle_run_file():
    """Test the shipped saddle run file loads the entire block."""
    cfg = load_run_config(CONFIGS / "saddle.toml")
    assert cfg.experiment == "entire"
    assert cfg.entire.nested == [8.0, 12.0, 16.0]
    assert cfg.entire.symmetry == ("reflect_x", -1)
    assert cfg.entire.resolution == 128


@pytest.mark.parametrize("schedule", [[], [0.1, 0.2], [0.1, 0.1], [0.1, -0.05]])
def test_schedule_must_decrease(schedule):
    """Test empty, increasing, repeated and negative schedules are rejected."""
    with pytest.raises(ConfigValidationError):
        load_run_config(epsilon_schedule=schedule)


def test_missing_file_and_unknown_field(tmp_path):
    """Test a missing run file and an unknown key are configuration errors."""
    with pytest.raises(ConfigValidationError):
        load_run_config(tmp_path / "absent.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text('experiment = "minmax"\nflavour = "vanilla"\n')
    with pytest.raises(ConfigValidationError):
        load_run_config(bad)


def test_environment_overrides_file(monkeypatch):
    """Test PHASEFIELD_* variables beat the file and keyword overrides beat both."""
    monkeypatch.setenv("PHASEFIELD_MINMAX__NODES", "25")
    monkeypatch.setenv("PHASEFIELD_SEED", "7")
    cfg = load_run_config(CONFIGS / "run.toml")
    assert cfg.minmax.nodes == 25
    assert cfg.seed == 7
    assert load_run_config(CONFIGS / "run.toml", seed=3).seed == 3


def test_config_hash_is_deterministic():
    """Test equal configurations hash equally and the seed changes the hash."""
    a = load_run_config(CONFIGS / "run.toml")
    b = load_run_config(CONFIGS / "run.toml")
    assert config_hash(a) == config_hash(b)
    assert len(config_hash(a)) == 64
    assert config_hash(load_run_config(CONFIGS / "run.toml", seed=1)) != config_hash(a)


def test_entire_resolution_is_even():
    """Test the box cell count follows 2L/h rounded up to an even number."""
    cfg = load_run_config(entire={"box": 16.0, "h": 0.25})
    assert cfg.entire.resolution == 128
    cfg = load_run_config(entire={"box": 1.0, "h": 0.3})
    assert cfg.entire.resolution == 8


def test_minmax_settings_map_to_options():
    """Test run-file minmax settings become solver options."""
    options = load_run_config(CONFIGS / "run.toml").minmax.to_options()
    assert options.nodes == 17
    assert options.step == 0.5
    assert options.newton.tol == 1e-8
    assert options.newton.max_iters == 50


def _record(epsilon: float, xi: float, **extra) -> EpsilonRecord:
    values = dict(
        epsilon=epsilon,
        field_artifact=f"field_eps_{epsilon:g}",
        energy=2.0 * math.pi,
        residual=1e-10,
        index=1,
        nullity=0,
        h_max=0.02,
        xi_l1=xi,
        xi_l1_relative=xi,
        hausdorff_to_great_circle=0.01,
    )
    values.update(extra)
    return EpsilonRecord(**values)


def test_minmax_checks_pass():
    """Test a converging sphere run passes every check."""
    cfg = RunConfig()
    records = [_record(0.2, 0.3), _record(0.1, 0.2), _record(0.05, 0.1)]
    checks = minmax_checks(records, cfg, 1.0, cfg.acceptance)
    report = AcceptanceReport(run_dir="runs/x", checks=checks)
    assert report.passed
    assert {c.name for c in checks} == {
        "residual",
        "index",
        "energy_vs_great_circle",
        "great_circle_hausdorff",
        "discrepancy_decreasing",
    }


def test_minmax_checks_fail():
    """Test a high index, growing discrepancy and far level set are reported."""
    cfg = RunConfig()
    records = [_record(0.2, 0.1), _record(0.1, 0.2, index=3, hausdorff_to_great_circle=0.5)]
    report = AcceptanceReport(
        run_dir="runs/x", checks=minmax_checks(records, cfg, 1.0, cfg.acceptance)
    )
    assert not report.passed
    assert set(report.failed()) == {"index", "great_circle_hausdorff", "discrepancy_decreasing"}
    assert minmax_checks([], cfg, 1.0, cfg.acceptance)[0].passed is False


def _saddle_record() -> EntireRecord:
    return EntireRecord(
        field_artifact="field_entire",
        k=2,
        R=2.9,
        box=16.0,
        h_max=0.36,
        residual=1e-9,
        newton_iterations=4,
        index=2,
        index_bound=1,
        index_passed=True,
        nullity=0,
        nested_indices=[1, 1, 2],
        nodal_domains=4,
        euler_consistent=True,
        jacobi_sign_pattern="+-",
        jacobi_changes_sign=True,
        density_ratio=1.62,
        density_radius=10.0,
        density_core_deficit=3.8,
        asymptotic_density_ratio=2.02,
        junction="transverse_crossing",
    )


def test_entire_checks():
    """Test the saddle checks, including density window and junction type."""
    cfg = RunConfig()
    record = _saddle_record()
    assert all(c.passed for c in entire_checks(record, cfg.acceptance))
    bad = record.model_copy(update={"nested_indices": [2, 1], "junction": "other"})
    failed = {c.name for c in entire_checks(bad, cfg.acceptance) if not c.passed}
    assert failed == {"nested_index_monotone", "junction"}


def test_entire_checks_jacobi_nodal_domains():
    """Test a Jacobi field with one nodal domain or a single sign fails its checks."""
    record = _saddle_record()
    single = record.model_copy(update={"nodal_domains": 1, "jacobi_changes_sign": False})
    failed = {c.name for c in entire_checks(single, RunConfig().acceptance) if not c.passed}
    assert failed == {"jacobi_nodal_domains", "jacobi_changes_sign"}


def test_entire_checks_raw_density_core_deficit():
    """Test the raw ratio passes with a bounded 1/r deficit and fails with a large one."""
    limits = RunConfig().acceptance
    record = _saddle_record()
    checks = {c.name: c for c in entire_checks(record, limits)}
    assert checks["raw_density"].passed
    assert checks["raw_density"].value == 1.62
    far = record.model_copy(update={"density_ratio": 1.2, "density_core_deficit": 8.0})
    assert not {c.name: c for c in entire_checks(far, limits)}["raw_density"].passed
    excess = record.model_copy(update={"density_ratio": 2.1, "density_core_deficit": -1.0})
    assert not {c.name: c for c in entire_checks(excess, limits)}["raw_density"].passed


def test_potential_check_command(capsys):
    """Test potential-check prints a passing report with sigma."""
    assert main(["potential-check"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["passed"] is True
    assert payload["constants"]["sigma"] == pytest.approx(2.0 * math.sqrt(2.0) / 3.0)


def test_potential_check_rejects_bad_input(capsys):
    """Test an unknown name and shifted wells exit with code 2."""
    assert main(["potential-check", "--potential", "octic"]) == EXIT_INVALID
    # wells lifted to W(+-1) = 0.05
    code = main(["potential-check", "--coefficients", "0.3", "0", "-0.5", "0", "0.25"])
    assert code == EXIT_INVALID
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_heteroclinic_command(tmp_path):
    """Test the profile table is written with its three columns."""
    out = tmp_path / "profile.csv"
    assert main(["heteroclinic", "--half-width", "8", "--output", str(out)]) == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns) == ["s", "H", "Hprime"]
    assert table["H"].is_monotonic_increasing


def test_report_on_missing_run(tmp_path):
    """Test the report command exits with code 2 when the run is missing."""
    assert main(["report", "--run", str(tmp_path / "nothing")]) == EXIT_INVALID


def test_subcommand_required():
    """Test argparse exits with code 2 without a subcommand."""
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_entire_end_count_must_match_angles():
    """Test --ends is checked against the number of angles before any solve."""
    code = main(["entire", "--ends", "6", "--angles", "0", "1", "2", "3"])
    assert code == EXIT_INVALID
