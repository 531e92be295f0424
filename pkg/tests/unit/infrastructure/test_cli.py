# tests/unit/infrastructure/test_cli.py
import json

import pytest
from click.testing import CliRunner

from src.infrastructure.adapters.input.cli.cli import parcap
from src.infrastructure.config.settings import get_settings


# Fixtures
@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("PARCAP_CACHE", str(tmp_path / "calibration.json"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def _invoke(runner, tmp_path, *args):
    return runner.invoke(parcap, ["--output-dir", str(tmp_path / "runs"), *args])


def _payload(output: str):
    return json.loads(output[output.index("{"):])


def test_unknown_option_is_usage_error(runner, tmp_path):
    """Test a bad flag exits with 1"""
    result = _invoke(runner, tmp_path, "capacity", "--bogus")
    assert result.exit_code == 1


def test_unknown_sweep_is_usage_error(runner, tmp_path):
    """Test a missing sweep version exits with 1"""
    result = _invoke(runner, tmp_path, "appendix", "--lemma", "kernel", "--sweep", "v999")
    assert result.exit_code == 1
    assert "Unknown sweep version" in result.output


def test_bad_config_file_is_usage_error(runner, tmp_path):
    """Test an invalid experiment file exits with 1"""
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"name": "x", "N": 1, "q": 4.0, "set": {"variant": "torus"}}))
    result = _invoke(runner, tmp_path, "potential", "--config", str(config))
    assert result.exit_code == 1


def test_appendix_kernel_passes(runner, tmp_path):
    """Test the kernel maximum against its grid search over the default sweep"""
    result = _invoke(runner, tmp_path, "appendix", "--lemma", "kernel")
    assert result.exit_code == 0, result.output
    payload = _payload(result.output)
    assert payload["passed"]
    assert payload["tuples"] == 20
    assert payload["max_relative"] <= 5e-3
    assert (tmp_path / "runs" / "appendix" / "kernel.csv").exists()


def test_golden_identical_passes(runner, tmp_path):
    """Test comparing a file with itself exits with 0"""
    output = tmp_path / "out.json"
    output.write_text(json.dumps({"max_ratio": 1.5, "rows": [1.0, 2.0]}))
    result = _invoke(runner, tmp_path, "golden", str(output), str(output))
    assert result.exit_code == 0


def test_golden_perturbed_fails_and_names_field(runner, tmp_path):
    """Test a perturbed value exits with 2 and names the field"""
    output = tmp_path / "out.json"
    golden = tmp_path / "gold.json"
    output.write_text(json.dumps({"max_ratio": 1.5, "rows": [1.0, 2.0]}))
    golden.write_text(json.dumps({"max_ratio": 1.5, "rows": [1.0, 2.1]}))
    result = _invoke(runner, tmp_path, "golden", str(output), str(golden))
    assert result.exit_code == 2
    assert "rows[1]" in result.output


def test_golden_field_tolerance_accepts_loose_field(runner, tmp_path):
    """Test --field-rtol loosens one field and leaves the others strict"""
    # Setup
    output = tmp_path / "out.json"
    golden = tmp_path / "gold.json"
    output.write_text(json.dumps({"W_series": 1.05, "max_ratio": 1.5}))
    golden.write_text(json.dumps({"W_series": 1.0, "max_ratio": 1.5}))

    # Execute
    loose = _invoke(runner, tmp_path, "golden", str(output), str(golden), "--field-rtol", "W_series=0.1")
    strict = _invoke(runner, tmp_path, "golden", str(output), str(golden), "--field-rtol", "max_ratio=0.1")

    # Assert
    assert loose.exit_code == 0, loose.output
    assert _payload(loose.output)["field_rtol"] == {"W_series": 0.1}
    assert strict.exit_code == 2
    assert "W_series" in strict.output


def test_golden_field_tolerance_from_environment(runner, tmp_path, monkeypatch):
    """Test GOLDEN_FIELD_RTOL supplies per-field tolerances"""
    monkeypatch.setenv("GOLDEN_FIELD_RTOL", json.dumps({"W_series": 0.1}))
    get_settings.cache_clear()
    output = tmp_path / "out.json"
    golden = tmp_path / "gold.json"
    output.write_text(json.dumps({"W_series": 1.05}))
    golden.write_text(json.dumps({"W_series": 1.0}))
    result = _invoke(runner, tmp_path, "golden", str(output), str(golden))
    assert result.exit_code == 0, result.output


def test_golden_bad_field_tolerance_is_usage_error(runner, tmp_path):
    """Test a malformed --field-rtol exits with 1"""
    output = tmp_path / "out.json"
    output.write_text(json.dumps({"W_series": 1.0}))
    result = _invoke(runner, tmp_path, "golden", str(output), str(output), "--field-rtol", "W_series")
    assert result.exit_code == 1


def test_golden_missing_file_is_usage_error(runner, tmp_path):
    """Test a missing golden file exits with 1"""
    result = _invoke(runner, tmp_path, "golden", str(tmp_path / "nope.json"), str(tmp_path / "nope.json"))
    assert result.exit_code == 1


@pytest.mark.slow
def test_appendix_spherical_passes(runner, tmp_path):
    """Test the spherical integral closed forms, recursion and envelopes"""
    result = _invoke(runner, tmp_path, "appendix", "--lemma", "spherical")
    assert result.exit_code == 0, result.output


@pytest.mark.slow
def test_appendix_integral_passes(runner, tmp_path):
    """Test the two-sided Gaussian integral sweep"""
    result = _invoke(runner, tmp_path, "appendix", "--lemma", "integral", "--sweep", "default")
    assert result.exit_code == 0, result.output
    assert _payload(result.output)["max_peak_error"] < 1e-6


@pytest.mark.slow
def test_appendix_slices_passes(runner, tmp_path):
    """Test the slice-measure heat potentials stay between their shell weights"""
    result = _invoke(runner, tmp_path, "appendix", "--lemma", "slices")
    assert result.exit_code == 0, result.output
    payload = _payload(result.output)
    assert payload["probes"] == 6
    assert 1.0 - 1e-6 <= payload["min_ratio"] <= payload["max_ratio"]
    assert (tmp_path / "runs" / "appendix" / "slices.csv").exists()


@pytest.mark.slow
def test_sandwich_ball_passes(runner, tmp_path):
    """Test u_F / W_F is bounded and stable under refinement for the unit interval, q = 4"""
    result = _invoke(runner, tmp_path, "sandwich", "--set", "ball", "--N", "1", "--q", "4")
    assert result.exit_code == 0, result.output


@pytest.mark.slow
def test_envelope_ball_passes(runner, tmp_path):
    """Test the σ-moderate envelope reaches a third of the maximal solution"""
    result = _invoke(runner, tmp_path, "sandwich", "--set", "ball", "--N", "1", "--q", "4", "--check", "envelope")
    assert result.exit_code == 0, result.output


@pytest.mark.slow
def test_potential_equivalence_passes(runner, tmp_path):
    """Test W_series and W_integral stay comparable under refinement"""
    result = _invoke(runner, tmp_path, "potential", "--set", "ball", "--N", "1", "--q", "4")
    assert result.exit_code == 0, result.output


@pytest.mark.slow
def test_local_capacity_check_passes(runner, tmp_path):
    """Test the local capacity sweep of a ball stays under its fitted envelope"""
    result = _invoke(runner, tmp_path, "capacity", "--set", "ball", "--radius", "0.5", "--check", "local")
    assert result.exit_code == 0, result.output
    payload = _payload(result.output)
    assert payload["summary"]["fitted_at"] == 0.5
    assert payload["summary"]["growth"] <= payload["summary"]["envelope_growth"] * (1.0 + 1e-3)
