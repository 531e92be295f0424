# tests/unit/infrastructure/test_experiment_controller.py
from unittest.mock import MagicMock

import pytest

from src.domain.entities.probe_table import ProbeTable
from src.infrastructure.adapters.input.cli.experiment_controller import REMOVABILITY_EPS, ExperimentController
from src.infrastructure.adapters.input.cli.schemas import ExperimentConfigSchema
from src.infrastructure.config.settings import Settings


# Fixtures
@pytest.fixture
def controller(tmp_path, monkeypatch):
    monkeypatch.setenv("PARCAP_CACHE", str(tmp_path / "calibration.json"))
    return ExperimentController(Settings(_env_file=None), output_dir=str(tmp_path / "runs"))


@pytest.fixture
def point_config():
    return ExperimentConfigSchema.model_validate({
        "name": "point",
        "N": 1,
        "q": 4.0,
        "set": {"variant": "point", "center": [0.0]},
        "grid": {"h": 0.005, "T": 0.1, "half_width": 2.0},
        "probes": [{"x": [0.0], "t": 0.1}],
    })


def _mock_services(controller, monkeypatch, values):
    report = ProbeTable(name="maximal", columns=["x", "t", "u"])
    for u in values:
        report.add_row(x=[0.0], t=0.1, u=u)
    singular = MagicMock()
    singular.maximal_solution.return_value = MagicMock(report=report)
    potential = MagicMock()
    potential.w_series.return_value = 0.0
    monkeypatch.setattr(controller, "_services_for", lambda config: (potential, singular))
    return singular


def test_removability_reports_threshold_without_asserting(controller, point_config, monkeypatch):
    """Test a value above the threshold is reported but does not fail the run"""
    # Setup
    _mock_services(controller, monkeypatch, [1.0, 0.5, 0.2, 0.1])

    # Execute
    payload, passed = controller.run_removability(point_config)

    # Assert
    threshold = payload["checks"]["below_threshold"]
    assert passed
    assert threshold["passed"] is False
    assert threshold["asserted"] is False
    assert threshold["value"] == 0.1
    assert threshold["eps"] == REMOVABILITY_EPS[-1]
    assert all(check["asserted"] for name, check in payload["checks"].items() if name != "below_threshold")


def test_removability_asserts_threshold_on_request(controller, point_config, monkeypatch):
    """Test --assert-threshold turns the threshold into a failing check"""
    _mock_services(controller, monkeypatch, [1.0, 0.5, 0.2, 0.1])
    payload, passed = controller.run_removability(point_config, assert_threshold=True)
    assert not passed
    assert payload["checks"]["below_threshold"]["asserted"] is True


def test_removability_passes_below_threshold(controller, point_config, monkeypatch):
    """Test a decreasing sequence under 1e-2 t^{-1/(q-1)} passes with the threshold asserted"""
    singular = _mock_services(controller, monkeypatch, [0.2, 0.1, 0.05, 0.01])
    payload, passed = controller.run_removability(point_config, assert_threshold=True)
    assert passed
    assert payload["checks"]["below_threshold"]["passed"] is True
    assert singular.maximal_solution.call_args.kwargs["eps_list"] == REMOVABILITY_EPS


def test_removability_fails_when_values_grow(controller, point_config, monkeypatch):
    """Test the asserted monotonicity check still decides the outcome"""
    _mock_services(controller, monkeypatch, [0.1, 0.2, 0.05, 0.01])
    payload, passed = controller.run_removability(point_config)
    assert not passed
    assert payload["checks"]["decreasing_in_eps"]["passed"] is False
