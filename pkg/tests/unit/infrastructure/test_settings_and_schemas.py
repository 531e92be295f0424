# tests/unit/infrastructure/test_settings_and_schemas.py
import pytest
from pydantic import ValidationError

from src.application.mappers.closed_set_mapper import ClosedSetMapper
from src.domain.value_objects.closed_set import Ball, Union
from src.infrastructure.adapters.input.cli.schemas import ExperimentConfigSchema
from src.infrastructure.config.settings import Settings


# Fixtures
@pytest.fixture
def experiment_payload():
    return {
        "name": "demo",
        "N": 1,
        "q": 4.0,
        "set": {"variant": "union", "members": [
            {"variant": "ball", "center": [-1.0], "radius": 0.5},
            {"variant": "point", "center": [1.0]},
        ]},
        "grid": {"h": 0.02, "T": 0.2, "half_width": 4.0},
        "probes": [{"x": [0.0], "t": 0.1}],
    }


def test_settings_defaults():
    """Test the documented defaults"""
    settings = Settings(_env_file=None)
    assert settings.CAPACITY_BESSEL_MASS == pytest.approx(1.0 / 32.0)
    assert settings.K_LIST == [1e2, 1e4, 1e6, 1e8]
    assert settings.SWEEP_VERSION == "v1"


def test_settings_from_environment(monkeypatch):
    """Test environment variables override the defaults"""
    monkeypatch.setenv("LOG_LEVEL", "debug")
    monkeypatch.setenv("PARCAP_CACHE", "/tmp/calibration.json")
    settings = Settings(_env_file=None)
    assert settings.LOG_LEVEL == "DEBUG"
    assert settings.PARCAP_CACHE == "/tmp/calibration.json"


def test_settings_reject_decreasing_k_list():
    """Test K_LIST must increase"""
    with pytest.raises(ValidationError):
        Settings(_env_file=None, K_LIST=[10.0, 1.0])


def test_settings_golden_field_tolerances(monkeypatch):
    """Test GOLDEN_FIELD_RTOL is read as JSON and rejects negative tolerances"""
    monkeypatch.setenv("GOLDEN_FIELD_RTOL", '{"W_series": 0.1}')
    assert Settings(_env_file=None).GOLDEN_FIELD_RTOL == {"W_series": 0.1}
    with pytest.raises(ValidationError):
        Settings(_env_file=None, GOLDEN_FIELD_RTOL={"W_series": -1.0})


def test_experiment_schema_maps_to_sets(experiment_payload):
    """Test a validated experiment maps to a union of sets"""
    config = ExperimentConfigSchema.model_validate(experiment_payload)
    spec = ClosedSetMapper.to_entity(config.set.model_dump())
    assert isinstance(spec, Union)
    assert spec.members[0] == Ball((-1.0,), 0.5)


def test_experiment_schema_rejects_unknown_fields(experiment_payload):
    """Test typos in the config are errors"""
    experiment_payload["grid"]["spacing"] = 0.1
    with pytest.raises(ValidationError):
        ExperimentConfigSchema.model_validate(experiment_payload)


def test_experiment_schema_checks_probes(experiment_payload):
    """Test probes need N coordinates and a time within the horizon"""
    experiment_payload["probes"] = [{"x": [0.0, 0.0], "t": 0.1}]
    with pytest.raises(ValidationError):
        ExperimentConfigSchema.model_validate(experiment_payload)
    experiment_payload["probes"] = [{"x": [0.0], "t": 0.5}]
    with pytest.raises(ValidationError):
        ExperimentConfigSchema.model_validate(experiment_payload)


def test_experiment_schema_rejects_bad_cantor(experiment_payload):
    """Test the Cantor ratio lies in (0, 1/2)"""
    experiment_payload["set"] = {"variant": "cantor", "interval": [0.0, 1.0], "ratio": 0.7, "depth": 2}
    with pytest.raises(ValidationError):
        ExperimentConfigSchema.model_validate(experiment_payload)
