# tests/unit/application/test_mappers.py
import numpy as np
import pytest

from src.application.mappers.closed_set_mapper import ClosedSetMapper
from src.application.mappers.report_mapper import ReportMapper
from src.domain.entities.probe_table import ProbeTable
from src.domain.exceptions.domain_exceptions import InvalidGeometryException
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod
from src.domain.value_objects.closed_set import Ball, CantorSet, Point, Union


def test_closed_set_payload_to_entity():
    """Test a tagged payload maps to the right variant"""
    spec = ClosedSetMapper.to_entity({"variant": "ball", "center": [0.5], "radius": 2})
    assert spec == Ball((0.5,), 2.0)


def test_nested_union_payload():
    """Test unions map their members recursively"""
    payload = {"variant": "union", "members": [
        {"variant": "point", "center": [0.0]},
        {"variant": "cantor", "interval": [1.0, 2.0], "ratio": 0.25, "depth": 3},
    ]}
    spec = ClosedSetMapper.to_entity(payload)
    assert isinstance(spec, Union)
    assert spec.members == (Point((0.0,)), CantorSet((1.0, 2.0), 0.25, 3))
    assert ClosedSetMapper.to_dict(spec) == payload


def test_unknown_variant_is_rejected():
    """Test an unknown tag is a geometry error"""
    with pytest.raises(InvalidGeometryException):
        ClosedSetMapper.to_entity({"variant": "torus"})


def test_estimate_to_dict():
    """Test capacity estimates keep their bracket and method"""
    payload = ReportMapper.estimate_to_dict(CapacityEstimate(1.0, 0.9, 1.1, CapacityMethod.VARIATIONAL_NUMERIC))
    assert payload == {"value": 1.0, "bracket_lo": 0.9, "bracket_hi": 1.1,
                       "method": CapacityMethod.VARIATIONAL_NUMERIC.value}


def test_table_to_dict_converts_numpy_values():
    """Test numpy scalars and arrays come out as plain Python values"""
    table = ProbeTable(name="demo", columns=["x", "u"])
    table.add_row(x=np.array([0.5]), u=np.float64(2.0))
    table.summary["spread"] = np.float64(1.5)
    payload = ReportMapper.table_to_dict(table)
    assert payload["rows"] == [{"x": [0.5], "u": 2.0}]
    assert type(payload["summary"]["spread"]) is float
    columns, rows = ReportMapper.table_to_rows(table)
    assert columns == ["x", "u"]
    assert rows == [[[0.5], 2.0]]
