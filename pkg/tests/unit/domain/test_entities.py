# tests/unit/domain/test_entities.py
import numpy as np
import pytest

from src.domain.entities.inequality_report import InequalityReport
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.profile import Profile, ProfileKind
from src.domain.entities.solver_config import AbsorptionMode, Geometry, SolverConfig
from src.domain.entities.trajectory import Trajectory
from src.domain.exceptions.domain_exceptions import IncompleteHistoryException, InvalidParametersException
from src.domain.value_objects.closed_set import Ball
from src.domain.value_objects.problem_params import ProblemParams


# Fixtures
@pytest.fixture
def params():
    return ProblemParams(1, 4.0)


@pytest.fixture
def cfg(params):
    return SolverConfig.create(params, half_width=4.0, h=0.1, T=0.5, snapshot_times=[0.1, 0.5])


# SolverConfig
def test_solver_config_defaults(cfg):
    """Test default time step, node count and geometry"""
    assert cfg.dt == pytest.approx(0.0025)
    assert cfg.n_nodes == 81
    assert cfg.n_steps == 200
    assert cfg.geometry == Geometry.LINE_1D
    assert cfg.absorption == AbsorptionMode.IMPLICIT
    assert cfg.coordinates()[0] == pytest.approx(-4.0)


def test_solver_config_radial_for_higher_dimension():
    """Test N > 1 defaults to the radial reduction starting at r = 0"""
    cfg = SolverConfig.create(ProblemParams(3, 2.0), half_width=2.0, h=0.1, T=0.1)
    assert cfg.geometry == Geometry.RADIAL
    assert cfg.lo == 0.0
    assert cfg.empty_grid().radial_dimension == 3


def test_solver_config_rejects_snapshot_after_horizon(params):
    """Test snapshot times must not exceed T"""
    with pytest.raises(InvalidParametersException):
        SolverConfig.create(params, half_width=4.0, h=0.1, T=0.5, snapshot_times=[0.6])


def test_solver_config_margin_check(cfg):
    """Test the box must leave 4 sqrt(T) around F"""
    cfg.check_margin(Ball((0.0,), 1.0))
    with pytest.raises(InvalidParametersException):
        cfg.check_margin(Ball((0.0,), 3.0))


def test_solver_config_with_resolution(cfg):
    """Test refinement keeps the setup and halves the spacing"""
    refined = cfg.with_resolution(0.05)
    assert refined.h == 0.05
    assert refined.dt == pytest.approx(0.05 ** 2 / 4.0)
    assert refined.snapshot_times == cfg.snapshot_times


# Trajectory
def test_trajectory_mass_identity_residual():
    """Test the mass identity with exact bookkeeping"""
    trajectory = Trajectory()
    trajectory.record(0.0, 1.0, 0.0)
    trajectory.record(0.1, 0.8, 0.2)
    trajectory.record(0.2, 0.7, 0.1)
    assert trajectory.mass_identity_residual(0.0, 0.2) == pytest.approx(0.0, abs=1e-15)
    assert trajectory.mass_at(0.1) == 0.8


def test_trajectory_missing_snapshot():
    """Test asking for an unstored snapshot fails"""
    with pytest.raises(IncompleteHistoryException):
        Trajectory().at(0.3)


# ProbeTable
def test_probe_table_rows_and_failure():
    """Test rows follow the columns and failures are recorded"""
    table = ProbeTable(name="demo", columns=["x", "u"])
    table.add_row(x=1.0, u=2.0, ignored=3.0)
    assert table.rows == [{"x": 1.0, "u": 2.0}]
    assert table.passed
    table.fail("u too large")
    assert not table.passed
    assert table.anomalies == ["u too large"]


# InequalityReport
def test_inequality_report_picks_maximum():
    """Test the report keeps the largest ratio and its arguments"""
    rows = [{"a": 1, "ratio": 0.5}, {"a": 2, "ratio": 1.5}]
    report = InequalityReport.create("demo", "v1", rows, refined_max_ratio=1.52)
    assert report.max_ratio == 1.5
    assert report.argmax == {"a": 2}
    assert report.passed
    assert report.refinement_change == pytest.approx(0.02 / 1.5)


def test_inequality_report_unstable_refinement_fails():
    """Test a ratio that moves under refinement fails"""
    report = InequalityReport.create("demo", "v1", [{"ratio": 1.0}], refined_max_ratio=2.0)
    assert not report.passed


def test_inequality_report_rejects_empty_sweep():
    """Test an empty sweep is an error"""
    with pytest.raises(InvalidParametersException):
        InequalityReport.create("demo", "v1", [])


# Profile
def test_profile_evaluation_and_solution():
    """Test profile interpolation, zero beyond range and self-similar scaling"""
    y = np.linspace(0.0, 2.0, 3)
    profile = Profile(y=y, f=np.array([1.0, 0.5, 0.0]), params=ProblemParams(1, 2.0),
                      kind=ProfileKind.RADIAL_VSS, f0=1.0, y_separation=1.0)
    assert float(profile(-0.5)) == pytest.approx(0.75)
    assert float(profile(3.0)) == 0.0
    assert float(profile.solution(0.0, 0.25)) == pytest.approx(4.0)
    assert profile.dimension == 1
