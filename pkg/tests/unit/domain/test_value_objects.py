# Tests for ProblemParams value object
import numpy as np
import pytest

from src.domain.exceptions.domain_exceptions import InvalidGeometryException, InvalidParametersException
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod
from src.domain.value_objects.grid_function import GridFunction, unit_ball_volume
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


def test_problem_params_exponents():
    """Test derived exponents for N=1, q=4"""
    params = ProblemParams(1, 4.0)
    assert params.qc == pytest.approx(3.0)
    assert params.supercritical
    assert params.qprime == pytest.approx(4.0 / 3.0)
    assert params.scaling_exponent == pytest.approx(1.0 / 3.0)
    assert params.time_exponent == pytest.approx(1.0 / 3.0)


def test_problem_params_critical_exponent_is_supercritical():
    """Test q = q_c counts as supercritical"""
    assert ProblemParams(2, 2.0).supercritical
    assert not ProblemParams(1, 2.0).supercritical


def test_problem_params_rejects_q_at_most_one():
    """Test q <= 1 is rejected"""
    with pytest.raises(InvalidParametersException):
        ProblemParams(1, 1.0)


def test_problem_params_immutability():
    """Test that problem params are immutable"""
    params = ProblemParams(1, 2.0)
    with pytest.raises(Exception):  # dataclasses.FrozenInstanceError
        params.q = 3.0


# Tests for GridFunction value object
def test_grid_function_trapezoid_integral():
    """Test the trapezoid integral of a constant on [0, 1]"""
    grid = GridFunction((0.0,), 0.1, np.ones(11))
    assert grid.integral() == pytest.approx(1.0)


def test_grid_function_radial_integral_of_indicator():
    """Test radial weights integrate the indicator of the unit ball in R^3"""
    h = 1e-3
    r = np.arange(0.0, 1.0 + h / 2, h)
    grid = GridFunction((0.0,), h, np.ones(r.size), radial_dimension=3)
    assert grid.integral() == pytest.approx(unit_ball_volume(3), rel=1e-2)


def test_grid_function_interpolation_and_outside():
    """Test linear interpolation inside the box and zero outside"""
    grid = GridFunction((0.0,), 1.0, np.array([0.0, 2.0, 4.0]))
    assert grid.interpolate([0.5]) == pytest.approx(1.0)
    assert grid.interpolate([5.0]) == 0.0


def test_grid_function_rejects_negative_values_when_nonnegative():
    """Test nonnegative grid functions refuse negative values"""
    with pytest.raises(InvalidGeometryException):
        GridFunction((0.0,), 1.0, np.array([1.0, -1.0]), nonnegative=True)


# Tests for RadonMeasure value object
def test_radon_measure_mass_and_scaling():
    """Test total mass, scaling and addition of atomic measures"""
    mu = RadonMeasure.dirac((0.0,), 2.0) + RadonMeasure.dirac((1.0,), 1.0)
    assert mu.total_mass() == pytest.approx(3.0)
    assert mu.scaled(2.0).total_mass() == pytest.approx(6.0)
    assert RadonMeasure.zero().is_zero


def test_radon_measure_push_forward():
    """Test the image of atoms under y -> x + d y"""
    mu = RadonMeasure.dirac((1.0,), 1.0).push_forward((2.0,), 0.5, 4.0)
    (location, mass), = mu.atoms
    assert location == pytest.approx((2.5,))
    assert mass == pytest.approx(4.0)


def test_radon_measure_rejects_negative_mass():
    """Test negative atoms are rejected"""
    with pytest.raises(InvalidGeometryException):
        RadonMeasure.dirac((0.0,), -1.0)


# Tests for CapacityEstimate value object
def test_capacity_estimate_bracket_order():
    """Test the value must lie inside its bracket"""
    with pytest.raises(InvalidParametersException):
        CapacityEstimate(1.0, 2.0, 3.0, CapacityMethod.VARIATIONAL_NUMERIC)


def test_capacity_estimate_scaled():
    """Test scaling keeps the bracket"""
    estimate = CapacityEstimate(1.0, 0.9, 1.1, CapacityMethod.VARIATIONAL_NUMERIC).scaled(2.0)
    assert (estimate.bracket_lo, estimate.value, estimate.bracket_hi) == pytest.approx((1.8, 2.0, 2.2))
    assert estimate.width == pytest.approx(0.4)
