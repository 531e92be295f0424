# tests/unit/application/test_appendix_service.py
from math import erf, exp, sqrt
from unittest.mock import MagicMock

import numpy as np
import pytest

from src.application.services.appendix_service import AppendixService
from src.domain.entities.solver_config import SolverConfig
from src.domain.exceptions.domain_exceptions import InvalidParametersException
from src.domain.value_objects.closed_set import Ball
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


KERNEL_TUPLES = [
    (0.3, 2.0, 1.0, 1), (7.0, 9.0, 0.1, 1), (0.8, 1.6, 3.0, 2), (12.0, 13.0, 0.7, 2),
    (6.5, 10.0, 0.05, 3), (2.0, 2.5, 1.0, 4), (9.0, 40.0, 10.0, 5), (25.0, 26.0, 0.5, 5),
]


# Fixtures
@pytest.fixture
def appendix_service():
    return AppendixService(MagicMock(), MagicMock(), MagicMock(), MagicMock())


@pytest.mark.parametrize("a, b, t, N", KERNEL_TUPLES)
def test_kernel_max_agrees_with_grid_search(appendix_service, a, b, t, N):
    """Test the closed-form maximum against a brute-force grid within 0.5%"""
    value, info = appendix_service.kernel_max(a, b, t, N)
    assert value == pytest.approx(info["grid_value"], rel=5e-3)
    assert info["relative"] <= 5e-3


def test_kernel_max_branches():
    """Test both branches of the closed form"""
    assert AppendixService.kernel_max_closed_form(7.0, 9.0, 0.1, 1) == pytest.approx(
        exp(0.25) * 0.1 ** -0.5 * exp(-1.75))
    assert AppendixService.kernel_max_closed_form(0.3, 2.0, 1.0, 1) == pytest.approx(
        exp(0.25) * sqrt(2.0 / 0.3) * exp(-0.5))


def test_kernel_max_rejects_bad_range(appendix_service):
    """Test 0 < a < b is required"""
    with pytest.raises(InvalidParametersException):
        appendix_service.kernel_max(2.0, 1.0, 1.0, 1)


def test_kernel_variant_bound(appendix_service):
    """Test the θ-variant bound dominates the maximum and checks θ"""
    bound = AppendixService.kernel_variant_bound(4.0, 1.0, 1, 0.5)
    assert bound >= appendix_service.kernel_max(4.0, 8.0, 1.0, 1)[0] * (1.0 - 1e-12)
    with pytest.raises(InvalidParametersException):
        AppendixService.kernel_variant_bound(1.0, 1.0, 1, 0.5)


def test_integral_ratio_symmetry(appendix_service):
    """Test (a, b, A, B) and (b, a, B, A) give the same ratio"""
    left = appendix_service.sharp_integral_ratio(0.5, 2.0, 1.0, 4.0)
    right = appendix_service.sharp_integral_ratio(2.0, 0.5, 4.0, 1.0)
    assert left == pytest.approx(right, rel=1e-6)
    assert 0.0 < left < np.inf


def test_integral_ratio_needs_large_product(appendix_service):
    """Test AB > κ is required"""
    with pytest.raises(InvalidParametersException):
        appendix_service.sharp_integral_ratio(1.0, 1.0, 0.5, 1.0)


def test_integral_sweep_skips_small_products(appendix_service):
    """Test the sweep drops tuples with AB <= κ and keeps the rest bounded"""
    sweep = {"name": "small", "kappa": 1.0, "a": [0.5, 1.0], "b": [1.0], "A": [0.5, 4.0], "B": [1.0, 8.0]}
    report = appendix_service.integral_sweep(sweep)
    assert len(report.rows) == 6
    assert all(row["A"] * row["B"] > 1.0 for row in report.rows)
    assert report.passed
    assert np.isfinite(report.max_ratio)


def test_series_ratio_is_bounded(appendix_service):
    """Test the lattice series over its envelope stays bounded as n grows"""
    ratios = [appendix_service.series_bound_ratio(1.0, 0.0, 2.0, 0.25, 2, n) for n in (10, 20, 40, 80)]
    assert all(0.0 < r < np.inf for r in ratios)
    assert max(ratios) / min(ratios) < 10.0


def test_series_ratio_rejects_bad_parameters(appendix_service):
    """Test γ > 1 and n > ℓ are required"""
    with pytest.raises(InvalidParametersException):
        appendix_service.series_bound_ratio(1.0, 0.0, 1.0, 0.25, 2, 10)
    with pytest.raises(InvalidParametersException):
        appendix_service.series_bound_ratio(1.0, 0.0, 2.0, 0.25, 2, 2)

@pytest.mark.parametrize("A, B", [(1.0, 3.0), (0.5, 8.0), (4.0, 4.0)])
def test_exponential_peak_location_and_height(A, B):
    """Test the maximiser B/(A+B) and the maximum e^{-(A+B)²/4}"""
    x_peak, value = AppendixService.exponential_peak(A, B)
    assert x_peak == pytest.approx(B / (A + B), abs=1e-6)
    assert value == pytest.approx(exp(-0.25 * (A + B) ** 2), rel=1e-9)


def test_slice_measure_ratio_between_shell_weights(appendix_service):
    """Test atoms inside their shells give a ratio in [1, e^{1/4}]"""
    # Setup
    appendix_service.singular_solution_service.slice_measures.return_value = [
        (0, RadonMeasure((((0.5,), 2.0),))),
        (1, RadonMeasure((((-1.2,), 1.0),))),
    ]
    numerator = 2.0 * exp(-0.0625) + exp(-0.36)
    denominator = 2.0 * exp(-0.25) + exp(-0.5)

    # Execute
    ratio = appendix_service.slice_measure_ratio(Ball((0.0,), 2.0), (0.0,), 1.0, ProblemParams(1, 4.0))

    # Assert
    assert ratio == pytest.approx(numerator / denominator)
    assert 1.0 <= ratio <= exp(0.25)


def test_slice_measure_ratio_without_slices(appendix_service):
    """Test a set with no slices reports the neutral ratio"""
    appendix_service.singular_solution_service.slice_measures.return_value = []
    assert appendix_service.slice_measure_ratio(Ball((3.0,), 0.1), (0.0,), 0.1, ProblemParams(1, 4.0)) == 1.0



def test_in_ball_mass_at_centre():
    """Test the Gaussian mass of [-1, 1] at ξ = 0 in one dimension"""
    tau = 0.3
    assert AppendixService.in_ball_mass(1, 0.0, tau) == pytest.approx(erf(1.0 / (2.0 * sqrt(tau))))
    assert AppendixService.in_ball_mass(1, 0.5, tau) < AppendixService.in_ball_mass(1, 0.0, tau)


def test_in_ball_mass_sup_below_one(appendix_service):
    """Test the in-ball mass never exceeds one"""
    best = appendix_service.in_ball_mass_sup(2, samples=40)
    assert 0.0 < best["value"] <= 1.0
    assert best["radius"] ** 2 + best["tau"] <= 1.0 + 1e-12


def test_wiener_check_needs_supercritical_exponent(appendix_service):
    """Test the Wiener estimate is checked for q >= q_c only"""
    cfg = SolverConfig.create(ProblemParams(1, 2.0), half_width=2.0, h=0.05, T=0.01)
    with pytest.raises(InvalidParametersException):
        appendix_service.wiener_upper_consistency(Ball((0.0,), 0.2), cfg, [((0.0,), 0.01)])
