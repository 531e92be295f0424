# tests/unit/application/test_potential_service.py
from math import exp
from unittest.mock import MagicMock

import numpy as np
import pytest

from src.application.services.potential_service import PotentialService
from src.domain.entities.blowup_verdict import BlowupKind
from src.domain.exceptions.domain_exceptions import (
    InvalidParametersException,
    NonpositiveTimeException,
    UnboundedSetException,
)
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod
from src.domain.value_objects.closed_set import Ball, FullSpace, Point
from src.domain.value_objects.problem_params import ProblemParams


def _stub_capacity(K, params):
    # half the widest bounding-box side: monotone, translation invariant, null on points
    if K.is_empty:
        return CapacityEstimate.zero(CapacityMethod.CLOSED_FORM_SCALING)
    lo, hi = K.bounding_box()
    width = 0.5 * float(np.max(hi - lo))
    if width == 0.0:
        return CapacityEstimate.zero(CapacityMethod.CLOSED_FORM_SCALING)
    return CapacityEstimate(width, width, width, CapacityMethod.CLOSED_FORM_SCALING)


# Fixtures
@pytest.fixture
def capacity_backend():
    backend = MagicMock()
    backend.capacity.side_effect = _stub_capacity
    backend.unit_ball_capacity.return_value = 1.0
    return backend


@pytest.fixture
def potential_service(capacity_backend):
    return PotentialService(capacity_backend)


@pytest.fixture
def params():
    return ProblemParams(1, 4.0)


@pytest.fixture
def interval():
    return Ball((0.0,), 1.0)


def test_slice_counts_shells(potential_service, interval):
    """Test a_t = 3 shells reach the edge of the unit interval at t = 1/4"""
    slicing = potential_service.slice(interval, (0.0,), 0.25)
    assert slicing.a_t == 3
    assert [entry.n for entry in slicing.slices] == [0, 1, 2, 3]
    assert slicing.slices[-1].radius == pytest.approx(1.0)


def test_slice_of_a_point_by_distance(potential_service):
    """Test a point lands in shell floor(|x-p|²/t), or in the shell it closes when on a sphere"""
    generic = potential_service.slice(Point((0.5,)), (0.0,), 0.1)
    assert generic.a_t == 2
    assert [entry.n for entry in generic.nonempty] == [2]

    on_sphere = potential_service.slice(Point((1.0,)), (0.0,), 0.25)
    assert on_sphere.a_t == 3
    assert [entry.n for entry in on_sphere.nonempty] == [3]
    assert on_sphere.nonempty[0].radius == pytest.approx(1.0)


def test_series_of_point_vanishes(potential_service, params):
    """Test W_series of a capacity-null point is zero"""
    assert potential_service.w_series(Point((0.0,)), (0.0,), 0.1, params) == 0.0


def test_series_is_positive_for_interval(potential_service, capacity_backend, params, interval):
    """Test the series potential of the unit interval at its centre"""
    value = potential_service.w_series(interval, (0.0,), 0.25, params)
    assert value > 0.0
    assert capacity_backend.capacity.called


def test_potentials_reject_nonpositive_time(potential_service, params, interval):
    """Test t <= 0 is rejected"""
    with pytest.raises(NonpositiveTimeException):
        potential_service.w_integral(interval, (0.0,), 0.0, params)


def test_potentials_reject_unbounded_sets(potential_service, params):
    """Test only bounded sets get a potential"""
    with pytest.raises(UnboundedSetException):
        potential_service.w_series(FullSpace(1), (0.0,), 0.1, params)


def test_potentials_need_supercritical_exponent(potential_service, interval):
    """Test q < q_c is rejected"""
    with pytest.raises(InvalidParametersException):
        potential_service.w_series(interval, (0.0,), 0.1, ProblemParams(1, 2.0))


def test_tail_envelope(interval):
    """Test t^{(q-3)/(2(q-1))} e^{-D²/4t} / D at q = 3"""
    value = PotentialService.tail_envelope(interval, (0.0,), 1.0, ProblemParams(1, 3.0))
    assert value == pytest.approx(exp(-0.25))
    assert PotentialService.tail_envelope(Point((0.0,)), (0.0,), 1.0, ProblemParams(1, 3.0)) == 0.0


def test_equivalence_report_ratios(potential_service, params, interval):
    """Test the integral and series potentials are comparable on probes inside and outside F"""
    # Execute
    report = potential_service.equivalence_report(interval, [((0.0,), 0.1), ((2.0,), 0.1)], params)

    # Assert
    assert report.passed
    assert len(report.rows) == 2
    ratios = [r for r in report.column("ratio") if r is not None]
    assert ratios and all(0.0 < r < np.inf for r in ratios)
    assert report.summary["spread"] >= 1.0
    assert report.summary["tail_constant"] >= 0.0


def test_classifier_strong_blowup(potential_service, params, interval):
    """Test a set filling every scale is classified as strong blow-up"""
    verdict = potential_service.blowup_classifier(interval, (0.0,), params, [0.5, 0.25, 0.125, 0.0625])
    assert verdict.kind == BlowupKind.STRONG_BLOWUP
    assert verdict.gamma == pytest.approx(1.0)


def test_classifier_bounded_for_point(potential_service, params):
    """Test a capacity-null point is classified as bounded"""
    verdict = potential_service.blowup_classifier(Point((0.0,)), (0.0,), params, [0.5, 0.25, 0.125])
    assert verdict.kind == BlowupKind.BOUNDED
    assert verdict.gamma is None


def test_classifier_needs_decreasing_scales(potential_service, params, interval):
    """Test the scales must decrease strictly"""
    with pytest.raises(InvalidParametersException):
        potential_service.blowup_classifier(interval, (0.0,), params, [0.1, 0.2, 0.3])


@pytest.mark.parametrize("x, t", [((0.0,), 0.1), ((0.7,), 0.25), ((1.8,), 0.3)])
def test_potentials_grow_with_the_set(potential_service, params, x, t):
    """Test F₁ ⊂ F₂ orders both potentials"""
    small, large = Ball((0.0,), 0.5), Ball((0.0,), 1.0)
    # series terms past the truncation point are at most the tail tolerance
    series = [potential_service.w_series(F, x, t, params) for F in (small, large)]
    integral = [potential_service.w_integral(F, x, t, params) for F in (small, large)]
    assert series[0] <= series[1] * (1.0 + 1e-3)
    assert integral[0] <= integral[1] * (1.0 + 1e-4)


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_potentials_parabolic_scaling(potential_service, params, interval, lam):
    """Test W(λF, λx, λ²t) = λ^{-2/(q-1)} W(F, x, t)"""
    factor = lam ** (-2.0 / (params.q - 1.0))
    x, t = 0.3, 0.1
    for potential in (potential_service.w_series, potential_service.w_integral):
        base = potential(interval, (x,), t, params)
        scaled = potential(interval.scale(lam), (lam * x,), lam * lam * t, params)
        assert base > 0.0
        assert scaled == pytest.approx(factor * base, rel=1e-6)


def test_potentials_translation_invariance(potential_service, params, interval):
    """Test W(F + v, x + v, t) = W(F, x, t)"""
    v = 1.7
    for potential in (potential_service.w_series, potential_service.w_integral):
        base = potential(interval, (0.3,), 0.1, params)
        moved = potential(interval.translate((v,)), (0.3 + v,), 0.1, params)
        assert moved == pytest.approx(base, rel=1e-9)
