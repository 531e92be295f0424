# tests/unit/domain/test_geometry.py
import numpy as np
import pytest

from src.domain.exceptions.domain_exceptions import InvalidGeometryException, UnboundedSetException
from src.domain.value_objects.closed_set import (
    Annulus,
    Ball,
    Box,
    CantorSet,
    Empty,
    FullSpace,
    Intersection,
    Point,
    Union,
    diameter_from,
    dist_to_set,
)
from src.domain.value_objects.parabolic_distance import parabolic_distance_2, parabolic_distance_inf


# Fixtures
@pytest.fixture
def unit_interval():
    return Ball((0.0,), 1.0)


@pytest.fixture
def cantor():
    return CantorSet((0.0, 1.0), 1.0 / 3.0, 2)


def test_ball_distance_and_diameter(unit_interval):
    """Test distance and farthest distance for a ball"""
    assert dist_to_set((3.0,), unit_interval) == pytest.approx(2.0)
    assert dist_to_set((0.5,), unit_interval) == 0.0
    assert diameter_from((3.0,), unit_interval) == pytest.approx(4.0)


def test_point_distance_is_euclidean():
    """Test distance to a point in the plane"""
    point = Point((1.0, 1.0))
    assert dist_to_set((4.0, 5.0), point) == pytest.approx(5.0)


def test_full_space_has_zero_distance_and_no_diameter():
    """Test the whole space is at distance 0 and unbounded"""
    space = FullSpace(2)
    assert dist_to_set((10.0, -3.0), space) == 0.0
    with pytest.raises(UnboundedSetException):
        diameter_from((0.0, 0.0), space)


def test_empty_set_is_empty():
    """Test the empty set reports emptiness"""
    assert Empty(1).is_empty
    assert not Ball((0.0,), 1.0).is_empty


def test_union_distance_is_min_over_members():
    """Test union distance takes the nearest member"""
    union = Union((Point((-2.0,)), Point((3.0,))))
    assert dist_to_set((0.0,), union) == pytest.approx(2.0)
    assert diameter_from((0.0,), union) == pytest.approx(3.0)


def test_intersection_of_intervals():
    """Test intersection of two overlapping intervals"""
    both = Intersection((Box((0.0,), (2.0,)), Box((1.0,), (3.0,))))
    assert both.intervals() == [(1.0, 2.0)]


def test_intersection_reach_is_exact_on_the_line():
    """Test D_F(x) of an intersection is its true reach, not the smaller member reach"""
    both = Intersection((Box((0.0,), (2.0,)), Box((1.0,), (3.0,))))
    assert diameter_from((-1.0,), both) == pytest.approx(3.0)
    assert diameter_from((4.0,), both) == pytest.approx(3.0)
    assert diameter_from((0.0,), Intersection((Box((-3.0,), (-2.0,)), Box((2.0,), (3.0,))))) == 0.0


def test_intersection_reach_bounds_from_above_in_the_plane():
    """Test the planar reach is the smaller member reach, exact for a ball cut about x"""
    disc = Ball((1.0, 0.0), 1.0)
    cut = Intersection((disc, Ball((0.0, 0.0), 1.5)))
    assert diameter_from((0.0, 0.0), cut) == pytest.approx(1.5)
    apart = Intersection((Ball((-1.0, 0.0), 1.0), Ball((1.0, 0.0), 1.0)))
    assert diameter_from((5.0, 0.0), apart) >= 5.0


def test_annulus_rejects_inverted_radii():
    """Test an annulus with r_out < r_in is rejected"""
    with pytest.raises(InvalidGeometryException):
        Annulus((0.0,), 2.0, 1.0)


def test_cantor_intervals(cantor):
    """Test the depth-2 Cantor set keeps four intervals of length 1/9"""
    pieces = cantor.intervals()
    assert len(pieces) == 4
    assert all(hi - lo == pytest.approx(1.0 / 9.0) for lo, hi in pieces)
    assert dist_to_set((0.5,), cantor) == pytest.approx(0.5 - 1.0 / 3.0)


def test_cantor_rejects_ratio_above_half():
    """Test the Cantor ratio must lie in (0, 1/2)"""
    with pytest.raises(InvalidGeometryException):
        CantorSet((0.0, 1.0), 0.6, 1)


def test_translate_and_scale_ball(unit_interval):
    """Test translation and scaling of a ball"""
    moved = unit_interval.translate((2.0,)).scale(0.5)
    assert moved.center == (1.0,)
    assert moved.radius == pytest.approx(0.5)


def test_signature_ignores_position():
    """Test translated copies share a signature"""
    a = Ball((0.0,), 1.0)
    b = Ball((5.0,), 1.0)
    assert a.signature() == b.signature()
    assert a.signature() != Ball((0.0,), 2.0).signature()


def test_shell_section_of_interval(unit_interval):
    """Test the shell 0.5 <= |y| <= 2 of [-1, 1] keeps the two outer pieces"""
    section = unit_interval.shell_section((0.0,), 0.5, 2.0)
    assert section.intervals() == [(-1.0, -0.5), (0.5, 1.0)]


def test_parabolic_distances():
    """Test the two parabolic distances"""
    assert parabolic_distance_2((3.0,), 5.0, (0.0,), 1.0) == pytest.approx(np.sqrt(13.0))
    assert parabolic_distance_inf((3.0,), 5.0, (0.0,), 1.0) == pytest.approx(3.0)
    assert parabolic_distance_inf((0.0,), 10.0, (0.0,), 1.0) == pytest.approx(3.0)
