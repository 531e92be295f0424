from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.domain.exceptions.domain_exceptions import (
    InvalidGeometryException,
    UnboundedSetException,
)


Coordinates = Tuple[float, ...]
Interval = Tuple[float, float]


def as_points(y, dim: int) -> np.ndarray:
    """Coerce a point or a batch of points to an array of shape (M, dim)"""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim == 1 else arr.reshape(1, -1)
    if arr.shape[-1] != dim:
        raise InvalidGeometryException(
            f"Point dimension {arr.shape[-1]} does not match set dimension {dim}"
        )
    return arr


def _coords(values: Sequence[float]) -> Coordinates:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=float)))


def _merge(intervals: List[Interval]) -> List[Interval]:
    merged: List[Interval] = []
    for lo, hi in sorted(intervals):
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _intersect(a: List[Interval], b: List[Interval]) -> List[Interval]:
    out: List[Interval] = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo <= hi:
                out.append((lo, hi))
    return _merge(out)


def from_intervals(intervals: List[Interval]) -> "ClosedSetSpec":
    """Build the 1-D closed set made of the given closed intervals"""
    pieces: List[ClosedSetSpec] = []
    for lo, hi in _merge(list(intervals)):
        if hi - lo <= 0.0:
            pieces.append(Point((lo,)))
        else:
            pieces.append(Box((lo,), (hi,)))
    if not pieces:
        return Empty(1)
    if len(pieces) == 1:
        return pieces[0]
    return Union(tuple(pieces))


class ClosedSetSpec(ABC):
    """Geometric description of a closed subset F of R^N"""

    variant: str = ""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Ambient dimension"""
        pass

    @abstractmethod
    def distance(self, y) -> np.ndarray:
        """Euclidean distance from each point of a batch to the set"""
        pass

    @abstractmethod
    def diameter_from(self, x) -> float:
        """Largest distance from x to a point of the set"""
        pass

    @abstractmethod
    def translate(self, v) -> "ClosedSetSpec":
        """Set shifted by the vector v"""
        pass

    @abstractmethod
    def scale(self, factor: float) -> "ClosedSetSpec":
        """Image of the set under y -> factor * y"""
        pass

    @abstractmethod
    def bounding_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Axis-aligned bounding box, None when the set is empty"""
        pass

    @abstractmethod
    def min_feature(self) -> float:
        """Smallest length a grid has to resolve for this set"""
        pass

    @abstractmethod
    def critical_radii(self, x) -> List[float]:
        """Radii around x at which the set crosses a sphere tangentially or ends"""
        pass

    @abstractmethod
    def intervals(self) -> List[Interval]:
        """Closed intervals making up a 1-D set"""
        pass

    @abstractmethod
    def describe(self) -> tuple:
        """Hashable nested description (variant name and parameters)"""
        pass

    @property
    def is_empty(self) -> bool:
        return False

    @property
    def is_bounded(self) -> bool:
        return True

    def contains(self, y, eps: float = 0.0) -> np.ndarray:
        return self.distance(y) <= eps

    def as_ball(self) -> Optional["ClosedSetSpec"]:
        """Equivalent Point or Ball when the set is one, else None"""
        return None

    def shell_section(self, x, r_in: float, r_out: float) -> "ClosedSetSpec":
        """Exact intersection with the closed shell r_in <= |y - x| <= r_out"""
        if r_in < 0 or r_out < r_in:
            raise InvalidGeometryException(f"Invalid shell radii [{r_in}, {r_out}]")
        if self.is_empty:
            return self
        if not self.is_bounded:
            raise UnboundedSetException("Shell sections require a bounded set")
        centre = as_points(x, self.dim)[0]
        if self.dim == 1:
            c = float(centre[0])
            shell = [(c - r_out, c - r_in), (c + r_in, c + r_out)]
            return from_intervals(_intersect(_merge(self.intervals()), _merge(shell)))
        if float(self.distance(centre)[0]) > r_out or self.diameter_from(centre) < r_in:
            return Empty(self.dim)
        return self._section_nd(centre, r_in, r_out)

    def _section_nd(self, centre: np.ndarray, r_in: float, r_out: float) -> "ClosedSetSpec":
        if float(self.distance(centre)[0]) >= r_in and self.diameter_from(centre) <= r_out:
            return self
        shell: ClosedSetSpec
        if r_in == 0.0:
            shell = Ball(_coords(centre), r_out)
        else:
            shell = Annulus(_coords(centre), r_in, r_out)
        return Intersection((self, shell))

    def intersect_ball(self, x, radius: float) -> "ClosedSetSpec":
        return self.shell_section(x, 0.0, radius)

    def signature(self, decimals: int = 6) -> tuple:
        """Description up to translation, rounded; equal signatures share a capacity"""
        box = self.bounding_box()
        if box is None:
            return ("empty", self.dim)
        centre = 0.5 * (box[0] + box[1])
        return _round(self.translate(-centre).describe(), decimals)


def _round(item, decimals: int):
    if isinstance(item, tuple):
        return tuple(_round(i, decimals) for i in item)
    if isinstance(item, float):
        value = round(item, decimals)
        return 0.0 if value == 0.0 else value
    return item


@dataclass(frozen=True)
class Empty(ClosedSetSpec):
    dimension: int = 1
    variant = "empty"

    @property
    def dim(self) -> int:
        return self.dimension

    @property
    def is_empty(self) -> bool:
        return True

    def distance(self, y) -> np.ndarray:
        return np.full(as_points(y, self.dim).shape[0], np.inf)

    def diameter_from(self, x) -> float:
        return 0.0

    def translate(self, v) -> ClosedSetSpec:
        return self

    def scale(self, factor: float) -> ClosedSetSpec:
        return self

    def bounding_box(self):
        return None

    def min_feature(self) -> float:
        return np.inf

    def critical_radii(self, x) -> List[float]:
        return []

    def intervals(self) -> List[Interval]:
        return []

    def describe(self) -> tuple:
        return ("empty", self.dimension)


@dataclass(frozen=True)
class FullSpace(ClosedSetSpec):
    dimension: int = 1
    variant = "full_space"

    @property
    def dim(self) -> int:
        return self.dimension

    @property
    def is_bounded(self) -> bool:
        return False

    def distance(self, y) -> np.ndarray:
        return np.zeros(as_points(y, self.dim).shape[0])

    def diameter_from(self, x) -> float:
        raise UnboundedSetException("The whole space has no finite diameter")

    def translate(self, v) -> ClosedSetSpec:
        return self

    def scale(self, factor: float) -> ClosedSetSpec:
        return self

    def bounding_box(self):
        raise UnboundedSetException("The whole space has no bounding box")

    def min_feature(self) -> float:
        return np.inf

    def critical_radii(self, x) -> List[float]:
        raise UnboundedSetException("The whole space has no critical radii")

    def intervals(self) -> List[Interval]:
        raise UnboundedSetException("The whole space is not a finite union of intervals")

    def describe(self) -> tuple:
        return ("full_space", self.dimension)


@dataclass(frozen=True)
class Point(ClosedSetSpec):
    center: Coordinates
    variant = "point"

    def __post_init__(self):
        object.__setattr__(self, "center", _coords(self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    def distance(self, y) -> np.ndarray:
        pts = as_points(y, self.dim)
        return np.linalg.norm(pts - np.asarray(self.center), axis=1)

    def diameter_from(self, x) -> float:
        return float(self.distance(x)[0])

    def translate(self, v) -> ClosedSetSpec:
        return Point(tuple(np.asarray(self.center) + as_points(v, self.dim)[0]))

    def scale(self, factor: float) -> ClosedSetSpec:
        return Point(tuple(np.asarray(self.center) * factor))

    def bounding_box(self):
        c = np.asarray(self.center)
        return c.copy(), c.copy()

    def min_feature(self) -> float:
        return 0.0

    def critical_radii(self, x) -> List[float]:
        return [float(self.distance(x)[0])]

    def intervals(self) -> List[Interval]:
        return [(self.center[0], self.center[0])]

    def as_ball(self) -> Optional[ClosedSetSpec]:
        return self

    def describe(self) -> tuple:
        return ("point", self.center)


@dataclass(frozen=True)
class Ball(ClosedSetSpec):
    center: Coordinates
    radius: float
    variant = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _coords(self.center))
        if self.radius < 0:
            raise InvalidGeometryException(f"Ball radius must be nonnegative, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def distance(self, y) -> np.ndarray:
        pts = as_points(y, self.dim)
        return np.maximum(np.linalg.norm(pts - np.asarray(self.center), axis=1) - self.radius, 0.0)

    def diameter_from(self, x) -> float:
        return float(np.linalg.norm(as_points(x, self.dim)[0] - np.asarray(self.center))) + self.radius

    def translate(self, v) -> ClosedSetSpec:
        return Ball(tuple(np.asarray(self.center) + as_points(v, self.dim)[0]), self.radius)

    def scale(self, factor: float) -> ClosedSetSpec:
        return Ball(tuple(np.asarray(self.center) * factor), self.radius * abs(factor))

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def min_feature(self) -> float:
        return 2.0 * self.radius

    def critical_radii(self, x) -> List[float]:
        d = float(np.linalg.norm(as_points(x, self.dim)[0] - np.asarray(self.center)))
        return [r for r in (d - self.radius, d + self.radius) if r > 0.0]

    def intervals(self) -> List[Interval]:
        return [(self.center[0] - self.radius, self.center[0] + self.radius)]

    def as_ball(self) -> Optional[ClosedSetSpec]:
        return self if self.radius > 0 else Point(self.center)

    def _section_nd(self, centre, r_in, r_out) -> ClosedSetSpec:
        if np.linalg.norm(centre - np.asarray(self.center)) <= 1e-14 * max(1.0, self.radius):
            outer = min(self.radius, r_out)
            if r_in == 0.0:
                return Ball(_coords(centre), outer)
            return Annulus(_coords(centre), r_in, outer)
        return super()._section_nd(centre, r_in, r_out)

    def describe(self) -> tuple:
        return ("ball", self.center, float(self.radius))


@dataclass(frozen=True)
class Annulus(ClosedSetSpec):
    center: Coordinates
    r_in: float
    r_out: float
    variant = "annulus"

    def __post_init__(self):
        object.__setattr__(self, "center", _coords(self.center))
        if self.r_in < 0 or self.r_out < self.r_in:
            raise InvalidGeometryException(
                f"Annulus radii must satisfy 0 <= r_in <= r_out, got {self.r_in}, {self.r_out}"
            )

    @property
    def dim(self) -> int:
        return len(self.center)

    def distance(self, y) -> np.ndarray:
        r = np.linalg.norm(as_points(y, self.dim) - np.asarray(self.center), axis=1)
        return np.maximum(np.maximum(self.r_in - r, r - self.r_out), 0.0)

    def diameter_from(self, x) -> float:
        return float(np.linalg.norm(as_points(x, self.dim)[0] - np.asarray(self.center))) + self.r_out

    def translate(self, v) -> ClosedSetSpec:
        return Annulus(tuple(np.asarray(self.center) + as_points(v, self.dim)[0]), self.r_in, self.r_out)

    def scale(self, factor: float) -> ClosedSetSpec:
        f = abs(factor)
        return Annulus(tuple(np.asarray(self.center) * factor), self.r_in * f, self.r_out * f)

    def bounding_box(self):
        c = np.asarray(self.center)
        return c - self.r_out, c + self.r_out

    def min_feature(self) -> float:
        return self.r_out - self.r_in

    def critical_radii(self, x) -> List[float]:
        d = float(np.linalg.norm(as_points(x, self.dim)[0] - np.asarray(self.center)))
        radii = (d - self.r_out, d - self.r_in, d + self.r_in, d + self.r_out, self.r_in - d)
        return [r for r in radii if r > 0.0]

    def intervals(self) -> List[Interval]:
        c = self.center[0]
        return _merge([(c - self.r_out, c - self.r_in), (c + self.r_in, c + self.r_out)])

    def describe(self) -> tuple:
        return ("annulus", self.center, float(self.r_in), float(self.r_out))


@dataclass(frozen=True)
class Box(ClosedSetSpec):
    lo: Coordinates
    hi: Coordinates
    variant = "box"

    def __post_init__(self):
        object.__setattr__(self, "lo", _coords(self.lo))
        object.__setattr__(self, "hi", _coords(self.hi))
        if len(self.lo) != len(self.hi):
            raise InvalidGeometryException("Box corners have different dimensions")
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise InvalidGeometryException(f"Box corners out of order: {self.lo} > {self.hi}")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def distance(self, y) -> np.ndarray:
        pts = as_points(y, self.dim)
        gap = np.maximum(np.maximum(np.asarray(self.lo) - pts, pts - np.asarray(self.hi)), 0.0)
        return np.linalg.norm(gap, axis=1)

    def diameter_from(self, x) -> float:
        p = as_points(x, self.dim)[0]
        far = np.maximum(np.abs(p - np.asarray(self.lo)), np.abs(p - np.asarray(self.hi)))
        return float(np.linalg.norm(far))

    def translate(self, v) -> ClosedSetSpec:
        shift = as_points(v, self.dim)[0]
        return Box(tuple(np.asarray(self.lo) + shift), tuple(np.asarray(self.hi) + shift))

    def scale(self, factor: float) -> ClosedSetSpec:
        a, b = np.asarray(self.lo) * factor, np.asarray(self.hi) * factor
        return Box(tuple(np.minimum(a, b)), tuple(np.maximum(a, b)))

    def bounding_box(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def min_feature(self) -> float:
        return float(np.min(np.asarray(self.hi) - np.asarray(self.lo)))

    def critical_radii(self, x) -> List[float]:
        p = as_points(x, self.dim)[0]
        radii = [float(self.distance(p)[0]), self.diameter_from(p)]
        radii += list(np.abs(p - np.asarray(self.lo))) + list(np.abs(p - np.asarray(self.hi)))
        return [float(r) for r in radii if r > 0.0]

    def intervals(self) -> List[Interval]:
        return [(self.lo[0], self.hi[0])]

    def as_ball(self) -> Optional[ClosedSetSpec]:
        if self.dim != 1:
            return None
        half = 0.5 * (self.hi[0] - self.lo[0])
        centre = (0.5 * (self.lo[0] + self.hi[0]),)
        return Ball(centre, half) if half > 0 else Point(centre)

    def describe(self) -> tuple:
        return ("box", self.lo, self.hi)


@dataclass(frozen=True)
class CantorSet(ClosedSetSpec):
    """Symmetric Cantor set on an interval, kept symbolic up to a finite depth"""
    interval: Interval
    ratio: float
    depth: int
    variant = "cantor"

    def __post_init__(self):
        object.__setattr__(self, "interval", (float(self.interval[0]), float(self.interval[1])))
        if self.interval[1] < self.interval[0]:
            raise InvalidGeometryException(f"Cantor interval out of order: {self.interval}")
        if not 0.0 < self.ratio < 0.5:
            raise InvalidGeometryException(f"Cantor ratio must lie in (0, 1/2), got {self.ratio}")
        if self.depth < 0:
            raise InvalidGeometryException(f"Cantor depth must be nonnegative, got {self.depth}")

    @property
    def dim(self) -> int:
        return 1

    def intervals(self) -> List[Interval]:
        pieces = [self.interval]
        for _ in range(self.depth):
            refined = []
            for lo, hi in pieces:
                length = self.ratio * (hi - lo)
                refined.append((lo, lo + length))
                refined.append((hi - length, hi))
            pieces = refined
        return pieces

    def distance(self, y) -> np.ndarray:
        pts = as_points(y, 1)[:, 0:1]
        bounds = np.asarray(self.intervals())
        gap = np.maximum(np.maximum(bounds[:, 0] - pts, pts - bounds[:, 1]), 0.0)
        return gap.min(axis=1)

    def diameter_from(self, x) -> float:
        p = float(as_points(x, 1)[0, 0])
        return max(abs(p - self.interval[0]), abs(p - self.interval[1]))

    def translate(self, v) -> ClosedSetSpec:
        s = float(as_points(v, 1)[0, 0])
        return CantorSet((self.interval[0] + s, self.interval[1] + s), self.ratio, self.depth)

    def scale(self, factor: float) -> ClosedSetSpec:
        a, b = self.interval[0] * factor, self.interval[1] * factor
        return CantorSet((min(a, b), max(a, b)), self.ratio, self.depth)

    def bounding_box(self):
        return np.array([self.interval[0]]), np.array([self.interval[1]])

    def min_feature(self) -> float:
        return (self.interval[1] - self.interval[0]) * self.ratio ** self.depth

    def critical_radii(self, x) -> List[float]:
        p = float(as_points(x, 1)[0, 0])
        ends = np.asarray(self.intervals()).ravel()
        return sorted({float(r) for r in np.abs(ends - p) if r > 0.0})

    def describe(self) -> tuple:
        return ("cantor", self.interval, float(self.ratio), int(self.depth))


@dataclass(frozen=True)
class Union(ClosedSetSpec):
    members: Tuple[ClosedSetSpec, ...]
    variant = "union"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InvalidGeometryException("A union needs at least one member")
        if len({m.dim for m in self.members}) != 1:
            raise InvalidGeometryException("Union members live in different dimensions")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def is_empty(self) -> bool:
        return all(m.is_empty for m in self.members)

    @property
    def is_bounded(self) -> bool:
        return all(m.is_bounded for m in self.members)

    def distance(self, y) -> np.ndarray:
        return np.min([m.distance(y) for m in self.members], axis=0)

    def diameter_from(self, x) -> float:
        return max(m.diameter_from(x) for m in self.members)

    def translate(self, v) -> ClosedSetSpec:
        return Union(tuple(m.translate(v) for m in self.members))

    def scale(self, factor: float) -> ClosedSetSpec:
        return Union(tuple(m.scale(factor) for m in self.members))

    def bounding_box(self):
        boxes = [b for b in (m.bounding_box() for m in self.members) if b is not None]
        if not boxes:
            return None
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def min_feature(self) -> float:
        return min(m.min_feature() for m in self.members)

    def critical_radii(self, x) -> List[float]:
        return sorted({r for m in self.members for r in m.critical_radii(x)})

    def intervals(self) -> List[Interval]:
        return _merge([i for m in self.members for i in m.intervals()])

    def shell_section(self, x, r_in: float, r_out: float) -> ClosedSetSpec:
        if self.dim == 1:
            return super().shell_section(x, r_in, r_out)
        parts = [m.shell_section(x, r_in, r_out) for m in self.members]
        parts = [p for p in parts if not p.is_empty]
        if not parts:
            return Empty(self.dim)
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def describe(self) -> tuple:
        return ("union", tuple(sorted((m.describe() for m in self.members), key=repr)))


@dataclass(frozen=True)
class Intersection(ClosedSetSpec):
    """Intersection of closed sets; distance is the lower bound max(d_i)"""
    members: Tuple[ClosedSetSpec, ...]
    variant = "intersection"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) < 2:
            raise InvalidGeometryException("An intersection needs at least two members")
        if len({m.dim for m in self.members}) != 1:
            raise InvalidGeometryException("Intersection members live in different dimensions")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def is_empty(self) -> bool:
        return any(m.is_empty for m in self.members)

    @property
    def is_bounded(self) -> bool:
        return any(m.is_bounded for m in self.members)

    def distance(self, y) -> np.ndarray:
        return np.max([m.distance(y) for m in self.members], axis=0)

    def contains(self, y, eps: float = 0.0) -> np.ndarray:
        return np.all([m.contains(y, eps) for m in self.members], axis=0)

    def diameter_from(self, x) -> float:
        """Exact in 1-D; otherwise the smallest member reach, an upper bound.

        The bound is attained for a connected set cut by a ball or annulus centred at x,
        which is how shell sections are built.
        """
        if self.dim == 1 and all(m.is_bounded for m in self.members):
            c = float(as_points(x, 1)[0][0])
            return max((max(abs(c - lo), abs(hi - c)) for lo, hi in self.intervals()), default=0.0)
        return min(m.diameter_from(x) for m in self.members if m.is_bounded)

    def translate(self, v) -> ClosedSetSpec:
        return Intersection(tuple(m.translate(v) for m in self.members))

    def scale(self, factor: float) -> ClosedSetSpec:
        return Intersection(tuple(m.scale(factor) for m in self.members))

    def bounding_box(self):
        boxes = [m.bounding_box() for m in self.members if m.is_bounded]
        if any(b is None for b in boxes):
            return None
        lo = np.max([b[0] for b in boxes], axis=0)
        hi = np.min([b[1] for b in boxes], axis=0)
        if np.any(hi < lo):
            return None
        return lo, hi

    def min_feature(self) -> float:
        return min(m.min_feature() for m in self.members)

    def critical_radii(self, x) -> List[float]:
        return sorted({r for m in self.members for r in m.critical_radii(x)})

    def intervals(self) -> List[Interval]:
        result = self.members[0].intervals()
        for m in self.members[1:]:
            result = _intersect(result, m.intervals())
        return result

    def describe(self) -> tuple:
        return ("intersection", tuple(m.describe() for m in self.members))


def dist_to_set(x, F: ClosedSetSpec) -> float:
    """Euclidean distance from the point x to F (0 for the whole space)"""
    return float(F.distance(x)[0])


def diameter_from(x, F: ClosedSetSpec) -> float:
    """D_F(x) = max{|x - y| : y in F}"""
    if not F.is_bounded:
        raise UnboundedSetException("D_F(x) is only defined for bounded sets", {"variant": F.variant})
    return F.diameter_from(x)
