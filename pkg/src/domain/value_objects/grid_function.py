from dataclasses import dataclass, replace
from math import gamma, pi
from typing import List, Optional, Tuple

import numpy as np

from src.domain.exceptions.domain_exceptions import InvalidGeometryException


def unit_ball_volume(N: int) -> float:
    return pi ** (N / 2.0) / gamma(N / 2.0 + 1.0)


def unit_sphere_area(N: int) -> float:
    return N * unit_ball_volume(N)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real values on a uniform tensor grid.

    With ``radial_dimension`` set the grid is one-dimensional over r >= 0 and
    the values are a radial profile in R^N; integrals use spherical shells.
    """
    lo: Tuple[float, ...]
    h: float
    values: np.ndarray
    time: Optional[float] = None
    nonnegative: bool = False
    radial_dimension: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.h <= 0:
            raise InvalidGeometryException(f"Grid spacing must be positive, got {self.h}")
        if values.ndim != len(self.lo):
            raise InvalidGeometryException(
                f"Values of rank {values.ndim} do not match a {len(self.lo)}-dimensional box"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidGeometryException("Grid values must be finite")
        if self.nonnegative and values.size and values.min() < 0.0:
            raise InvalidGeometryException(f"Nonnegative grid function has minimum {values.min()}")
        if self.time is not None and self.time < 0:
            raise InvalidGeometryException(f"Grid time must be nonnegative, got {self.time}")
        if self.radial_dimension is not None and (values.ndim != 1 or self.lo[0] != 0.0):
            raise InvalidGeometryException("Radial grid functions are one-dimensional and start at r = 0")

    @staticmethod
    def zeros(lo, hi, h: float, time: Optional[float] = None,
              radial_dimension: Optional[int] = None) -> "GridFunction":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        shape = tuple(int(round((b - a) / h)) + 1 for a, b in zip(lo, hi))
        return GridFunction(tuple(lo), h, np.zeros(shape), time=time, nonnegative=True,
                            radial_dimension=radial_dimension)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def hi(self) -> Tuple[float, ...]:
        return tuple(a + self.h * (n - 1) for a, n in zip(self.lo, self.shape))

    @property
    def space_dimension(self) -> int:
        return self.radial_dimension or self.dim

    def axes(self) -> List[np.ndarray]:
        return [a + self.h * np.arange(n) for a, n in zip(self.lo, self.shape)]

    def nodes(self) -> np.ndarray:
        """Node coordinates as an array of shape (size, dim)"""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def weights(self) -> np.ndarray:
        """Quadrature weights of the nodes (trapezoid, or shells when radial)"""
        if self.radial_dimension is not None:
            N = self.radial_dimension
            r = self.axes()[0]
            w = unit_sphere_area(N) * r ** (N - 1) * self.h
            w[0] = unit_ball_volume(N) * (0.5 * self.h) ** N
            w[-1] *= 0.5
            return w
        w = np.ones(self.shape)
        for axis, n in enumerate(self.shape):
            edge = [slice(None)] * self.dim
            for idx in (0, n - 1):
                edge[axis] = idx
                w[tuple(edge)] *= 0.5
        return w * self.h ** self.dim

    def integral(self) -> float:
        return float(np.sum(self.values * self.weights()))

    def integral_of_power(self, p: float) -> float:
        return float(np.sum(np.abs(self.values) ** p * self.weights()))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def interpolate(self, x) -> float:
        """Multilinear interpolation at a point (radius when radial); 0 outside the box"""
        point = np.atleast_1d(np.asarray(x, dtype=float))
        if self.radial_dimension is not None:
            point = np.array([np.linalg.norm(point)])
        coords = (point - np.asarray(self.lo)) / self.h
        if np.any(coords < -1e-12) or np.any(coords > np.asarray(self.shape) - 1 + 1e-12):
            return 0.0
        base = np.clip(np.floor(coords).astype(int), 0, np.asarray(self.shape) - 2)
        frac = np.clip(coords - base, 0.0, 1.0)
        value = 0.0
        for corner in np.ndindex(*(2,) * self.dim):
            weight = np.prod([f if c else 1.0 - f for c, f in zip(corner, frac)])
            value += weight * self.values[tuple(base + np.asarray(corner))]
        return float(value)

    def with_values(self, values: np.ndarray, time: Optional[float] = None) -> "GridFunction":
        return replace(self, values=np.asarray(values, dtype=float),
                       time=self.time if time is None else time)
