from dataclasses import dataclass, field
from enum import Enum
from math import sqrt
from typing import List, Optional

import numpy as np

from src.domain.exceptions.domain_exceptions import InvalidParametersException
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.grid_function import GridFunction
from src.domain.value_objects.problem_params import ProblemParams


class Geometry(str, Enum):
    LINE_1D = "Line1D"
    RADIAL = "RadialND"


class AbsorptionMode(str, Enum):
    IMPLICIT = "implicit"
    EXACT_FLOW = "exact_flow"


@dataclass
class SolverConfig:
    """Semi-implicit finite-difference setup for u_t - Δu + u^q = 0"""
    params: ProblemParams
    half_width: float
    h: float
    dt: float
    T: float
    geometry: Geometry
    absorption: AbsorptionMode = AbsorptionMode.IMPLICIT
    absorption_enabled: bool = True
    newton_max_iter: int = 50
    newton_tolerance: float = 1e-13
    snapshot_times: List[float] = field(default_factory=list)

    @property
    def lo(self) -> float:
        return 0.0 if self.geometry == Geometry.RADIAL else -self.half_width

    @property
    def n_nodes(self) -> int:
        return int(round((self.half_width - self.lo) / self.h)) + 1

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def radial_dimension(self) -> Optional[int]:
        return self.params.N if self.geometry == Geometry.RADIAL else None

    def empty_grid(self, time: float = 0.0) -> GridFunction:
        return GridFunction(
            (self.lo,), self.h, np.zeros(self.n_nodes), time=time, nonnegative=True,
            radial_dimension=self.radial_dimension,
        )

    def coordinates(self) -> np.ndarray:
        return self.lo + self.h * np.arange(self.n_nodes)

    def margin_to(self, F: ClosedSetSpec) -> float:
        """Distance from F to the Dirichlet boundary of the box"""
        box = F.bounding_box()
        if box is None:
            return self.half_width
        reach = float(np.max(np.abs(np.concatenate(box)))) if self.geometry == Geometry.LINE_1D \
            else float(np.linalg.norm(np.maximum(np.abs(box[0]), np.abs(box[1]))))
        return self.half_width - reach

    def check_margin(self, F: ClosedSetSpec) -> None:
        required = 4.0 * sqrt(self.T)
        if self.margin_to(F) < required:
            raise InvalidParametersException(
                f"Box margin {self.margin_to(F):.3g} is below 4 sqrt(T) = {required:.3g}",
                {"half_width": self.half_width, "T": self.T},
            )

    def with_resolution(self, h: float, dt: Optional[float] = None) -> "SolverConfig":
        return SolverConfig(
            params=self.params,
            half_width=self.half_width,
            h=h,
            dt=dt if dt is not None else h * h / 4.0,
            T=self.T,
            geometry=self.geometry,
            absorption=self.absorption,
            absorption_enabled=self.absorption_enabled,
            newton_max_iter=self.newton_max_iter,
            newton_tolerance=self.newton_tolerance,
            snapshot_times=list(self.snapshot_times),
        )

    @staticmethod
    def create(
        params: ProblemParams,
        half_width: float,
        h: float,
        T: float,
        dt: Optional[float] = None,
        geometry: Optional[Geometry] = None,
        absorption: AbsorptionMode = AbsorptionMode.IMPLICIT,
        snapshot_times: Optional[List[float]] = None,
        newton_max_iter: int = 50,
    ) -> "SolverConfig":
        if h <= 0 or T <= 0 or half_width <= 0:
            raise InvalidParametersException("Spacing, horizon and box must be positive",
                                             {"h": h, "T": T, "half_width": half_width})
        dt = dt if dt is not None else h * h / 4.0
        if dt <= 0:
            raise InvalidParametersException(f"Time step must be positive, got {dt}")
        if geometry is None:
            geometry = Geometry.LINE_1D if params.N == 1 else Geometry.RADIAL
        if geometry == Geometry.LINE_1D and params.N != 1:
            raise InvalidParametersException("Line geometry needs N = 1; use the radial reduction")
        times = sorted(snapshot_times or [T])
        if times[-1] > T + 1e-12:
            raise InvalidParametersException(f"Snapshot time {times[-1]} exceeds horizon {T}")
        return SolverConfig(
            params=params,
            half_width=half_width,
            h=h,
            dt=dt,
            T=T,
            geometry=geometry,
            absorption=absorption,
            snapshot_times=times,
            newton_max_iter=newton_max_iter,
        )
