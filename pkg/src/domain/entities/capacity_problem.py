from dataclasses import dataclass
from math import ceil
from typing import Optional, Tuple

import numpy as np
from scipy.fft import next_fast_len

from src.domain.exceptions.domain_exceptions import InvalidParametersException
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.problem_params import ProblemParams


@dataclass
class CapacityProblem:
    """Discretized minimization of ||Λ^s η||^{q'} over η >= 1 on K, η >= 0.

    The grid is periodic with period ``n * h`` per axis. When ``pinned_zero_outside``
    is set, η is forced to vanish at every node outside that set.
    """
    params: ProblemParams
    K: ClosedSetSpec
    box_lo: Tuple[float, ...]
    box_hi: Tuple[float, ...]
    h: float
    shape: Tuple[int, ...]
    bessel_mass: float = 1.0
    pinned_zero_outside: Optional[ClosedSetSpec] = None
    tolerance: float = 1e-8
    max_iter: int = 50_000
    refine: bool = True
    geometry_eps: float = 0.0

    @property
    def s(self) -> float:
        return self.params.smoothness

    @property
    def p(self) -> float:
        return self.params.qprime

    @property
    def period(self) -> Tuple[float, ...]:
        return tuple(n * self.h for n in self.shape)

    def axes(self):
        return [lo + self.h * np.arange(n) for lo, n in zip(self.box_lo, self.shape)]

    def nodes(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def refined(self) -> "CapacityProblem":
        """Same problem on the grid of half the spacing"""
        return CapacityProblem(
            params=self.params,
            K=self.K,
            box_lo=self.box_lo,
            box_hi=self.box_hi,
            h=0.5 * self.h,
            shape=tuple(2 * n for n in self.shape),
            bessel_mass=self.bessel_mass,
            pinned_zero_outside=self.pinned_zero_outside,
            tolerance=self.tolerance,
            max_iter=self.max_iter,
            refine=False,
            geometry_eps=self.geometry_eps,
        )

    @staticmethod
    def create(
        params: ProblemParams,
        K: ClosedSetSpec,
        h: float,
        bessel_mass: float = 1.0,
        margin_factor: float = 1.0,
        min_length: float = 0.0,
        pinned_zero_outside: Optional[ClosedSetSpec] = None,
        tolerance: float = 1e-8,
        max_iter: int = 50_000,
        refine: bool = True,
        geometry_eps_relative: float = 1e-12,
    ) -> "CapacityProblem":
        """Build a problem whose box surrounds K with a margin of at least diam(K)"""
        if h <= 0:
            raise InvalidParametersException(f"Grid spacing must be positive, got {h}")
        if bessel_mass <= 0:
            raise InvalidParametersException(f"Bessel mass must be positive, got {bessel_mass}")
        if margin_factor < 1.0:
            raise InvalidParametersException(f"Margin factor must be at least 1, got {margin_factor}")
        if K.dim != params.N:
            raise InvalidParametersException(f"Set of dimension {K.dim} in a problem with N={params.N}")
        reference = K if pinned_zero_outside is None else pinned_zero_outside
        box = reference.bounding_box()
        if box is None:
            centre, extent = np.zeros(params.N), np.full(params.N, 2.0 * h)
        else:
            centre = 0.5 * (box[0] + box[1])
            extent = box[1] - box[0]
        diameter = float(np.linalg.norm(extent))
        length = max(float(np.max(extent)) + 2.0 * margin_factor * max(diameter, h), min_length)
        n = next_fast_len(int(ceil(length / h)))
        n += n % 2
        # node n/2 sits on the centre of the reference set
        lo = centre - 0.5 * n * h
        hi = lo + (n - 1) * h
        eps = geometry_eps_relative * float(np.linalg.norm(hi - lo))
        return CapacityProblem(
            params=params,
            K=K,
            box_lo=tuple(float(v) for v in lo),
            box_hi=tuple(float(v) for v in hi),
            h=h,
            shape=(n,) * params.N,
            bessel_mass=bessel_mass,
            pinned_zero_outside=pinned_zero_outside,
            tolerance=tolerance,
            max_iter=max_iter,
            refine=refine,
            geometry_eps=eps,
        )
