from abc import ABC, abstractmethod
from typing import Sequence

from src.domain.value_objects.grid_function import GridFunction
from src.domain.value_objects.radon_measure import RadonMeasure


class HeatKernelPort(ABC):
    """Port for Gaussian kernel evaluations"""

    @abstractmethod
    def heat_kernel(self, x, y, t: float) -> float:
        """Gaussian heat kernel H(x, y, t)"""
        pass

    @abstractmethod
    def heat_potential(self, mu: RadonMeasure, x, t: float) -> float:
        """Heat potential of a measure at (x, t)"""
        pass

    @abstractmethod
    def green_potential(self, history: Sequence[GridFunction], x, t: float) -> float:
        """Green potential of a time-indexed source at (x, t)"""
        pass

    @abstractmethod
    def gaussian_decay_bound(self, M: float, a: float, b: float, x, t: float) -> float:
        """Upper bound for the heat potential of sub-Gaussian data"""
        pass

    @abstractmethod
    def spherical_integral(self, N: int, m: float) -> float:
        """Integral of exp(m cos θ) sin^{N-2} θ over [0, π]"""
        pass
