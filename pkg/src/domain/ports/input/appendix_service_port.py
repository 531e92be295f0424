from abc import ABC, abstractmethod
from typing import Dict, Sequence, Tuple

from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.solver_config import SolverConfig
from src.domain.value_objects.closed_set import ClosedSetSpec


class AppendixServicePort(ABC):
    """Port for the auxiliary inequalities and their brute-force oracles"""

    @abstractmethod
    def kernel_max(self, a: float, b: float, t: float, N: int) -> Tuple[float, Dict[str, float]]:
        """Closed-form constrained maximum of the Gaussian kernel, grid-checked"""
        pass

    @abstractmethod
    def sharp_integral_ratio(self, a: float, b: float, A: float, B: float, kappa: float) -> float:
        """Quadrature value of the two-sided Gaussian integral over its envelope"""
        pass

    @abstractmethod
    def series_bound_ratio(self, alpha: float, beta: float, gamma: float, delta: float,
                           ell: int, n: int) -> float:
        """Direct sum of the lattice series over its envelope"""
        pass

    @abstractmethod
    def wiener_upper_consistency(self, K: ClosedSetSpec, cfg: SolverConfig,
                                 probes: Sequence[Tuple[Sequence[float], float]]) -> ProbeTable:
        """Fit of the maximal solution against the discrete Wiener sum"""
        pass
