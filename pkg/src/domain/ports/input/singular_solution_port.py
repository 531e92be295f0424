from abc import ABC, abstractmethod
from typing import List, Optional, Sequence, Tuple

from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.solution_envelope import SolutionEnvelope
from src.domain.entities.solver_config import SolverConfig
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.radon_measure import RadonMeasure


Probe = Tuple[Sequence[float], float]


class SingularSolutionPort(ABC):
    """Port for maximal and σ-moderate solutions with singular initial traces"""

    @abstractmethod
    def maximal_solution(self, F: ClosedSetSpec, cfg: SolverConfig,
                         k_list: Optional[List[float]] = None,
                         eps_list: Optional[List[float]] = None,
                         probes: Optional[Sequence[Probe]] = None) -> SolutionEnvelope:
        """Monotone limit of solutions with data k χ_{F_ε}"""
        pass

    @abstractmethod
    def sigma_moderate_sup(self, F: ClosedSetSpec, cfg: SolverConfig,
                           measures: Sequence[RadonMeasure],
                           labels: Optional[Sequence[str]] = None) -> SolutionEnvelope:
        """Pointwise supremum of moderate solutions with data supported in F"""
        pass

    @abstractmethod
    def bilateral_check(self, F: ClosedSetSpec, cfg: SolverConfig,
                        probes: Sequence[Probe], eps_list: Optional[List[float]] = None) -> ProbeTable:
        """Ratio of the maximal solution to the capacitary potential"""
        pass

    @abstractmethod
    def subcritical_bounds_check(self, cfg: SolverConfig, radius: float = 0.0,
                                 probes: Optional[Sequence[Probe]] = None) -> ProbeTable:
        """Profile bounds for the maximal solution in the subcritical range"""
        pass
