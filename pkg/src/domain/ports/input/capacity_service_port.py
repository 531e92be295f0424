from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

from src.domain.entities.capacity_problem import CapacityProblem
from src.domain.entities.probe_table import ProbeTable
from src.domain.value_objects.capacity_estimate import CapacityEstimate
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


class CapacityServicePort(ABC):
    """Port for Bessel capacity computations"""

    @abstractmethod
    def capacity_closed_form(self, K: ClosedSetSpec, params: ProblemParams) -> CapacityEstimate:
        """Capacity of a point or a ball from the scaling law"""
        pass

    @abstractmethod
    def capacity_numeric(self, problem: CapacityProblem) -> CapacityEstimate:
        """Capacity from the discretized variational problem"""
        pass

    @abstractmethod
    def capacitary_measure(self, problem: CapacityProblem) -> RadonMeasure:
        """Extremal measure of the variational problem"""
        pass

    @abstractmethod
    def quasi_additivity_ratio(self, pieces: List[ClosedSetSpec], params: ProblemParams,
                               separation: float) -> float:
        """Sum of piece capacities over the capacity of their union"""
        pass

    @abstractmethod
    def local_vs_global_capacity(self, K: ClosedSetSpec, r: float, rho: float,
                                 params: ProblemParams) -> Tuple[CapacityEstimate, CapacityEstimate]:
        """Capacity relative to B_{r+ρ} and capacity in a large box"""
        pass

    @abstractmethod
    def local_capacity_sweep(self, K: ClosedSetSpec, r: float, rhos: Sequence[float],
                             params: ProblemParams, far_tolerance: float = 0.10) -> ProbeTable:
        """Local over global capacity along ρ against the growth envelope"""
        pass
