from abc import ABC, abstractmethod

from src.domain.value_objects.capacity_estimate import CapacityEstimate
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.problem_params import ProblemParams


class CapacityBackendPort(ABC):
    """Port for capacity lookups used by the potentials"""

    @abstractmethod
    def capacity(self, K: ClosedSetSpec, params: ProblemParams) -> CapacityEstimate:
        """Capacity of a compact set"""
        pass

    @abstractmethod
    def unit_ball_capacity(self, params: ProblemParams) -> float:
        """Capacity of the closed unit ball, an upper bound for rescaled slices"""
        pass
