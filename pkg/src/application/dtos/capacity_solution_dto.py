from dataclasses import dataclass

import numpy as np

from src.domain.entities.capacity_problem import CapacityProblem


@dataclass
class CapacitySolutionDTO:
    """Outcome of one dual solve on one grid"""
    problem: CapacityProblem
    multipliers: np.ndarray  # flat, over every node
    constrained: np.ndarray  # flat indices where η >= 1 is imposed
    pinned: np.ndarray  # flat indices where η = 0 is imposed
    test_function: np.ndarray  # η, flat
    lower: float
    upper: float
    mass: float
    iterations: int

    @property
    def value(self) -> float:
        return float(min(max(self.mass, self.lower), self.upper))
