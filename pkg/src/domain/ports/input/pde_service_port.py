from abc import ABC, abstractmethod
from typing import Union

from src.domain.entities.solver_config import SolverConfig
from src.domain.entities.trajectory import Trajectory
from src.domain.value_objects.grid_function import GridFunction
from src.domain.value_objects.radon_measure import RadonMeasure


class PdeServicePort(ABC):
    """Port for the finite-difference solver"""

    @abstractmethod
    def step(self, u: GridFunction, cfg: SolverConfig) -> GridFunction:
        """Advance a nonnegative grid function by one time step"""
        pass

    @abstractmethod
    def solve_cauchy(self, data: Union[RadonMeasure, GridFunction], cfg: SolverConfig) -> Trajectory:
        """Solve the Cauchy problem on [0, T]"""
        pass
