from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from src.domain.exceptions.domain_exceptions import IncompleteHistoryException
from src.domain.value_objects.grid_function import GridFunction


@dataclass
class Trajectory:
    """Snapshots of a solver run plus per-step mass bookkeeping"""
    snapshots: Dict[float, GridFunction] = field(default_factory=dict)
    step_times: List[float] = field(default_factory=list)
    masses: List[float] = field(default_factory=list)
    absorbed: List[float] = field(default_factory=list)

    def record(self, time: float, mass: float, absorbed: float) -> None:
        self.step_times.append(time)
        self.masses.append(mass)
        self.absorbed.append(absorbed)

    def at(self, time: float, tol: float = 1e-9) -> GridFunction:
        for t, grid in self.snapshots.items():
            if abs(t - time) <= tol * max(1.0, time):
                return grid
        raise IncompleteHistoryException(f"No snapshot stored at t={time}",
                                         {"available": sorted(self.snapshots)})

    @property
    def final(self) -> GridFunction:
        return self.snapshots[max(self.snapshots)]

    def mass_at(self, time: float) -> float:
        times = np.asarray(self.step_times)
        idx = int(np.argmin(np.abs(times - time)))
        return self.masses[idx]

    def mass_identity_residual(self, s: float, T: float) -> float:
        """Relative defect of  ∫_s^T∫u^q + ∫u(T) = ∫u(s)"""
        times = np.asarray(self.step_times)
        i_s = int(np.argmin(np.abs(times - s)))
        i_t = int(np.argmin(np.abs(times - T)))
        absorbed = float(np.sum(self.absorbed[i_s + 1:i_t + 1]))
        lhs = absorbed + self.masses[i_t]
        rhs = self.masses[i_s]
        return abs(lhs - rhs) / max(abs(rhs), 1e-300)
