from dataclasses import dataclass, field
from typing import Dict, Optional

from src.domain.entities.probe_table import ProbeTable
from src.domain.value_objects.grid_function import GridFunction


@dataclass
class SolutionEnvelope:
    """Limit or supremum of discrete solutions sampled at the probe times"""
    snapshots: Dict[float, GridFunction] = field(default_factory=dict)
    report: Optional[ProbeTable] = None

    def value(self, x, t: float) -> float:
        return self.snapshots[t].interpolate(x)
