from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Sequence


class PlotterPort(ABC):
    """Port for static line plots"""

    @abstractmethod
    def line_plot(self, name: str, x: Sequence[float], series: Dict[str, Sequence[float]],
                  xlabel: str = "", ylabel: str = "", logy: bool = False) -> Path:
        """Plot named series against a common abscissa"""
        pass
