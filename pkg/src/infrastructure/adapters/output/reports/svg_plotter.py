import logging
from pathlib import Path
from typing import Dict, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from src.domain.ports.output.plotter_port import PlotterPort  # noqa: E402


logger = logging.getLogger(__name__)


class SvgPlotter(PlotterPort):
    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)

    def line_plot(self, name: str, x: Sequence[float], series: Dict[str, Sequence[float]],
                  xlabel: str = "", ylabel: str = "", logy: bool = False) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / f"{name}.svg"
        fig, ax = plt.subplots(figsize=(6, 4))
        for label, values in series.items():
            ax.plot(x, values, label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)
        logger.info(f"Plotted {name} to {path}")
        return path
