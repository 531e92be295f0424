from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional


class GoldenComparatorPort(ABC):
    """Port for comparing run outputs against blessed golden files"""

    @abstractmethod
    def compare(self, output: Path, golden: Path,
                tolerances: Optional[Dict[str, float]] = None) -> List[str]:
        """Return the list of mismatches, empty when the files agree; `tolerances` maps field names to rtol"""
        pass
