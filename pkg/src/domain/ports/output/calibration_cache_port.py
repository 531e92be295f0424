from abc import ABC, abstractmethod
from typing import Optional

from src.domain.value_objects.capacity_estimate import CapacityEstimate


class CalibrationCachePort(ABC):
    """Port for the persisted unit-ball calibration constants"""

    @abstractmethod
    def get(self, key: str) -> Optional[CapacityEstimate]:
        """Find a calibration by its "N,q" key"""
        pass

    @abstractmethod
    def put(self, key: str, estimate: CapacityEstimate) -> None:
        """Store a calibration under its "N,q" key"""
        pass
