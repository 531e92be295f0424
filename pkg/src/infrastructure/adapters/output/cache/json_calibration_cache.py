import json
import logging
import os
import tempfile
import threading
from pathlib import Path
from typing import Dict, Optional

from src.domain.exceptions.domain_exceptions import ConfigurationException
from src.domain.ports.output.calibration_cache_port import CalibrationCachePort
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod


logger = logging.getLogger(__name__)


class JsonCalibrationCache(CalibrationCachePort):
    """Unit-ball calibrations in a JSON file keyed by "N,q".

    Entries also record the solver settings they were computed with; an entry
    made under other settings is treated as missing.
    """

    def __init__(self, path: str, solver_tag: Optional[Dict[str, float]] = None):
        self.path = Path(path)
        self.solver_tag = solver_tag or {}
        self._lock = threading.Lock()

    def _read(self) -> Dict[str, dict]:
        if not self.path.exists():
            return {}
        try:
            with self.path.open("r", encoding="utf-8") as handle:
                return json.load(handle)
        except json.JSONDecodeError as e:
            raise ConfigurationException(f"Calibration cache {self.path} is not valid JSON", {"error": str(e)})

    def get(self, key: str) -> Optional[CapacityEstimate]:
        with self._lock:
            entry = self._read().get(key)
        if entry is None:
            return None
        if entry.get("solver", {}) != self.solver_tag:
            logger.warning(f"Ignoring calibration {key}: computed with other solver settings")
            return None
        return CapacityEstimate(
            value=entry["value"],
            bracket_lo=entry["bracket_lo"],
            bracket_hi=entry["bracket_hi"],
            method=CapacityMethod(entry.get("method", CapacityMethod.VARIATIONAL_NUMERIC.value)),
        )

    def put(self, key: str, estimate: CapacityEstimate) -> None:
        with self._lock:
            data = self._read()
            data[key] = {
                "value": estimate.value,
                "bracket_lo": estimate.bracket_lo,
                "bracket_hi": estimate.bracket_hi,
                "method": estimate.method.value,
                "solver": self.solver_tag,
            }
            self.path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.path.parent, prefix=self.path.name, suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                json.dump(data, handle, indent=2, sort_keys=True)
            os.replace(tmp, self.path)
        logger.info(f"Stored calibration {key} in {self.path}")
