import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List

from src.domain.ports.output.report_writer_port import ReportWriterPort


logger = logging.getLogger(__name__)


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


class FileReportWriter(ReportWriterPort):
    """CSV tables and JSON documents under one output directory"""

    def __init__(self, output_dir: str):
        self.output_dir = Path(output_dir)

    def _target(self, name: str, suffix: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / f"{name}{suffix}"

    def write_rows(self, name: str, columns: List[str], rows: List[List[Any]]) -> Path:
        path = self._target(name, ".csv")
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([json.dumps(v) if isinstance(v, (list, dict)) else v for v in row])
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path

    def write_document(self, name: str, payload: Dict[str, Any]) -> Path:
        path = self._target(name, ".json")
        with path.open("w", encoding="utf-8") as handle:
            json.dump(_json_safe(payload), handle, indent=2, sort_keys=True)
        logger.info(f"Wrote {path}")
        return path
