import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from src.domain.ports.output.golden_comparator_port import GoldenComparatorPort


logger = logging.getLogger(__name__)


class GoldenComparator(GoldenComparatorPort):
    """Field-by-field comparison of JSON or CSV outputs with relative tolerances.

    `field_rtol` maps a field name (the last key on the path, or a CSV column)
    to its own relative tolerance; everything below that field inherits it.
    Fields without an entry use `rtol`.
    """

    def __init__(self, rtol: float = 1e-6, atol: float = 1e-300,
                 field_rtol: Optional[Mapping[str, float]] = None):
        self.rtol = rtol
        self.atol = atol
        self.field_rtol = dict(field_rtol or {})

    def _load(self, path: Path) -> Any:
        if path.suffix == ".json":
            with path.open("r", encoding="utf-8") as handle:
                return json.load(handle)
        with path.open("r", newline="", encoding="utf-8") as handle:
            return [row for row in csv.DictReader(handle)]

    def _diff(self, where: str, out: Any, gold: Any, rtol: float, field_rtol: Dict[str, float],
              mismatches: List[str]) -> None:
        if isinstance(gold, dict) and isinstance(out, dict):
            for key in sorted(set(gold) | set(out)):
                if key not in out or key not in gold:
                    mismatches.append(f"{where}.{key}: present in only one file")
                    continue
                self._diff(f"{where}.{key}", out[key], gold[key], field_rtol.get(key, rtol), field_rtol,
                           mismatches)
            return
        if isinstance(gold, list) and isinstance(out, list):
            if len(gold) != len(out):
                mismatches.append(f"{where}: length {len(out)} vs golden {len(gold)}")
                return
            for i, (o, g) in enumerate(zip(out, gold)):
                self._diff(f"{where}[{i}]", o, g, rtol, field_rtol, mismatches)
            return
        try:
            o, g = float(out), float(gold)
        except (TypeError, ValueError):
            if out != gold:
                mismatches.append(f"{where}: {out!r} vs golden {gold!r}")
            return
        if not np.isclose(o, g, rtol=rtol, atol=self.atol, equal_nan=True):
            mismatches.append(f"{where}: {o!r} vs golden {g!r} (rtol {rtol:g})")

    def compare(self, output: Path, golden: Path,
                tolerances: Optional[Dict[str, float]] = None) -> List[str]:
        field_rtol = {**self.field_rtol, **(tolerances or {})}
        mismatches: List[str] = []
        self._diff(output.name, self._load(output), self._load(golden), self.rtol, field_rtol, mismatches)
        logger.info(f"Compared {output} with {golden}: {len(mismatches)} mismatches")
        return mismatches
