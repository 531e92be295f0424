from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.domain.exceptions.domain_exceptions import InvalidParametersException


@dataclass
class InequalityReport:
    name: str
    sweep: str
    max_ratio: float
    argmax: Dict[str, Any]
    passed: bool
    rows: List[Dict[str, Any]] = field(default_factory=list)
    refined_max_ratio: Optional[float] = None
    notes: List[str] = field(default_factory=list)

    @property
    def refinement_change(self) -> Optional[float]:
        if self.refined_max_ratio is None:
            return None
        return abs(self.refined_max_ratio - self.max_ratio) / self.max_ratio

    @staticmethod
    def create(name: str, sweep: str, rows: List[Dict[str, Any]], ratio_key: str = "ratio",
               refined_max_ratio: Optional[float] = None, stability: float = 0.05,
               notes: Optional[List[str]] = None) -> "InequalityReport":
        if not rows:
            raise InvalidParametersException(f"Report {name} has an empty sweep")
        best = max(rows, key=lambda row: row[ratio_key])
        max_ratio = float(best[ratio_key])
        if not max_ratio > 0:
            raise InvalidParametersException(f"Report {name} has nonpositive maximum ratio {max_ratio}")
        finite = max_ratio < float("inf")
        stable = True
        if refined_max_ratio is not None:
            stable = abs(refined_max_ratio - max_ratio) <= stability * max_ratio
        return InequalityReport(
            name=name,
            sweep=sweep,
            max_ratio=max_ratio,
            argmax={k: v for k, v in best.items() if k != ratio_key},
            passed=finite and stable,
            rows=rows,
            refined_max_ratio=refined_max_ratio,
            notes=list(notes or []),
        )
