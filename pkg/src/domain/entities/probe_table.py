from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class ProbeTable:
    """Rows of a probe sweep plus a summary of the checks made on them"""
    name: str
    columns: List[str]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    anomalies: List[str] = field(default_factory=list)
    passed: bool = True

    def add_row(self, **values: Any) -> None:
        self.rows.append({column: values.get(column) for column in self.columns})

    def column(self, name: str) -> List[Any]:
        return [row[name] for row in self.rows]

    def fail(self, reason: str) -> None:
        self.passed = False
        self.anomalies.append(reason)
