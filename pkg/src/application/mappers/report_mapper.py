from typing import Any, Dict, List, Tuple

import numpy as np

from src.domain.entities.blowup_verdict import BlowupVerdict
from src.domain.entities.inequality_report import InequalityReport
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.profile import Profile
from src.domain.entities.trajectory import Trajectory
from src.domain.value_objects.capacity_estimate import CapacityEstimate


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-friendly Python values"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class ReportMapper:
    @staticmethod
    def estimate_to_dict(estimate: CapacityEstimate) -> Dict[str, Any]:
        return {
            "value": estimate.value,
            "bracket_lo": estimate.bracket_lo,
            "bracket_hi": estimate.bracket_hi,
            "method": estimate.method.value,
        }

    @staticmethod
    def table_to_dict(table: ProbeTable) -> Dict[str, Any]:
        return {
            "name": table.name,
            "passed": table.passed,
            "summary": _plain(table.summary),
            "anomalies": list(table.anomalies),
            "rows": _plain(table.rows),
        }

    @staticmethod
    def table_to_rows(table: ProbeTable) -> Tuple[List[str], List[List[Any]]]:
        return list(table.columns), [[_plain(row[c]) for c in table.columns] for row in table.rows]

    @staticmethod
    def report_to_dict(report: InequalityReport) -> Dict[str, Any]:
        return {
            "name": report.name,
            "sweep": report.sweep,
            "max_ratio": report.max_ratio,
            "argmax": _plain(report.argmax),
            "refined_max_ratio": report.refined_max_ratio,
            "refinement_change": report.refinement_change,
            "passed": report.passed,
            "notes": list(report.notes),
            "n_rows": len(report.rows),
        }

    @staticmethod
    def report_to_rows(report: InequalityReport) -> Tuple[List[str], List[List[Any]]]:
        columns = list(report.rows[0].keys())
        return columns, [[_plain(row[c]) for c in columns] for row in report.rows]

    @staticmethod
    def profile_to_dict(profile: Profile) -> Dict[str, Any]:
        return {
            "kind": profile.kind.value,
            "N": profile.params.N,
            "q": profile.params.q,
            "f0": profile.f0,
            "y_separation": profile.y_separation,
            "y_max": float(profile.y[-1]),
        }

    @staticmethod
    def profile_to_rows(profile: Profile) -> Tuple[List[str], List[List[Any]]]:
        weight = profile.decay_weight()
        return ["y", "f", "decay_weight"], [[float(y), float(f), float(w)]
                                            for y, f, w in zip(profile.y, profile.f, weight)]

    @staticmethod
    def verdict_to_dict(verdict: BlowupVerdict) -> Dict[str, Any]:
        return {
            "kind": verdict.kind.value,
            "gamma": verdict.gamma,
            "taus": _plain(verdict.taus),
            "values": _plain(verdict.values),
            "note": verdict.note,
        }

    @staticmethod
    def trajectory_to_rows(trajectory: Trajectory) -> Tuple[List[str], List[List[Any]]]:
        return ["t", "mass", "absorbed"], [[t, m, a] for t, m, a in zip(trajectory.step_times,
                                                                          trajectory.masses,
                                                                          trajectory.absorbed)]
