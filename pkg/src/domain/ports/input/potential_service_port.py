from abc import ABC, abstractmethod
from typing import List, Sequence, Tuple

from src.domain.entities.blowup_verdict import BlowupVerdict
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.slicing import Slicing
from src.domain.value_objects.closed_set import ClosedSetSpec
from src.domain.value_objects.problem_params import ProblemParams


class PotentialServicePort(ABC):
    """Port for capacitary potentials of closed sets"""

    @abstractmethod
    def slice(self, F: ClosedSetSpec, x, t: float) -> Slicing:
        """Parabolic slicing of F around x at time t"""
        pass

    @abstractmethod
    def w_series(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """Capacitary potential in series form"""
        pass

    @abstractmethod
    def w_integral(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """Capacitary potential in integral form"""
        pass

    @abstractmethod
    def equivalence_report(self, F: ClosedSetSpec, probes: Sequence[Tuple[Sequence[float], float]],
                           params: ProblemParams) -> ProbeTable:
        """Series versus integral potential over a probe grid"""
        pass

    @abstractmethod
    def blowup_classifier(self, F: ClosedSetSpec, x, params: ProblemParams,
                          taus: List[float]) -> BlowupVerdict:
        """Classify the small-time behaviour of the maximal solution at x"""
        pass
