from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.domain.value_objects.problem_params import ProblemParams


class ProfileKind(str, Enum):
    RADIAL_VSS = "RadialVSS"
    HALF_LINE = "HalfLine"


@dataclass
class Profile:
    """Self-similar profile f with u(x, t) = t^{-1/(q-1)} f(|x| / sqrt(t))"""
    y: np.ndarray
    f: np.ndarray
    params: ProblemParams
    kind: ProfileKind
    f0: float
    y_separation: float

    def __call__(self, y) -> np.ndarray:
        """Profile value; zero beyond the computed range"""
        return np.interp(np.abs(np.asarray(y, dtype=float)), self.y, self.f, right=0.0)

    @property
    def dimension(self) -> int:
        return 1 if self.kind == ProfileKind.HALF_LINE else self.params.N

    def decay_weight(self) -> np.ndarray:
        """|y|^{2/(q-1)} f(y) along the grid"""
        return self.y ** (2.0 * self.params.time_exponent) * self.f

    def solution(self, x, t: float) -> np.ndarray:
        return t ** (-self.params.time_exponent) * self(np.asarray(x, dtype=float) / np.sqrt(t))
