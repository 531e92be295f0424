from abc import ABC, abstractmethod

from src.domain.entities.profile import Profile, ProfileKind
from src.domain.value_objects.problem_params import ProblemParams


class ProfileServicePort(ABC):
    """Port for self-similar profiles"""

    @abstractmethod
    def very_singular_profile(self, params: ProblemParams, kind: ProfileKind) -> Profile:
        """Profile of the very singular solution"""
        pass
