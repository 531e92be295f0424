from dataclasses import dataclass
from enum import Enum

from src.domain.exceptions.domain_exceptions import InvalidParametersException


class CapacityMethod(str, Enum):
    CLOSED_FORM_SCALING = "ClosedFormScaling"
    VARIATIONAL_NUMERIC = "VariationalNumeric"
    MONOTONE_BOUND = "MonotoneBound"


@dataclass(frozen=True)
class CapacityEstimate:
    value: float
    bracket_lo: float
    bracket_hi: float
    method: CapacityMethod

    def __post_init__(self):
        if not 0.0 <= self.bracket_lo <= self.value <= self.bracket_hi:
            raise InvalidParametersException(
                "Capacity estimate must satisfy 0 <= lo <= value <= hi",
                {"lo": self.bracket_lo, "value": self.value, "hi": self.bracket_hi},
            )

    @staticmethod
    def zero(method: CapacityMethod) -> "CapacityEstimate":
        return CapacityEstimate(0.0, 0.0, 0.0, method)

    @property
    def width(self) -> float:
        return self.bracket_hi - self.bracket_lo

    def scaled(self, factor: float) -> "CapacityEstimate":
        return CapacityEstimate(self.value * factor, self.bracket_lo * factor,
                                self.bracket_hi * factor, self.method)

    def __str__(self) -> str:
        return f"{self.value:.6g} in [{self.bracket_lo:.6g}, {self.bracket_hi:.6g}] ({self.method.value})"
