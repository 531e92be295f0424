from dataclasses import dataclass

from src.domain.exceptions.domain_exceptions import InvalidParametersException


@dataclass(frozen=True)
class ProblemParams:
    """Dimension and absorption exponent of u_t - Δu + u^q = 0"""
    N: int
    q: float

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise InvalidParametersException(f"Dimension must be a positive integer, got {self.N}")
        if not self.q > 1.0:
            raise InvalidParametersException(f"Exponent q must exceed 1, got {self.q}")

    @property
    def qprime(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def qc(self) -> float:
        return 1.0 + 2.0 / self.N

    @property
    def supercritical(self) -> bool:
        return self.q >= self.qc

    @property
    def smoothness(self) -> float:
        """Order s = 2/q of the Sobolev space"""
        return 2.0 / self.q

    @property
    def scaling_exponent(self) -> float:
        """Exponent N - 2/(q-1) of the capacity scaling law"""
        return self.N - 2.0 / (self.q - 1.0)

    @property
    def time_exponent(self) -> float:
        """Exponent 1/(q-1) of the self-similar time decay"""
        return 1.0 / (self.q - 1.0)

    def __str__(self) -> str:
        regime = "supercritical" if self.supercritical else "subcritical"
        return f"N={self.N}, q={self.q:g} ({regime}, q_c={self.qc:g})"
