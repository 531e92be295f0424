from dataclasses import dataclass

from src.domain.exceptions.domain_exceptions import InvalidParametersException
from src.domain.value_objects.problem_params import ProblemParams


@dataclass
class KernelEval:
    params: ProblemParams
    rule: str = "gauss-kronrod"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    truncation: float = 1e-16  # Gaussian factor below this fraction of its peak is dropped

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidParametersException("Quadrature tolerances must be positive")
