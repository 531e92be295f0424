from typing import Sequence, Tuple

import numpy as np
from scipy import optimize

from src.domain.exceptions.domain_exceptions import NonpositiveTimeException
from src.domain.value_objects.problem_params import ProblemParams


ROOT_RTOL = 4.0 * np.finfo(float).eps


class APrioriBounds:
    """Closed-form majorants every nonnegative solution obeys"""

    @staticmethod
    def universal(params: ProblemParams, t) -> np.ndarray:
        """(1 / (t (q-1)))^{1/(q-1)}, the flat maximal solution"""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise NonpositiveTimeException("The universal bound needs t > 0")
        return (1.0 / (t * (params.q - 1.0))) ** params.time_exponent

    @staticmethod
    def implicit_flat(params: ProblemParams, dt: float, n_steps: int, start: float) -> np.ndarray:
        """Implicit-Euler flat majorant M_n + dt M_n^q = M_{n-1}, M_0 = start"""
        values = np.empty(n_steps + 1)
        values[0] = start
        for n in range(1, n_steps + 1):
            values[n] = _implicit_root(values[n - 1], dt, params.q)
        return values

    @staticmethod
    def localization(params: ProblemParams, x, t: float, r: float, C: float) -> float:
        """(C / (t + (|x| - r)_+^2))^{1/(q-1)}"""
        if t <= 0:
            raise NonpositiveTimeException("The localization envelope needs t > 0")
        excess = max(float(np.linalg.norm(np.atleast_1d(x))) - r, 0.0)
        return (C / (t + excess ** 2)) ** params.time_exponent

    @staticmethod
    def fit_localization_constant(params: ProblemParams, probes: Sequence[Tuple[Sequence[float], float]],
                                  values: Sequence[float], r: float) -> float:
        """Smallest C making the localization envelope dominate the sampled values"""
        fitted = 0.0
        for (x, t), u in zip(probes, values):
            excess = max(float(np.linalg.norm(np.atleast_1d(x))) - r, 0.0)
            fitted = max(fitted, (t + excess ** 2) * max(u, 0.0) ** (params.q - 1.0))
        return fitted


def _implicit_root(previous: float, dt: float, q: float) -> float:
    """Root M in [0, previous] of M + dt M^q = previous"""
    if previous <= 0.0:
        return 0.0
    return float(optimize.brentq(lambda M: M + dt * M ** q - previous, 0.0, previous,
                                 xtol=1e-300, rtol=ROOT_RTOL))
