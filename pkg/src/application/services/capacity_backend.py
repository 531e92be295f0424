import logging
import threading
from typing import Dict, Optional, Tuple

import numpy as np

from src.application.services.capacity_service import CapacityService
from src.domain.ports.output.capacity_backend_port import CapacityBackendPort
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod
from src.domain.value_objects.closed_set import Ball, ClosedSetSpec
from src.domain.value_objects.problem_params import ProblemParams


logger = logging.getLogger(__name__)


class CachedCapacityBackend(CapacityBackendPort):
    """Capacity lookups for the potentials.

    Points and balls go through the scaling law; anything else is solved on a
    single grid. Results are shared between sets with the same signature, i.e.
    the same shape up to translation.
    """

    def __init__(
        self,
        capacity_service: CapacityService,
        grid_spacing: Optional[float] = None,
        min_spacing: float = 1.0 / 256.0,
        tolerance: float = 1e-6,
    ):
        self.capacity_service = capacity_service
        self.grid_spacing = grid_spacing or capacity_service.grid_spacing
        self.min_spacing = min_spacing
        self.tolerance = tolerance
        self._cache: Dict[Tuple, CapacityEstimate] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _spacing(self, K: ClosedSetSpec) -> float:
        feature = K.min_feature()
        h = self.grid_spacing
        if 0.0 < feature < np.inf:
            h = min(h, feature / 4.0)
        return max(h, self.min_spacing)

    def capacity(self, K: ClosedSetSpec, params: ProblemParams) -> CapacityEstimate:
        if K.is_empty:
            return CapacityEstimate.zero(CapacityMethod.CLOSED_FORM_SCALING)
        key = (params.N, params.q, K.signature())
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            self.hits += 1
            return cached
        self.misses += 1
        if params.supercritical and K.as_ball() is not None:
            estimate = self.capacity_service.capacity_closed_form(K, params)
        else:
            problem = self.capacity_service.problem_for(
                K, params, h=self._spacing(K), refine=False, tolerance=self.tolerance,
            )
            estimate = self.capacity_service.capacity_numeric(problem)
        logger.debug(f"Capacity of {K.variant} with signature {key[2]}: {estimate}")
        with self._lock:
            self._cache[key] = estimate
        return estimate

    def unit_ball_capacity(self, params: ProblemParams) -> float:
        unit = Ball(tuple([0.0] * params.N), 1.0)
        return self.capacity(unit, params).value
