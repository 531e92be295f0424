import logging
from dataclasses import replace
from math import sqrt
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.services.a_priori_bounds import APrioriBounds
from src.application.services.capacity_service import CapacityService
from src.application.services.pde_service import PdeService
from src.application.services.potential_service import PotentialService
from src.application.services.profile_service import ProfileService
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.profile import ProfileKind
from src.domain.entities.solution_envelope import SolutionEnvelope
from src.domain.entities.solver_config import Geometry, SolverConfig
from src.domain.exceptions.domain_exceptions import (
    InvalidGeometryException,
    InvalidParametersException,
    MaximumPrincipleViolatedException,
    NoProfileRegimeException,
    UnboundedSetException,
)
from src.domain.ports.input.singular_solution_port import Probe, SingularSolutionPort
from src.domain.value_objects.closed_set import Ball, ClosedSetSpec, Point
from src.domain.value_objects.grid_function import GridFunction
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


logger = logging.getLogger(__name__)

MAXIMAL_COLUMNS = ["eps", "x", "t", "u", "bound_OK1", "slack"]
SANDWICH_COLUMNS = ["x", "t", "u", "W", "ratio"]
ENVELOPE_COLUMNS = ["member", "label", "total_mass", "envelope_sup"]
PROFILE_COLUMNS = ["x", "t", "y", "u", "profile_bound", "scaled_gap", "holds"]

DEFAULT_LAMBDAS = (1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6)


class SingularSolutionService(SingularSolutionPort):
    def __init__(
        self,
        pde_service: PdeService,
        potential_service: PotentialService,
        capacity_service: CapacityService,
        profile_service: ProfileService,
        k_list: Sequence[float] = (1e2, 1e4, 1e6, 1e8),
        k_tolerance: float = 1e-4,
        monotonicity_slack: float = 1e-10,
        profile_margin: float = 0.05,
    ):
        self.pde_service = pde_service
        self.potential_service = potential_service
        self.capacity_service = capacity_service
        self.profile_service = profile_service
        self.k_list = list(k_list)
        self.k_tolerance = k_tolerance
        self.monotonicity_slack = monotonicity_slack
        self.profile_margin = profile_margin

    # helpers

    @staticmethod
    def _with_probe_times(cfg: SolverConfig, probes: Sequence[Probe]) -> SolverConfig:
        times = sorted(set(cfg.snapshot_times) | {float(t) for _, t in probes} | {cfg.T})
        if times[-1] > cfg.T + 1e-12:
            raise InvalidParametersException(f"Probe time {times[-1]} exceeds horizon {cfg.T}")
        return replace(cfg, snapshot_times=times)

    @staticmethod
    def _node_points(cfg: SolverConfig) -> np.ndarray:
        coords = cfg.coordinates()
        points = np.zeros((coords.size, cfg.params.N))
        points[:, 0] = coords
        return points

    @staticmethod
    def _check_set(F: ClosedSetSpec, cfg: SolverConfig) -> None:
        if not F.is_bounded:
            raise UnboundedSetException("Singular solutions are built for bounded sets", {"variant": F.variant})
        if F.dim != cfg.params.N:
            raise InvalidGeometryException(f"Set lives in dimension {F.dim}, solver in {cfg.params.N}")
        if cfg.geometry == Geometry.RADIAL:
            ball = F.as_ball()
            centre = getattr(ball, "center", None)
            if centre is None or np.linalg.norm(centre) > 1e-12:
                raise InvalidGeometryException("Radial runs need a point or ball centred at the origin")
        cfg.check_margin(F)

    def initial_data(self, F: ClosedSetSpec, eps: float, k: float, cfg: SolverConfig):
        """k χ_{F_ε} on the solver grid; k δ for a point when ε = 0"""
        if eps == 0.0 and isinstance(F.as_ball(), Point):
            return RadonMeasure.dirac(F.as_ball().center, k)
        inside = F.distance(self._node_points(cfg)) <= eps + 1e-12 * max(1.0, eps)
        if not inside.any():
            raise InvalidParametersException(f"F_ε with ε={eps:g} contains no solver node", {"h": cfg.h})
        return cfg.empty_grid().with_values(np.where(inside, k, 0.0), time=0.0)

    def _snapshots(self, data, cfg: SolverConfig) -> Dict[float, GridFunction]:
        trajectory = self.pde_service.solve_cauchy(data, cfg)
        return {t: trajectory.at(t) for t in cfg.snapshot_times}

    # maximal solutions

    def k_limit(self, F: ClosedSetSpec, eps: float, cfg: SolverConfig,
                k_list: Sequence[float]) -> Tuple[Dict[float, GridFunction], Optional[float]]:
        """Increasing sequence u_k with data k χ_{F_ε}; returns the last snapshots and the k reaching tolerance"""
        previous: Optional[Dict[float, GridFunction]] = None
        converged: Optional[float] = None
        for k in k_list:
            current = self._snapshots(self.initial_data(F, eps, k, cfg), cfg)
            if previous is not None:
                change = 0.0
                for t, grid in current.items():
                    scale = max(grid.sup(), 1e-300)
                    dip = float(np.max(previous[t].values - grid.values))
                    if dip > self.monotonicity_slack * scale:
                        raise MaximumPrincipleViolatedException(
                            f"u_k decreased by {dip:.3g} from k to k={k:g} at t={t:g}",
                            {"eps": eps, "k": k, "time": t},
                        )
                    change = max(change, float(np.max(np.abs(grid.values - previous[t].values))) / scale)
                if converged is None and change < self.k_tolerance:
                    converged = k
                logger.debug(f"eps={eps:g}, k={k:g}: relative change {change:.3g}")
            previous = current
        return previous, converged

    def maximal_solution(self, F: ClosedSetSpec, cfg: SolverConfig,
                         k_list: Optional[List[float]] = None,
                         eps_list: Optional[List[float]] = None,
                         probes: Optional[Sequence[Probe]] = None) -> SolutionEnvelope:
        k_list = list(k_list or self.k_list)
        eps_list = list(eps_list if eps_list is not None else [2.0 * cfg.h])
        if any(b <= a for a, b in zip(k_list, k_list[1:])):
            raise InvalidParametersException("k_list must be strictly increasing", {"k_list": k_list})
        if any(b >= a for a, b in zip(eps_list, eps_list[1:])) or min(eps_list) < 0.0:
            raise InvalidParametersException("eps_list must be nonnegative and strictly decreasing",
                                             {"eps_list": eps_list})
        self._check_set(F, cfg)
        probes = list(probes or [])
        cfg = self._with_probe_times(cfg, probes)
        params = cfg.params
        table = ProbeTable(name="maximal_solution", columns=list(MAXIMAL_COLUMNS))
        k_converged: Dict[str, Optional[float]] = {}
        limit: Optional[Dict[float, GridFunction]] = None
        first_probe: List[Tuple[float, float]] = []
        for eps in eps_list:
            current, converged = self.k_limit(F, eps, cfg, k_list)
            k_converged[f"{eps:g}"] = converged
            if converged is None:
                logger.warning(f"k-sequence did not settle for eps={eps:g} (tolerance {self.k_tolerance:g})")
            if limit is not None:
                for t, grid in current.items():
                    rise = float(np.max(grid.values - limit[t].values))
                    if rise > self.monotonicity_slack * max(limit[t].sup(), 1e-300):
                        table.fail(f"limit increased by {rise:.3g} as eps dropped to {eps:g} at t={t:g}")
            limit = current
            for index, (x, t) in enumerate(probes):
                u = current[float(t)].interpolate(x)
                bound = float(APrioriBounds.universal(params, t))
                table.add_row(eps=eps, x=list(np.atleast_1d(x)), t=t, u=u, bound_OK1=bound, slack=bound - u)
                if index == 0:
                    first_probe.append((eps, u))
        table.summary["k_converged"] = k_converged
        fit = [(e, u) for e, u in first_probe if e > 0.0 and u > 0.0]
        if len(fit) >= 2:
            slope, _ = np.polyfit(np.log([e for e, _ in fit]), np.log([u for _, u in fit]), 1)
            table.summary["decay_exponent"] = float(slope)
        logger.info(f"Maximal solution of {F.variant} over eps={eps_list}: {table.summary}")
        return SolutionEnvelope(snapshots=limit, report=table)

    # σ-moderate envelope

    def slice_measures(self, F: ClosedSetSpec, x, t: float,
                       params: ProblemParams) -> List[Tuple[int, RadonMeasure]]:
        """μ_n(A) = d_{n+1}^{N-2/(q-1)} ν_n((A - x)/d_{n+1}), ν_n capacitary for the rescaled slice"""
        slicing = self.potential_service.slice(F, x, t)
        measures = []
        for n, piece in slicing.rescaled_pieces():
            d = sqrt((n + 1) * t)
            nu = self.capacity_service.capacitary_measure(
                self.capacity_service.problem_for(piece, params, refine=False)
            )
            measures.append((n, nu.push_forward(slicing.center, d, d ** params.scaling_exponent)))
        return measures

    def measure_family(self, F: ClosedSetSpec, cfg: SolverConfig,
                       probes: Sequence[Probe] = (),
                       lambdas: Sequence[float] = DEFAULT_LAMBDAS) -> List[Tuple[str, RadonMeasure]]:
        """Capacitary measures of F and of its rescaled slices, multiplied by each λ"""
        params = cfg.params
        base: List[Tuple[str, RadonMeasure]] = []
        nu = self.capacity_service.capacitary_measure(self.capacity_service.problem_for(F, params, refine=False))
        base.append(("F", nu))
        for x, t in probes:
            for n, measure in self.slice_measures(F, x, t, params):
                base.append((f"slice n={n} at x={list(np.atleast_1d(x))}, t={t:g}", measure))
        return [(f"{lam:g} x {label}", measure.scaled(lam)) for lam in lambdas for label, measure in base]

    def sigma_moderate_sup(self, F: ClosedSetSpec, cfg: SolverConfig,
                           measures: Sequence[RadonMeasure],
                           labels: Optional[Sequence[str]] = None) -> SolutionEnvelope:
        self._check_set(F, cfg)
        if not measures:
            raise InvalidParametersException("The measure family is empty")
        tolerance = cfg.h + 1e-12
        table = ProbeTable(name="sigma_moderate", columns=list(ENVELOPE_COLUMNS))
        envelope: Optional[Dict[float, GridFunction]] = None
        previous_sup = 0.0
        for index, measure in enumerate(measures):
            for location, mass in measure.atoms:
                if mass > 0.0 and float(F.distance(location)[0]) > tolerance:
                    raise InvalidGeometryException(f"Measure charges {location} outside F", {"member": index})
            current = self._snapshots(measure, cfg)
            if envelope is None:
                envelope = current
            else:
                envelope = {t: grid.with_values(np.maximum(grid.values, current[t].values))
                            for t, grid in envelope.items()}
            sup = max(grid.sup() for grid in envelope.values())
            if sup < previous_sup:
                table.fail(f"envelope decreased at member {index}")
            previous_sup = sup
            table.add_row(member=index, label=labels[index] if labels else None,
                          total_mass=measure.total_mass(), envelope_sup=sup)
        logger.info(f"σ-moderate envelope of {F.variant} over {len(measures)} measures: sup {previous_sup:.6g}")
        return SolutionEnvelope(snapshots=envelope, report=table)

    # comparisons

    def bilateral_check(self, F: ClosedSetSpec, cfg: SolverConfig,
                        probes: Sequence[Probe], eps_list: Optional[List[float]] = None) -> ProbeTable:
        params = cfg.params
        if not params.supercritical:
            raise InvalidParametersException(f"The sandwich check needs q >= q_c ({params})")
        maximal = self.maximal_solution(F, cfg, eps_list=eps_list, probes=probes)
        table = ProbeTable(name="sandwich", columns=list(SANDWICH_COLUMNS))
        ratios = []
        floor = 1e-12 * float(APrioriBounds.universal(params, cfg.T))
        for x, t in probes:
            u = maximal.value(x, float(t))
            W = self.potential_service.w_series(F, x, t, params)
            ratio = u / W if W > 0.0 else None
            if ratio is None:
                if u > floor:
                    table.fail(f"SandwichAnomaly: W_F = 0 but u = {u:.3g} at x={x}, t={t}")
            elif not (0.0 < ratio < np.inf):
                table.fail(f"ratio {ratio} at x={x}, t={t} is not finite and positive")
            else:
                ratios.append(ratio)
            table.add_row(x=list(np.atleast_1d(x)), t=t, u=u, W=W, ratio=ratio)
        if ratios:
            table.summary.update(min_ratio=min(ratios), max_ratio=max(ratios),
                                 spread=max(ratios) / min(ratios))
        logger.info(f"Sandwich ratios for {F.variant}: {table.summary}")
        return table

    def _default_probes(self, cfg: SolverConfig, radius: float) -> List[Probe]:
        t = cfg.T
        ys = np.linspace(0.0, 5.0, 21)
        return [((radius + y * sqrt(t),) + (0.0,) * (cfg.params.N - 1), t) for y in ys]

    def subcritical_bounds_check(self, cfg: SolverConfig, radius: float = 0.0,
                                 probes: Optional[Sequence[Probe]] = None) -> ProbeTable:
        params = cfg.params
        lam = params.time_exponent
        probes = list(probes or self._default_probes(cfg, radius))
        origin = tuple([0.0] * params.N)
        if radius == 0.0:
            if params.supercritical:
                raise NoProfileRegimeException(f"Point singularities are removable for q >= q_c ({params})")
            profile = self.profile_service.very_singular_profile(params, ProfileKind.RADIAL_VSS)
            maximal = self.maximal_solution(Point(origin), cfg, eps_list=[0.0], probes=probes)
        else:
            if params.N != 1 or params.q >= 3.0:
                raise NoProfileRegimeException(f"Half-line barrier needs N = 1 and 1 < q < 3 ({params})")
            profile = self.profile_service.very_singular_profile(params, ProfileKind.HALF_LINE)
            maximal = self.maximal_solution(Ball(origin, radius), cfg, eps_list=[0.0], probes=probes)
        table = ProbeTable(name="subcritical_bounds", columns=list(PROFILE_COLUMNS))
        gaps, fitted = [], 0.0
        outside: List[Tuple[Probe, float]] = []
        for x, t in probes:
            t = float(t)
            distance = float(np.linalg.norm(np.atleast_1d(x)))
            u = maximal.value(x, t)
            y = (distance - radius) / sqrt(t)
            if radius > 0.0 and y < 0.0:
                continue
            bound = t ** (-lam) * float(profile(y))
            if radius == 0.0:
                holds = u >= (1.0 - self.profile_margin) * bound
                gap = abs(t ** lam * u - float(profile(y)))
                gaps.append(gap)
                shape = min(1.0, y ** (2.0 * lam - params.N) * np.exp(-y * y / 4.0)) if y > 0.0 else 1.0
                fitted = max(fitted, u / (t ** (-lam) * shape))
            else:
                holds = u <= (1.0 + self.profile_margin) * bound
                gap = None
                if distance > radius:
                    outside.append(((x, t), u))
            if not holds:
                side = "below" if radius == 0.0 else "above"
                table.fail(f"u={u:.6g} lies {side} the profile bound {bound:.6g} at x={x}, t={t}")
            table.add_row(x=list(np.atleast_1d(x)), t=t, y=y, u=u, profile_bound=bound,
                          scaled_gap=gap, holds=holds)
        table.summary["f0"] = profile.f0
        if gaps:
            table.summary["gap_sup"] = max(gaps)
            table.summary["envelope_constant"] = fitted
        if outside:
            table.summary["localization_constant"] = APrioriBounds.fit_localization_constant(
                params, [probe for probe, _ in outside], [u for _, u in outside], radius)
        logger.info(f"Subcritical bounds at radius {radius:g} for {params}: {table.summary}")
        return table
