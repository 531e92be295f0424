import json
import logging
from itertools import product
from math import sqrt
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.application.mappers.closed_set_mapper import ClosedSetMapper
from src.application.mappers.report_mapper import ReportMapper
from src.application.services.appendix_service import AppendixService
from src.application.services.capacity_backend import CachedCapacityBackend
from src.application.services.capacity_service import CapacityService
from src.application.services.heat_kernel_service import HeatKernelService
from src.application.services.pde_service import PdeService
from src.application.services.potential_service import PotentialService
from src.application.services.profile_service import ProfileService
from src.application.services.singular_solution_service import SingularSolutionService
from src.domain.entities.kernel_eval import KernelEval
from src.domain.entities.profile import ProfileKind
from src.domain.entities.solver_config import AbsorptionMode, SolverConfig
from src.domain.exceptions.domain_exceptions import ConfigurationException, GoldenMismatchException
from src.domain.value_objects.closed_set import Ball, ClosedSetSpec, Point
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure
from src.infrastructure.adapters.input.cli.schemas import ExperimentConfigSchema
from src.infrastructure.adapters.output.cache.json_calibration_cache import JsonCalibrationCache
from src.infrastructure.adapters.output.reports.file_report_writer import FileReportWriter
from src.infrastructure.adapters.output.reports.golden_comparator import GoldenComparator
from src.infrastructure.adapters.output.reports.svg_plotter import SvgPlotter
from src.infrastructure.config.settings import Settings, get_settings


logger = logging.getLogger(__name__)

SWEEP_DIR = Path(__file__).resolve().parents[3] / "config" / "sweeps"
REMOVABILITY_EPS = [0.1, 0.05, 0.025, 0.0125]
LOCAL_RHO_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
DEFAULT_SLICES = {"name": "slices", "N": 1, "q": 4.0, "radius": 1.0, "x": [0.0, 0.5, 1.5], "t": [0.1, 0.25]}

Probe = Tuple[Sequence[float], float]
Outcome = Tuple[Dict[str, Any], bool]


def _drift(base: Optional[float], refined: Optional[float]) -> float:
    if base is None or refined is None or base == 0.0:
        return float("inf")
    return abs(refined / base - 1.0)


def grid_probes(N: int, xs: Sequence[float], ts: Sequence[float]) -> List[Dict[str, Any]]:
    return [{"x": [float(x)] + [0.0] * (N - 1), "t": float(t)} for t in ts for x in xs]


class ExperimentController:
    """Builds the services from the settings and runs one experiment per CLI command.

    Every run_* method writes its tables under the output directory and returns
    (payload, passed); the CLI turns `passed` into the exit code.
    """

    def __init__(self, settings: Optional[Settings] = None, output_dir: Optional[str] = None,
                 plot: bool = False):
        self.settings = settings or get_settings()
        self.output_dir = Path(output_dir or self.settings.OUTPUT_DIR)
        self.plot = plot
        self.capacity_service = self.get_capacity_service(self.settings)
        self.pde_service = PdeService()
        self.profile_service = ProfileService()
        self.potential_service = self.get_potential_service(self.capacity_service, self.settings)
        self.singular_solution_service = self.get_singular_solution_service(self.potential_service)
        self.appendix_service = self.get_appendix_service(self.singular_solution_service)

    # wiring

    @staticmethod
    def get_capacity_service(settings: Settings, grid_spacing: Optional[float] = None) -> CapacityService:
        spacing = grid_spacing or settings.CAPACITY_GRID_SPACING
        cache = JsonCalibrationCache(
            settings.PARCAP_CACHE,
            solver_tag={
                "grid_spacing": spacing,
                "bessel_mass": settings.CAPACITY_BESSEL_MASS,
                "tolerance": settings.CAPACITY_TOLERANCE,
            },
        )
        return CapacityService(
            calibration_cache=cache,
            grid_spacing=spacing,
            min_spacing=settings.CAPACITY_MIN_SPACING,
            bessel_mass=settings.CAPACITY_BESSEL_MASS,
            margin_factor=settings.CAPACITY_MARGIN_FACTOR,
            tolerance=settings.CAPACITY_TOLERANCE,
            max_iter=settings.CAPACITY_MAX_ITER,
            geometry_eps=settings.GEOMETRY_EPS,
        )

    @staticmethod
    def get_potential_service(capacity_service: CapacityService, settings: Settings,
                              refinement: int = 1) -> PotentialService:
        backend = CachedCapacityBackend(
            capacity_service,
            grid_spacing=capacity_service.grid_spacing / refinement,
            min_spacing=settings.POTENTIAL_MIN_SPACING / refinement,
            tolerance=settings.POTENTIAL_CAPACITY_TOLERANCE,
        )
        return PotentialService(
            backend,
            integral_nodes=settings.W_INTEGRAL_NODES * refinement,
            tail_tolerance=settings.SERIES_TAIL_TOLERANCE,
            classifier_spread=settings.CLASSIFIER_SPREAD,
            classifier_window=settings.CLASSIFIER_WINDOW,
        )

    def get_singular_solution_service(self, potential_service: PotentialService,
                                      k_list: Optional[List[float]] = None) -> SingularSolutionService:
        return SingularSolutionService(
            self.pde_service,
            potential_service,
            self.capacity_service,
            self.profile_service,
            k_list=k_list or self.settings.K_LIST,
        )

    def get_appendix_service(self, singular_solution_service: SingularSolutionService) -> AppendixService:
        return AppendixService(
            singular_solution_service,
            singular_solution_service.potential_service,
            self.capacity_service,
            self.pde_service,
            grid_samples=self.settings.KERNEL_GRID_SAMPLES,
            quadrature_tolerance=self.settings.ORACLE_QUADRATURE_TOLERANCE,
        )

    # inputs

    @staticmethod
    def load_experiment(path: str) -> ExperimentConfigSchema:
        try:
            with open(path, "r", encoding="utf-8") as handle:
                payload = json.load(handle)
        except OSError as e:
            raise ConfigurationException(f"Cannot read experiment config {path}", {"error": str(e)})
        except json.JSONDecodeError as e:
            raise ConfigurationException(f"Experiment config {path} is not valid JSON", {"error": str(e)})
        return ExperimentConfigSchema.model_validate(payload)

    def load_sweep(self, version: str) -> Dict[str, Any]:
        version = self.settings.SWEEP_VERSION if version == "default" else version
        path = SWEEP_DIR / f"{version}.json"
        if not path.exists():
            raise ConfigurationException(f"Unknown sweep version {version}", {"path": str(path)})
        with path.open("r", encoding="utf-8") as handle:
            return json.load(handle)

    @staticmethod
    def closed_set(config: ExperimentConfigSchema) -> ClosedSetSpec:
        spec = ClosedSetMapper.to_entity(config.set.model_dump())
        if spec.dim != config.N:
            raise ConfigurationException(f"Set has dimension {spec.dim}, experiment has N={config.N}")
        return spec

    @staticmethod
    def probes(config: ExperimentConfigSchema) -> List[Probe]:
        if not config.probes:
            raise ConfigurationException(f"Experiment {config.name} has no probes")
        return [(tuple(p.x), p.t) for p in config.probes]

    def solver_config(self, config: ExperimentConfigSchema, refinement: int = 1) -> SolverConfig:
        """Solver grid of the experiment; refinement r divides h by r and Δt by r²"""
        if config.grid is None:
            raise ConfigurationException(f"Experiment {config.name} needs a solver grid")
        grid = config.grid
        h = grid.h / refinement
        dt = grid.dt / refinement ** 2 if grid.dt is not None else None
        return SolverConfig.create(
            ProblemParams(config.N, config.q), grid.half_width, h, grid.T, dt=dt,
            absorption=AbsorptionMode(grid.absorption),
            snapshot_times=sorted({p.t for p in config.probes} | {grid.T}),
            newton_max_iter=self.settings.NEWTON_MAX_ITER,
        )

    def _services_for(self, config: ExperimentConfigSchema, refinement: int = 1):
        capacity_service = self.capacity_service
        if config.capacity_grid_spacing is not None:
            capacity_service = self.get_capacity_service(self.settings, config.capacity_grid_spacing)
        potential_service = self.get_potential_service(capacity_service, self.settings, refinement)
        singular = SingularSolutionService(
            self.pde_service, potential_service, capacity_service, self.profile_service,
            k_list=config.k_list or self.settings.K_LIST,
        )
        return potential_service, singular

    # outputs

    def _writer(self, name: str) -> FileReportWriter:
        return FileReportWriter(str(self.output_dir / name))

    def _plot(self, name: str, title: str, x, series: Dict[str, Any], xlabel: str, ylabel: str,
              logy: bool = False) -> None:
        if self.plot:
            SvgPlotter(str(self.output_dir / name)).line_plot(title, x, series, xlabel, ylabel, logy)

    # capacity

    def run_capacity(self, K: ClosedSetSpec, params: ProblemParams, h: Optional[float] = None,
                     name: str = "capacity") -> Outcome:
        problem = self.capacity_service.problem_for(K, params, h=h)
        estimate = self.capacity_service.capacity_numeric(problem)
        payload: Dict[str, Any] = {"set": ClosedSetMapper.to_dict(K), "N": params.N, "q": params.q,
                                   "h": problem.h, "estimate": ReportMapper.estimate_to_dict(estimate)}
        passed = estimate.bracket_lo <= estimate.value <= estimate.bracket_hi
        if params.supercritical and K.as_ball() is not None:
            closed = self.capacity_service.capacity_closed_form(K, params)
            payload["closed_form"] = ReportMapper.estimate_to_dict(closed)
        payload["passed"] = passed
        self._writer(name).write_document("capacity", payload)
        return payload, passed

    def run_scaling(self, params: ProblemParams, h: Optional[float] = None, tolerance: float = 0.10,
                    name: str = "scaling") -> Outcome:
        """Numeric C(B_2) / C(B_1) against 2^{N - 2/(q-1)}"""
        origin = tuple([0.0] * params.N)
        h = h or self.capacity_service.grid_spacing
        unit = self.capacity_service.capacity_numeric(
            self.capacity_service.problem_for(Ball(origin, 1.0), params, h=h))
        double = self.capacity_service.capacity_numeric(
            self.capacity_service.problem_for(Ball(origin, 2.0), params, h=2.0 * h))
        expected = 2.0 ** params.scaling_exponent
        ratio = double.value / unit.value
        passed = abs(ratio / expected - 1.0) <= tolerance
        payload = {"N": params.N, "q": params.q, "ratio": ratio, "expected": expected,
                   "unit_ball": ReportMapper.estimate_to_dict(unit),
                   "radius_two_ball": ReportMapper.estimate_to_dict(double), "passed": passed}
        self._writer(name).write_document("scaling", payload)
        return payload, passed

    def run_duality(self, K: ClosedSetSpec, params: ProblemParams, h: Optional[float] = None,
                    tolerance: float = 0.05, name: str = "duality") -> Outcome:
        """Total mass of the capacitary measure against the capacity"""
        problem = self.capacity_service.problem_for(K, params, h=h)
        estimate = self.capacity_service.capacity_numeric(problem)
        measure = self.capacity_service.capacitary_measure(problem)
        ratio = measure.total_mass() / estimate.value
        passed = abs(ratio - 1.0) <= tolerance
        payload = {"set": ClosedSetMapper.to_dict(K), "N": params.N, "q": params.q,
                   "capacity": ReportMapper.estimate_to_dict(estimate),
                   "measure_mass": measure.total_mass(), "ratio": ratio, "passed": passed}
        self._writer(name).write_document("duality", payload)
        return payload, passed

    def run_local_capacity(self, K: ClosedSetSpec, params: ProblemParams,
                           rho_factors: Sequence[float] = LOCAL_RHO_FACTORS, far_tolerance: float = 0.10,
                           name: str = "local_capacity") -> Outcome:
        """Capacity relative to B_{r+ρ} against the global one, with r the reach of K from the origin"""
        r = K.diameter_from(tuple([0.0] * params.N))
        if not 0.0 < r < np.inf:
            raise ConfigurationException(f"Local capacity needs a set of positive reach, got {r}")
        table = self.capacity_service.local_capacity_sweep(K, r, [f * r for f in rho_factors], params,
                                                           far_tolerance=far_tolerance)
        payload = ReportMapper.table_to_dict(table)
        payload.update(set=ClosedSetMapper.to_dict(K), N=params.N, q=params.q)
        writer = self._writer(name)
        writer.write_rows("local_capacity", *ReportMapper.table_to_rows(table))
        writer.write_document("local_capacity", payload)
        self._plot(name, "local capacity", table.column("rho_over_r"),
                   {"local / global": table.column("ratio"),
                    "fitted envelope": [table.summary["fitted_constant"] * e for e in table.column("envelope")]},
                   "ρ / r", "ratio")
        return payload, table.passed

    # potentials

    def run_potential(self, config: ExperimentConfigSchema, drift_limit: float = 0.25,
                      constant_drift_limit: float = 0.30) -> Outcome:
        F = self.closed_set(config)
        params = ProblemParams(config.N, config.q)
        probes = self.probes(config)
        potential_service, _ = self._services_for(config)
        table = potential_service.equivalence_report(F, probes, params)
        writer = self._writer(config.name)
        writer.write_rows("equivalence", *ReportMapper.table_to_rows(table))
        payload: Dict[str, Any] = {"base": ReportMapper.table_to_dict(table)}
        passed = table.passed and "spread" in table.summary
        if config.refine:
            refined_service, _ = self._services_for(config, refinement=2)
            refined = refined_service.equivalence_report(F, probes, params)
            writer.write_rows("equivalence_refined", *ReportMapper.table_to_rows(refined))
            payload["refined"] = ReportMapper.table_to_dict(refined)
            spread_drift = _drift(table.summary.get("spread"), refined.summary.get("spread"))
            constant_drift = _drift(table.summary.get("tail_constant"), refined.summary.get("tail_constant"))
            if table.summary.get("tail_constant") == 0.0 and refined.summary.get("tail_constant") == 0.0:
                constant_drift = 0.0
            payload.update(spread_drift=spread_drift, tail_constant_drift=constant_drift)
            passed = (passed and refined.passed and spread_drift < drift_limit
                      and constant_drift < constant_drift_limit)
        payload["passed"] = passed
        writer.write_document("equivalence", payload)
        ratios = [r if r is not None else np.nan for r in table.column("ratio")]
        self._plot(config.name, "equivalence", list(range(len(ratios))), {"W_integral / W_series": ratios},
                   "probe", "ratio")
        return payload, passed

    # solver

    @staticmethod
    def initial_data(cfg: SolverConfig, data: str, amplitude: float, width: float):
        x = cfg.coordinates()
        grid = cfg.empty_grid()
        if data == "flat":
            return grid.with_values(np.full(x.size, amplitude), time=0.0)
        if data == "gaussian":
            return grid.with_values(amplitude * np.exp(-x * x / (2.0 * width * width)), time=0.0)
        if data == "dirac":
            return RadonMeasure.dirac([0.0] * cfg.params.N, amplitude)
        raise ConfigurationException(f"Unknown initial data {data}")

    def run_solve(self, params: ProblemParams, h: float, T: float, half_width: float, data: str,
                  amplitude: float, width: float = 0.25, dt: Optional[float] = None,
                  absorption: str = "implicit", s: float = 0.05, name: str = "solve") -> Outcome:
        """Flat data is checked against ((q-1)t + A^{1-q})^{-1/(q-1)} on [0.1T, T]; other data by the mass identity"""
        times = sorted({float(t) for t in np.linspace(0.1 * T, T, 10)} | ({s} if s < T else set()))
        cfg = SolverConfig.create(params, half_width, h, T, dt=dt, absorption=AbsorptionMode(absorption),
                                  snapshot_times=times, newton_max_iter=self.settings.NEWTON_MAX_ITER)
        trajectory = self.pde_service.solve_cauchy(self.initial_data(cfg, data, amplitude, width), cfg)
        writer = self._writer(name)
        writer.write_rows("mass", *ReportMapper.trajectory_to_rows(trajectory))
        payload: Dict[str, Any] = {"N": params.N, "q": params.q, "data": data, "h": cfg.h, "dt": cfg.dt,
                                   "T": T, "absorption": cfg.absorption.value}
        origin = [0.0] * params.N
        if data == "flat":
            rows = []
            for t in sorted(trajectory.snapshots):
                if t < 0.1 * T - 1e-12:
                    continue
                exact = ((params.q - 1.0) * t + amplitude ** (1.0 - params.q)) ** (-params.time_exponent)
                u = trajectory.snapshots[t].interpolate(origin)
                rows.append([t, u, exact, abs(u / exact - 1.0)])
            writer.write_rows("flat", ["t", "u", "exact", "relative_error"], rows)
            payload["flat_max_relative_error"] = max(row[3] for row in rows)
            passed = payload["flat_max_relative_error"] <= 1e-3
        else:
            residual = trajectory.mass_identity_residual(s, T)
            payload.update(s=s, mass_identity_residual=residual)
            passed = residual <= 1e-2
        payload["passed"] = passed
        writer.write_document("solve", payload)
        self._plot(name, "mass", trajectory.step_times, {"mass": trajectory.masses}, "t", "mass")
        return payload, passed

    # maximal solutions

    def run_sandwich(self, config: ExperimentConfigSchema, drift_limit: float = 0.5) -> Outcome:
        F = self.closed_set(config)
        probes = self.probes(config)
        _, singular = self._services_for(config)
        table = singular.bilateral_check(F, self.solver_config(config), probes, eps_list=config.eps_list)
        writer = self._writer(config.name)
        writer.write_rows("sandwich", *ReportMapper.table_to_rows(table))
        payload: Dict[str, Any] = {"base": ReportMapper.table_to_dict(table)}
        passed = table.passed and "spread" in table.summary
        if config.refine:
            _, refined_singular = self._services_for(config, refinement=2)
            refined = refined_singular.bilateral_check(F, self.solver_config(config, refinement=2), probes,
                                                       eps_list=config.eps_list)
            writer.write_rows("sandwich_refined", *ReportMapper.table_to_rows(refined))
            payload["refined"] = ReportMapper.table_to_dict(refined)
            drift = _drift(table.summary.get("spread"), refined.summary.get("spread"))
            payload["spread_drift"] = drift
            passed = passed and refined.passed and drift < drift_limit
        payload["passed"] = passed
        writer.write_document("sandwich", payload)
        ratios = [r if r is not None else np.nan for r in table.column("ratio")]
        self._plot(config.name, "sandwich", list(range(len(ratios))), {"u / W": ratios}, "probe", "ratio")
        return payload, passed

    def run_removability(self, config: ExperimentConfigSchema, eps_list: Optional[List[float]] = None,
                         threshold: float = 1e-2, assert_threshold: bool = False) -> Outcome:
        """Maximal solution of a point for q >= q_c as the data support shrinks.

        Every check is reported under `checks`; reaching threshold * t^{-1/(q-1)} at the
        smallest ε only decides the outcome with `assert_threshold`.
        """
        F = self.closed_set(config)
        probes = self.probes(config)
        eps_list = list(eps_list or config.eps_list or REMOVABILITY_EPS)
        potential_service, singular = self._services_for(config)
        cfg = self.solver_config(config)
        envelope = singular.maximal_solution(F, cfg, eps_list=eps_list, probes=probes)
        x, t = probes[0]
        values = [row["u"] for row in envelope.report.rows if tuple(row["x"]) == tuple(x) and row["t"] == t]
        decreasing = all(b < a for a, b in zip(values, values[1:]))
        series = [potential_service.w_series(F, px, pt, cfg.params) for px, pt in probes]
        scale = float(t) ** (-cfg.params.time_exponent)
        checks = {
            "decreasing_in_eps": {"passed": decreasing, "asserted": True},
            "series_vanishes": {"passed": all(w == 0.0 for w in series), "asserted": True},
            "maximal_solution": {"passed": envelope.report.passed, "asserted": True},
            "below_threshold": {"passed": bool(values[-1] < threshold * scale), "asserted": assert_threshold,
                                "value": values[-1], "bound": threshold * scale, "eps": eps_list[-1]},
        }
        payload = {
            "eps": eps_list,
            "u": values,
            "scaled_u": [u / scale for u in values],
            "decay_exponent": envelope.report.summary.get("decay_exponent"),
            "k_converged": envelope.report.summary.get("k_converged"),
            "W_series": series,
            "checks": checks,
        }
        passed = all(check["passed"] for check in checks.values() if check["asserted"])
        if not checks["below_threshold"]["passed"]:
            logger.warning(f"u(0, {t:g}) = {values[-1]:.4g} is still above {threshold:g} t^(-1/(q-1)) "
                           f"at eps={eps_list[-1]:g}")
        payload["passed"] = passed
        writer = self._writer(config.name)
        writer.write_rows("maximal", *ReportMapper.table_to_rows(envelope.report))
        writer.write_document("removability", payload)
        self._plot(config.name, "removability", eps_list, {"u": values}, "eps", "u", logy=True)
        return payload, passed

    def run_envelope(self, config: ExperimentConfigSchema, fraction: float = 1.0 / 3.0) -> Outcome:
        """σ-moderate envelope from scaled capacitary measures against the maximal solution"""
        F = self.closed_set(config)
        probes = self.probes(config)
        _, singular = self._services_for(config)
        cfg = self.solver_config(config)
        maximal = singular.maximal_solution(F, cfg, eps_list=config.eps_list, probes=probes)
        family = singular.measure_family(F, cfg, probes=probes[:1])
        labels = [label for label, _ in family]
        envelope = singular.sigma_moderate_sup(F, cfg, [measure for _, measure in family], labels)
        rows = []
        for x, t in probes:
            lower, upper = envelope.value(x, t), maximal.value(x, t)
            rows.append([list(x), t, lower, upper, lower / upper if upper > 0.0 else None])
        ratios = [row[4] for row in rows if row[4] is not None]
        passed = envelope.report.passed and bool(ratios) and min(ratios) >= fraction
        payload = {"members": len(family), "min_ratio": min(ratios) if ratios else None,
                   "fraction": fraction, "monotone": envelope.report.passed, "passed": passed}
        writer = self._writer(config.name)
        writer.write_rows("envelope_members", *ReportMapper.table_to_rows(envelope.report))
        writer.write_rows("envelope", ["x", "t", "sigma_moderate", "maximal", "ratio"], rows)
        writer.write_document("envelope", payload)
        return payload, passed

    def run_wiener(self, config: ExperimentConfigSchema) -> Outcome:
        K = self.closed_set(config)
        probes = self.probes(config)
        _, singular = self._services_for(config)
        appendix = self.get_appendix_service(singular)
        table = appendix.wiener_upper_consistency(K, self.solver_config(config), probes)
        payload = ReportMapper.table_to_dict(table)
        writer = self._writer(config.name)
        writer.write_rows("wiener", *ReportMapper.table_to_rows(table))
        writer.write_document("wiener", payload)
        return payload, table.passed

    # profiles

    def run_profile(self, params: ProblemParams, kind: ProfileKind, name: str = "profile") -> Outcome:
        profile = self.profile_service.very_singular_profile(params, kind)
        refined = ProfileService(max_step=0.01).very_singular_profile(params, kind)
        shift = abs(profile.f0 - refined.f0)
        tail = ProfileService.tail_shape(profile, 0.5 * profile.y_separation, profile.y_separation)
        payload = ReportMapper.profile_to_dict(profile)
        payload.update(f0_refined=refined.f0, f0_shift=shift,
                       tail_shape_range=float(np.ptp(tail)) if tail.size else None)
        passed = shift <= 1e-6 * profile.f0
        payload["passed"] = passed
        writer = self._writer(name)
        writer.write_rows("profile", *ReportMapper.profile_to_rows(profile))
        writer.write_document("profile", payload)
        self._plot(name, "profile", profile.y, {"f": profile.f}, "y", "f", logy=True)
        return payload, passed

    def run_subcritical(self, params: ProblemParams, h: float, T: float, radius: float = 0.0,
                        gap_limit: float = 1e-2, name: str = "subcritical") -> Outcome:
        """Maximal solution of a point (or a half-line barrier) against the self-similar profile"""
        half_width = radius + 10.0 * sqrt(T) + 0.5
        cfg = SolverConfig.create(params, half_width, h, T, newton_max_iter=self.settings.NEWTON_MAX_ITER)
        table = self.singular_solution_service.subcritical_bounds_check(cfg, radius=radius)
        payload = ReportMapper.table_to_dict(table)
        passed = table.passed
        if radius == 0.0:
            passed = passed and table.summary.get("gap_sup", np.inf) <= gap_limit
        payload["passed"] = passed
        writer = self._writer(name)
        writer.write_rows("bounds", *ReportMapper.table_to_rows(table))
        writer.write_document("bounds", payload)
        self._plot(name, "bounds", table.column("y"), {"u": table.column("u"),
                                                       "profile bound": table.column("profile_bound")},
                   "y", "u", logy=True)
        return payload, passed

    # appendix

    def run_appendix(self, lemma: str, sweep_version: str = "default") -> Outcome:
        sweep = self.load_sweep(sweep_version)
        runners = {
            "kernel": self._appendix_kernel,
            "integral": self._appendix_integral,
            "series": self._appendix_series,
            "spherical": self._appendix_spherical,
            "ell": self._appendix_ell,
            "slices": self._appendix_slices,
        }
        if lemma == "all":
            results = {key: runner(sweep) for key, runner in runners.items()}
            return {key: result[0] for key, result in results.items()}, all(r[1] for r in results.values())
        if lemma not in runners:
            raise ConfigurationException(f"Unknown lemma {lemma}", {"choices": sorted(runners)})
        return runners[lemma](sweep)

    def _appendix_kernel(self, sweep: Dict[str, Any]) -> Outcome:
        rows = []
        for a, b, t, N in sweep["kernel"]["tuples"]:
            N = int(N)
            value, info = self.appendix_service.kernel_max(a, b, t, N)
            theta = max(1.0 / (2.0 * N), 1.0 / a)
            variant = self.appendix_service.kernel_variant_bound(a, t, N, theta)
            rows.append([a, b, t, N, value, info["grid_value"], info["relative"], variant,
                         variant >= value * (1.0 - 1e-12)])
        columns = ["a", "b", "t", "N", "closed_form", "grid_max", "relative", "variant_bound", "variant_dominates"]
        passed = all(row[-1] for row in rows)
        payload = {"tuples": len(rows), "max_relative": max(row[6] for row in rows), "passed": passed}
        writer = self._writer("appendix")
        writer.write_rows("kernel", columns, rows)
        writer.write_document("kernel", payload)
        return payload, passed

    def _appendix_integral(self, sweep: Dict[str, Any]) -> Outcome:
        config = sweep["integral"]
        kappa = float(config.get("kappa", 1.0))
        report = self.appendix_service.integral_sweep(config)
        asymmetry = 0.0
        for row in report.rows:
            mirrored = self.appendix_service.sharp_integral_ratio(row["b"], row["a"], row["B"], row["A"], kappa)
            asymmetry = max(asymmetry, abs(mirrored / row["ratio"] - 1.0))
        peak_error = 0.0
        for A, B in product(config["A"], config["B"]):
            # maximiser B/(A+B), maximum e^{-(A+B)²/4}
            x_peak, value = self.appendix_service.exponential_peak(A, B)
            exponent = 0.25 * (A + B) ** 2
            peak_error = max(peak_error, abs(x_peak - B / (A + B)), abs(-np.log(value) / exponent - 1.0))
        payload = ReportMapper.report_to_dict(report)
        payload["max_asymmetry"] = asymmetry
        payload["max_peak_error"] = peak_error
        passed = report.passed and asymmetry < 1e-6 and peak_error < 1e-6
        payload["passed"] = passed
        writer = self._writer("appendix")
        writer.write_rows("integral", *ReportMapper.report_to_rows(report))
        writer.write_document("integral", payload)
        return payload, passed

    def _appendix_series(self, sweep: Dict[str, Any]) -> Outcome:
        report = self.appendix_service.series_sweep(sweep["series"])
        groups: Dict[tuple, List[float]] = {}
        for row in report.rows:
            key = (row["alpha"], row["beta"], row["gamma"], row["delta"], row["ell"])
            groups.setdefault(key, []).append(row["ratio"])
        spreads = {",".join(f"{v:g}" for v in key): max(values) / min(values) for key, values in groups.items()}
        payload = ReportMapper.report_to_dict(report)
        payload["spreads"] = spreads
        passed = report.passed and all(spread < 10.0 for spread in spreads.values())
        payload["passed"] = passed
        writer = self._writer("appendix")
        writer.write_rows("series", *ReportMapper.report_to_rows(report))
        writer.write_document("series", payload)
        return payload, passed

    def _appendix_spherical(self, sweep: Dict[str, Any]) -> Outcome:
        config = sweep["spherical"]
        kernel = HeatKernelService(KernelEval(ProblemParams(3, 2.0)))
        rows = []
        closed_error, recursion_error, envelopes = 0.0, 0.0, []
        for m in config["quadrature_m"]:
            value = kernel.spherical_integral(3, m)
            error = abs(value / kernel.spherical_closed_form(3, m) - 1.0)
            closed_error = max(closed_error, error)
            rows.append(["closed_form", 3, m, value, error])
        for N, m in product(config["recursion_N"], config["recursion_m"]):
            value = kernel.spherical_integral(N, m)
            error = abs(kernel.spherical_recursion(N, m) / value - 1.0)
            recursion_error = max(recursion_error, error)
            rows.append(["recursion", N, m, value, error])
        for N, m in product(config["envelope_N"], config["envelope_m"]):
            ratio = kernel.spherical_envelope_ratio(N, m)
            envelopes.append(ratio)
            rows.append(["envelope", N, m, ratio, None])
        passed = closed_error <= 1e-9 and recursion_error <= 1e-9 and bool(np.all(np.isfinite(envelopes)))
        payload = {"closed_form_error": closed_error, "recursion_error": recursion_error,
                   "max_envelope_ratio": max(envelopes), "passed": passed}
        writer = self._writer("appendix")
        writer.write_rows("spherical", ["check", "N", "m", "value", "relative_error"], rows)
        writer.write_document("spherical", payload)
        return payload, passed

    def _appendix_ell(self, sweep: Dict[str, Any]) -> Outcome:
        payload = {f"N={N}": self.appendix_service.in_ball_mass_sup(N) for N in (1, 2, 3)}
        passed = all(0.0 < entry["value"] <= 1.0 for entry in payload.values())
        self._writer("appendix").write_document("ell", payload)
        return payload, passed

    def _appendix_slices(self, sweep: Dict[str, Any]) -> Outcome:
        """Heat potential of the slice measures against their shell weights, in [1, e^{1/4}]"""
        config = sweep.get("slices", DEFAULT_SLICES)
        params = ProblemParams(int(config["N"]), float(config["q"]))
        F = Ball(tuple([0.0] * params.N), float(config["radius"]))
        rows = []
        for x, t in product(config["x"], config["t"]):
            point = [float(x)] + [0.0] * (params.N - 1)
            ratio = self.appendix_service.slice_measure_ratio(F, point, float(t), params)
            rows.append([x, t, ratio, 1.0 - 1e-6 <= ratio <= np.exp(0.25) * (1.0 + 1e-6)])
        passed = all(row[-1] for row in rows)
        ratios = [row[2] for row in rows]
        payload = {"name": config.get("name", "slices"), "probes": len(rows), "min_ratio": min(ratios),
                   "max_ratio": max(ratios), "passed": passed}
        writer = self._writer("appendix")
        writer.write_rows("slices", ["x", "t", "ratio", "within_bounds"], rows)
        writer.write_document("slices", payload)
        return payload, passed

    # reproducibility

    def run_golden(self, output: str, golden: str, rtol: Optional[float] = None,
                   field_rtol: Optional[Dict[str, float]] = None) -> Outcome:
        """Per-field tolerances from the command line override GOLDEN_FIELD_RTOL"""
        comparator = GoldenComparator(rtol=rtol or self.settings.GOLDEN_RTOL,
                                      field_rtol=self.settings.GOLDEN_FIELD_RTOL)
        mismatches = comparator.compare(Path(output), Path(golden), field_rtol)
        if mismatches:
            raise GoldenMismatchException(f"{len(mismatches)} fields differ from {golden}, first {mismatches[0]}",
                                          {"mismatches": mismatches[:20]})
        tolerances = {**self.settings.GOLDEN_FIELD_RTOL, **(field_rtol or {})}
        return {"output": output, "golden": golden, "field_rtol": tolerances, "mismatches": []}, True
