import logging
import warnings
from itertools import product
from math import exp, sqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, optimize, special, stats

from src.application.services.capacity_service import CapacityService
from src.application.services.heat_kernel_service import HeatKernelService
from src.application.services.pde_service import PdeService
from src.application.services.potential_service import PotentialService
from src.application.services.singular_solution_service import SingularSolutionService
from src.domain.entities.inequality_report import InequalityReport
from src.domain.entities.kernel_eval import KernelEval
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.solver_config import SolverConfig
from src.domain.exceptions.domain_exceptions import (
    InvalidParametersException,
    OracleDisagreementException,
    QuadratureFailedException,
)
from src.domain.ports.input.appendix_service_port import AppendixServicePort
from src.domain.value_objects.closed_set import ClosedSetSpec, as_points
from src.domain.value_objects.problem_params import ProblemParams


logger = logging.getLogger(__name__)

WIENER_COLUMNS = ["x", "t", "u", "wiener_sum", "constant"]


class AppendixService(AppendixServicePort):
    """Auxiliary inequalities checked against brute-force oracles"""

    def __init__(
        self,
        singular_solution_service: SingularSolutionService,
        potential_service: PotentialService,
        capacity_service: CapacityService,
        pde_service: PdeService,
        grid_samples: int = 1000,
        agreement: float = 5e-3,
        quadrature_tolerance: float = 1e-10,
    ):
        self.singular_solution_service = singular_solution_service
        self.potential_service = potential_service
        self.capacity_service = capacity_service
        self.pde_service = pde_service
        self.grid_samples = grid_samples
        self.agreement = agreement
        self.quadrature_tolerance = quadrature_tolerance

    # Gaussian kernel maximum

    @staticmethod
    def kernel_max_closed_form(a: float, b: float, t: float, N: int) -> float:
        """max σ^{-N/2} e^{-ρ²/4σ} over 0 < σ <= t, at <= ρ² + σ <= bt"""
        if a > 2.0 * N:
            return exp(0.25) * t ** (-0.5 * N) * exp(-0.25 * a)
        return exp(0.25) * (2.0 * N / (a * t)) ** (0.5 * N) * exp(-0.5 * N)

    def kernel_grid_max(self, a: float, b: float, t: float, N: int) -> Tuple[float, float, float]:
        """Brute-force maximum on a σ (geometric) × ρ²+σ (linear) grid; returns (value, σ, ρ²)"""
        sigma = t * np.geomspace(1e-6, 1.0, self.grid_samples)
        fraction = np.linspace(0.0, 1.0, self.grid_samples)
        lower = np.maximum(a * t, sigma)[:, None]
        total = lower + fraction[None, :] * (b * t - lower)
        rho2 = total - sigma[:, None]
        feasible = (total <= b * t * (1.0 + 1e-15)) & (rho2 >= 0.0)
        log_j = -0.5 * N * np.log(sigma)[:, None] - rho2 / (4.0 * sigma[:, None])
        log_j = np.where(feasible, log_j, -np.inf)
        i, j = np.unravel_index(int(np.argmax(log_j)), log_j.shape)
        return float(np.exp(log_j[i, j])), float(sigma[i]), float(rho2[i, j])

    def kernel_max(self, a: float, b: float, t: float, N: int) -> Tuple[float, Dict[str, float]]:
        if not (0.0 < a < b) or t <= 0.0 or N < 1:
            raise InvalidParametersException("Kernel maximum needs 0 < a < b, t > 0 and N >= 1",
                                             {"a": a, "b": b, "t": t, "N": N})
        value = self.kernel_max_closed_form(a, b, t, N)
        searched, sigma, rho2 = self.kernel_grid_max(a, b, t, N)
        disagreement = abs(value - searched) / value
        if disagreement > self.agreement:
            raise OracleDisagreementException(
                f"Closed-form kernel maximum {value:.6g} vs grid search {searched:.6g}",
                {"a": a, "b": b, "t": t, "N": N, "relative": disagreement},
            )
        branch = "boundary" if a > 2.0 * N else "interior"
        logger.debug(f"Kernel max a={a:g}, b={b:g}, t={t:g}, N={N}: {value:.6g} ({branch}), grid {searched:.6g}")
        return value, {"sigma": sigma, "rho2": rho2, "grid_value": searched, "relative": disagreement}

    @staticmethod
    def kernel_variant_bound(a: float, t: float, N: int, theta: float) -> float:
        """e^{1/4} (2Nθ/t)^{N/2} e^{-a/4}, valid for θ >= 1/2N and θa >= 1"""
        if theta < 1.0 / (2.0 * N) or theta * a < 1.0:
            raise InvalidParametersException("Variant bound needs θ >= 1/2N and θa >= 1", {"theta": theta, "a": a})
        return exp(0.25) * (2.0 * N * theta / t) ** (0.5 * N) * exp(-0.25 * a)

    # two-sided Gaussian integral

    @staticmethod
    def integral_envelope(a: float, b: float, A: float, B: float) -> float:
        """A^{1-a} B^{1-b} (A+B)^{a+b-2}, the integral with e^{-(A+B)²/4} factored out"""
        return A ** (1.0 - a) * B ** (1.0 - b) * (A + B) ** (a + b - 2.0)

    @staticmethod
    def exponential_peak(A: float, B: float) -> Tuple[float, float]:
        """Maximiser and maximum of e^{-A²/4(1-x)} e^{-B²/4x} on (0, 1)"""
        result = optimize.minimize_scalar(
            lambda x: A * A / (4.0 * (1.0 - x)) + B * B / (4.0 * x),
            bounds=(1e-12, 1.0 - 1e-12), method="bounded", options={"xatol": 1e-12},
        )
        return float(result.x), float(np.exp(-result.fun))

    def scaled_integral(self, a: float, b: float, A: float, B: float,
                        tolerance: Optional[float] = None) -> float:
        """∫_0^1 (1-x)^{-a} x^{-b} e^{-A²/4(1-x)} e^{-B²/4x} dx · e^{(A+B)²/4}"""
        tolerance = tolerance or self.quadrature_tolerance
        peak = B / (A + B)
        shift = 0.25 * (A + B) ** 2

        def exponent(x, y):
            # x + y = 1, both kept to avoid cancellation near the endpoints
            return shift - A * A / (4.0 * y) - B * B / (4.0 * x)

        def left(u):
            x = u * u
            if x <= 0.0:
                return 0.0
            return 2.0 * u * exp(exponent(x, 1.0 - x) - a * np.log1p(-x) - b * np.log(x))

        def right(v):
            y = v * v
            if y <= 0.0:
                return 0.0
            return 2.0 * v * exp(exponent(1.0 - y, y) - a * np.log(y) - b * np.log1p(-y))

        total = 0.0
        for integrand, upper in ((left, sqrt(peak)), (right, sqrt(1.0 - peak))):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", integrate.IntegrationWarning)
                value, error = integrate.quad(integrand, 0.0, upper, epsabs=0.0, epsrel=tolerance, limit=400)
            if caught:
                logger.debug(f"quad warned on a={a:g}, b={b:g}, A={A:g}, B={B:g}: {caught[0].message}")
            if error > max(1e4 * tolerance, 1e-6) * abs(value) + 1e-300:
                raise QuadratureFailedException(f"Quadrature error {error:.3g} on value {value:.3g}",
                                                {"a": a, "b": b, "A": A, "B": B})
            total += value
        return total

    def sharp_integral_ratio(self, a: float, b: float, A: float, B: float, kappa: float = 1.0,
                             tolerance: Optional[float] = None) -> float:
        if a <= 0.0 or b <= 0.0 or kappa <= 0.0 or A <= 0.0 or B <= kappa / A:
            raise InvalidParametersException("Integral estimate needs a, b, κ, A > 0 and B > κ/A",
                                             {"a": a, "b": b, "A": A, "B": B, "kappa": kappa})
        return self.scaled_integral(a, b, A, B, tolerance) / self.integral_envelope(a, b, A, B)

    def integral_sweep(self, sweep: Dict[str, Any], tolerance: Optional[float] = None) -> InequalityReport:
        """Ratio over every (a, b, A, B) of the sweep with AB > κ, re-run with a 10× tighter tolerance"""
        tolerance = tolerance or self.quadrature_tolerance
        kappa = float(sweep.get("kappa", 1.0))
        rows: List[Dict[str, Any]] = []
        refined = 0.0
        for a, b, A, B in product(sweep["a"], sweep["b"], sweep["A"], sweep["B"]):
            if A * B <= kappa:
                continue
            ratio = self.sharp_integral_ratio(a, b, A, B, kappa, tolerance)
            refined = max(refined, self.sharp_integral_ratio(a, b, A, B, kappa, tolerance / 10.0))
            rows.append({"a": a, "b": b, "A": A, "B": B, "ratio": ratio})
        rows.sort(key=lambda row: (row["a"], row["b"], row["A"], row["B"]))
        report = InequalityReport.create("integral", sweep.get("name", "integral"), rows,
                                         refined_max_ratio=refined)
        logger.info(f"Integral sweep over {len(rows)} tuples: max ratio {report.max_ratio:.6g} at {report.argmax}")
        return report

    # lattice series

    def series_bound_ratio(self, alpha: float, beta: float, gamma: float, delta: float,
                           ell: int, n: int) -> float:
        if gamma <= 1.0 or delta <= 0.0 or ell < 2 or n <= ell:
            raise InvalidParametersException("Series bound needs γ > 1, δ > 0, ℓ >= 2 and n > ℓ",
                                             {"gamma": gamma, "delta": delta, "ell": ell, "n": n})
        p = np.arange(1, n - ell + 1, dtype=float)
        root_n = sqrt(n)
        log_terms = (alpha * np.log(p) + beta * np.log(root_n - np.sqrt(p))
                     - delta * (np.sqrt(p) + sqrt(gamma) * (root_n - np.sqrt(p + 1.0))) ** 2)
        log_envelope = (alpha - 0.5 * beta) * np.log(n) - delta * n
        return float(np.exp(special.logsumexp(log_terms) - log_envelope))

    def series_sweep(self, sweep: Dict[str, Any]) -> InequalityReport:
        rows = [
            {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta, "ell": ell, "n": n,
             "ratio": self.series_bound_ratio(alpha, beta, gamma, delta, ell, n)}
            for alpha, beta, gamma, delta, ell, n in product(
                sweep["alpha"], sweep["beta"], sweep["gamma"], sweep["delta"], sweep["ell"], sweep["n"])
            if n > ell
        ]
        return InequalityReport.create("series", sweep.get("name", "series"), rows)

    # heat mass of the unit ball

    @staticmethod
    def in_ball_mass(N: int, radius: float, tau: float) -> float:
        """(4πτ)^{-N/2} ∫_{|v|<=1} e^{-|ξ-v|²/4τ} dv at |ξ| = radius"""
        if radius == 0.0:
            return float(stats.chi2.cdf(1.0 / (2.0 * tau), N))
        return float(stats.ncx2.cdf(1.0 / (2.0 * tau), N, radius * radius / (2.0 * tau)))

    def in_ball_mass_sup(self, N: int, samples: int = 200, tau_floor: float = 1e-4) -> Dict[str, float]:
        """Largest in-ball Gaussian mass over |ξ|² + τ <= 1, τ >= tau_floor"""
        best = {"value": 0.0, "radius": 0.0, "tau": 0.0}
        for tau in np.geomspace(tau_floor, 1.0, samples):
            for radius in np.linspace(0.0, sqrt(max(1.0 - tau, 0.0)), samples):
                value = self.in_ball_mass(N, radius, tau)
                if value > best["value"]:
                    best = {"value": value, "radius": float(radius), "tau": float(tau)}
        return best

    # slice measures

    def slice_measure_ratio(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """ℍ[Σ μ_n](x, t) over (4πt)^{-N/2} Σ e^{-(n+1)/4} μ_n(R^N); at least 1"""
        kernel = HeatKernelService(KernelEval(params))
        numerator, denominator = 0.0, 0.0
        for n, measure in self.singular_solution_service.slice_measures(F, x, t, params):
            numerator += kernel.heat_potential(measure, x, t)
            denominator += (4.0 * np.pi * t) ** (-0.5 * params.N) * exp(-(n + 1) / 4.0) * measure.total_mass()
        if denominator == 0.0:
            return np.inf if numerator > 0.0 else 1.0
        return numerator / denominator

    # Wiener estimate

    def wiener_upper_consistency(self, K: ClosedSetSpec, cfg: SolverConfig,
                                 probes: Sequence[Tuple[Sequence[float], float]],
                                 rho: Optional[float] = None,
                                 eps: Optional[float] = None) -> ProbeTable:
        params = cfg.params
        if not params.supercritical:
            raise InvalidParametersException(f"The Wiener estimate is checked for q >= q_c ({params})")
        eps = 2.0 * cfg.h if eps is None else eps
        maximal = self.singular_solution_service.maximal_solution(K, cfg, eps_list=[eps], probes=probes)
        table = ProbeTable(name="wiener_upper", columns=list(WIENER_COLUMNS))
        constants = []
        floor = 1e-12 * float((cfg.T * (params.q - 1.0)) ** (-params.time_exponent))
        for x, t in probes:
            u = maximal.value(x, float(t))
            # t^{-N/2} Σ d_{n+1}^{N-2/(q-1)} e^{-n/4} C(K_n/d_{n+1}) is the series potential
            wiener = self.potential_service.w_series(K, x, t, params)
            constant = u / wiener if wiener > 0.0 else None
            if constant is not None:
                constants.append(constant)
            elif u > floor:
                table.fail(f"Wiener sum vanishes but u = {u:.3g} at x={x}, t={t}")
            table.add_row(x=list(np.atleast_1d(x)), t=t, u=u, wiener_sum=wiener, constant=constant)
        table.summary["fitted_constant"] = max(constants) if constants else 0.0
        table.summary.update(self._global_ratio(K, cfg, eps, rho))
        logger.info(f"Wiener consistency for {K.variant}: {table.summary}")
        return table

    def _global_ratio(self, K: ClosedSetSpec, cfg: SolverConfig, eps: float,
                      rho: Optional[float]) -> Dict[str, float]:
        """(∫_s^T∫u^q + ∫u(T)) / C^{B_{r+ρ}}(K) with s = (r+ρ)², the part of Q_T above the cone"""
        params = cfg.params
        origin = as_points([0.0] * params.N, params.N)[0]
        r = max(K.diameter_from(origin), cfg.h)
        rho = rho if rho is not None else r
        start = (r + rho) ** 2
        if start >= cfg.T:
            return {"global_ratio": float("nan"), "cone_time": start}
        local, _ = self.capacity_service.local_vs_global_capacity(K, r, rho, params)
        data = self.singular_solution_service.initial_data(K, eps, self.singular_solution_service.k_list[-1], cfg)
        trajectory = self.pde_service.solve_cauchy(data, cfg)
        times = np.asarray(trajectory.step_times)
        i_s = int(np.argmin(np.abs(times - start)))
        lhs = float(np.sum(trajectory.absorbed[i_s + 1:])) + trajectory.masses[-1]
        ratio = lhs / local.value if local.value > 0.0 else float("inf")
        return {"global_ratio": ratio, "global_lhs": lhs, "local_capacity": local.value, "cone_time": start}
