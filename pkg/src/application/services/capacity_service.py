import logging
import threading
from math import sqrt
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

from src.application.dtos.capacity_solution_dto import CapacitySolutionDTO
from src.domain.entities.capacity_problem import CapacityProblem
from src.domain.entities.probe_table import ProbeTable
from src.domain.exceptions.domain_exceptions import (
    InvalidGeometryException,
    InvalidParametersException,
    NoClosedFormException,
    OptimizerStalledException,
    PiecesOverlapException,
    UnboundedSetException,
)
from src.domain.ports.input.capacity_service_port import CapacityServicePort
from src.domain.ports.output.calibration_cache_port import CalibrationCachePort
from src.domain.value_objects.capacity_estimate import CapacityEstimate, CapacityMethod
from src.domain.value_objects.closed_set import Ball, ClosedSetSpec, Union
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


logger = logging.getLogger(__name__)

LOCAL_CAPACITY_COLUMNS = ["rho", "rho_over_r", "local_capacity", "global_capacity", "ratio", "envelope"]


class BesselMultiplier:
    """The Fourier multiplier (m^2 + |ξ|^2)^{s/2} on a periodic tensor grid"""

    def __init__(self, shape: Tuple[int, ...], h: float, s: float, mass: float):
        self.shape = shape
        freqs = [2.0 * np.pi * fft.fftfreq(n, d=h) for n in shape[:-1]]
        freqs.append(2.0 * np.pi * fft.rfftfreq(shape[-1], d=h))
        mesh = np.meshgrid(*freqs, indexing="ij", sparse=True)
        xi2 = sum(axis ** 2 for axis in mesh)
        self.symbol = (mass ** 2 + xi2) ** (0.5 * s)

    def _apply(self, values: np.ndarray, factor: np.ndarray) -> np.ndarray:
        spectrum = fft.rfftn(values.reshape(self.shape))
        return fft.irfftn(spectrum * factor, s=self.shape).ravel()

    def forward(self, values: np.ndarray) -> np.ndarray:
        return self._apply(values, self.symbol)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        return self._apply(values, 1.0 / self.symbol)


def _signed_power(u: np.ndarray, exponent: float) -> np.ndarray:
    return np.sign(u) * np.abs(u) ** exponent


class CapacityService(CapacityServicePort):
    def __init__(
        self,
        calibration_cache: CalibrationCachePort,
        grid_spacing: float = 1.0 / 32.0,
        min_spacing: float = 1.0 / 512.0,
        bessel_mass: float = 1.0 / 32.0,
        margin_factor: float = 1.0,
        tolerance: float = 1e-8,
        max_iter: int = 50_000,
        geometry_eps: float = 1e-12,
    ):
        self.calibration_cache = calibration_cache
        self.grid_spacing = grid_spacing
        self.min_spacing = min_spacing
        self.bessel_mass = bessel_mass
        self.margin_factor = margin_factor
        self.tolerance = tolerance
        self.max_iter = max_iter
        self.geometry_eps = geometry_eps
        self._calibration_lock = threading.Lock()

    # problem construction

    def spacing_for(self, K: ClosedSetSpec) -> float:
        """Grid spacing putting at least four nodes across the smallest feature of K"""
        feature = K.min_feature()
        h = self.grid_spacing
        if 0.0 < feature < np.inf:
            h = min(h, feature / 4.0)
        if h < self.min_spacing:
            logger.warning(f"Capacity grid under-resolves {K.variant} (feature {feature:.3g}); "
                           f"using spacing {self.min_spacing:.3g}")
            h = self.min_spacing
        return h

    def problem_for(
        self,
        K: ClosedSetSpec,
        params: ProblemParams,
        h: Optional[float] = None,
        pinned_zero_outside: Optional[ClosedSetSpec] = None,
        refine: bool = True,
        bessel_mass: Optional[float] = None,
        min_length: Optional[float] = None,
        tolerance: Optional[float] = None,
    ) -> CapacityProblem:
        if not K.is_bounded:
            raise UnboundedSetException("Capacity is only computed for compact sets", {"variant": K.variant})
        mass = bessel_mass if bessel_mass is not None else self.bessel_mass
        return CapacityProblem.create(
            params=params,
            K=K,
            h=h if h is not None else self.spacing_for(K),
            bessel_mass=mass,
            margin_factor=self.margin_factor,
            min_length=min_length if min_length is not None else 2.0 / mass,
            pinned_zero_outside=pinned_zero_outside,
            tolerance=tolerance if tolerance is not None else self.tolerance,
            max_iter=self.max_iter,
            refine=refine,
            geometry_eps_relative=self.geometry_eps,
        )

    # dual solver

    def _index_sets(self, problem: CapacityProblem) -> Tuple[np.ndarray, np.ndarray]:
        nodes = problem.nodes()
        if problem.K.is_empty:
            constrained = np.array([], dtype=int)
        else:
            distance = problem.K.distance(nodes)
            constrained = np.flatnonzero(distance <= problem.geometry_eps)
            if constrained.size == 0:
                # K falls between nodes; constrain the closest one
                constrained = np.array([int(np.argmin(distance))])
        pinned = np.array([], dtype=int)
        if problem.pinned_zero_outside is not None:
            outside = ~problem.pinned_zero_outside.contains(nodes, problem.geometry_eps)
            if np.any(outside[constrained]):
                raise InvalidGeometryException("K reaches outside the set where test functions may live")
            pinned = np.flatnonzero(outside)
        return constrained, pinned

    def solve(self, problem: CapacityProblem) -> CapacitySolutionDTO:
        """Maximize the Lagrangian dual of min ||Λ^s η||_p^p subject to η >= 1 on K.

        D(ν) = ν(K) - (1/q) h^N Σ|u|^q with u = Λ^{-s} ν / h^N. The gradient is
        1 - η on K and -η on pinned nodes, where η = Λ^{-s}(|u|^{q-2} u) is the
        primal test function. p D(ν) bounds the capacity from below and the norm
        of η rescaled to be feasible bounds it from above.
        """
        params = problem.params
        q, p = params.q, params.qprime
        size = int(np.prod(problem.shape))
        constrained, pinned = self._index_sets(problem)
        n_c = constrained.size
        if n_c == 0:
            zeros = np.zeros(size)
            return CapacitySolutionDTO(problem, zeros, constrained, pinned, zeros, 0.0, 0.0, 0.0, 0)

        operator = BesselMultiplier(problem.shape, problem.h, problem.s, problem.bessel_mass)
        cell = problem.h ** params.N

        def embed(x: np.ndarray) -> np.ndarray:
            dense = np.zeros(size)
            dense[constrained] = x[:n_c]
            dense[pinned] = x[n_c:]
            return dense

        def evaluate(x: np.ndarray):
            u = operator.inverse(embed(x)) / cell
            eta = operator.inverse(_signed_power(u, q - 1.0))
            value = float(np.sum(x[:n_c]) - cell * np.sum(np.abs(u) ** q) / q)
            grad = np.concatenate([1.0 - eta[constrained], -eta[pinned]])
            return value, grad, eta

        def project(x: np.ndarray) -> np.ndarray:
            x = x.copy()
            np.maximum(x[:n_c], 0.0, out=x[:n_c])
            return x

        def upper_bound(eta: np.ndarray) -> float:
            trial = eta.copy()
            trial[pinned] = 0.0
            floor = float(np.min(trial[constrained]))
            if floor <= 0.0:
                return np.inf
            return float(cell * np.sum(np.abs(operator.forward(trial / floor)) ** p))

        x = np.concatenate([np.ones(n_c), np.zeros(pinned.size)])
        _, _, eta = evaluate(x)
        # η is homogeneous of degree q-1 in ν
        scale = (1.0 / float(np.max(eta[constrained]))) ** (1.0 / (q - 1.0))
        x *= scale
        value, grad, eta = evaluate(x)
        step = scale
        x_prev = x.copy()
        theta = 1.0
        momentum = 0.0
        quiet = 0
        lower, upper = p * value, upper_bound(eta)
        iteration = 0
        for iteration in range(1, problem.max_iter + 1):
            y = x + momentum * (x - x_prev)
            if momentum > 0.0:
                value_y, grad_y, _ = evaluate(y)
            else:
                value_y, grad_y = value, grad
            for _ in range(60):
                z = project(y + step * grad_y)
                value_z, grad_z, eta_z = evaluate(z)
                d = z - y
                if value_z >= value_y + float(grad_y @ d) - float(d @ d) / (2.0 * step):
                    break
                step *= 0.5
            else:
                raise OptimizerStalledException(
                    "Step halving failed to find an ascent step",
                    {"last_value": float(np.sum(x[:n_c])), "bracket_hi": upper, "iteration": iteration},
                )
            if value_z < value and momentum > 0.0:
                # adaptive restart
                theta, momentum = 1.0, 0.0
                x_prev = x.copy()
                continue
            change = abs(value_z - value) / max(abs(value_z), 1e-300)
            x_prev, x = x, z
            value, grad, eta = value_z, grad_z, eta_z
            theta_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * theta * theta))
            momentum = (theta - 1.0) / theta_next
            theta = theta_next
            step *= 1.25
            quiet = quiet + 1 if change < problem.tolerance else 0
            if iteration % 50 == 0:
                lower, upper = p * value, upper_bound(eta)
                logger.debug(f"capacity dual iteration {iteration}: [{lower:.8g}, {upper:.8g}]")
                if upper - lower <= problem.tolerance * upper:
                    break
            if quiet >= 3:
                break
        else:
            raise OptimizerStalledException(
                f"Capacity optimizer did not converge in {problem.max_iter} iterations",
                {"last_value": float(np.sum(x[:n_c])), "bracket_hi": upper_bound(eta)},
            )
        lower, upper = p * value, upper_bound(eta)
        mass = float(np.sum(x[:n_c]))
        upper = max(upper, lower) if np.isfinite(upper) else max(mass, lower)
        logger.debug(f"capacity dual converged after {iteration} iterations: "
                     f"mass {mass:.8g}, bracket [{lower:.8g}, {upper:.8g}]")
        return CapacitySolutionDTO(
            problem=problem,
            multipliers=embed(x),
            constrained=constrained,
            pinned=pinned,
            test_function=eta,
            lower=lower,
            upper=upper,
            mass=mass,
            iterations=iteration,
        )

    # port operations

    def capacity_numeric(self, problem: CapacityProblem) -> CapacityEstimate:
        base = self.solve(problem)
        lo, hi = base.lower, base.upper
        if problem.refine and base.constrained.size:
            fine = self.solve(problem.refined())
            lo, hi = min(lo, fine.lower), max(hi, fine.upper)
            logger.info(f"Capacity of {problem.K.variant} at h={problem.h:g}: {base.value:.6g}, "
                        f"at h={problem.h / 2:g}: {fine.value:.6g}")
        return CapacityEstimate(base.value, min(lo, base.value), max(hi, base.value),
                                CapacityMethod.VARIATIONAL_NUMERIC)

    def capacitary_measure(self, problem: CapacityProblem) -> RadonMeasure:
        """Multipliers of the constraints η >= 1, as atoms on the constrained nodes"""
        solution = self.solve(problem)
        if solution.constrained.size == 0:
            return RadonMeasure.zero()
        nodes = problem.nodes()[solution.constrained]
        masses = solution.multipliers[solution.constrained]
        atoms = tuple((tuple(node), float(mass)) for node, mass in zip(nodes, masses) if mass > 0.0)
        return RadonMeasure(atoms)

    def unit_ball_constant(self, params: ProblemParams) -> CapacityEstimate:
        """Capacity of the closed unit ball, calibrated once per (N, q)"""
        key = f"{params.N},{params.q:g}"
        with self._calibration_lock:
            cached = self.calibration_cache.get(key)
            if cached is not None:
                return cached
            logger.info(f"Calibrating unit-ball capacity for {params}")
            unit = Ball(tuple([0.0] * params.N), 1.0)
            estimate = self.capacity_numeric(self.problem_for(unit, params))
            self.calibration_cache.put(key, estimate)
            logger.info(f"Unit-ball capacity for N={params.N}, q={params.q:g}: {estimate}")
            return estimate

    def capacity_closed_form(self, K: ClosedSetSpec, params: ProblemParams) -> CapacityEstimate:
        """Point -> 0 and Ball(c, r) -> c_ball r^{N - 2/(q-1)}, for q >= q_c"""
        if not params.supercritical:
            raise NoClosedFormException(f"No scaling law below the critical exponent ({params})")
        if K.is_empty:
            return CapacityEstimate.zero(CapacityMethod.CLOSED_FORM_SCALING)
        ball = K.as_ball()
        if ball is None:
            raise NoClosedFormException(f"No closed form for variant {K.variant}", {"variant": K.variant})
        if not isinstance(ball, Ball):
            return CapacityEstimate.zero(CapacityMethod.CLOSED_FORM_SCALING)
        unit = self.unit_ball_constant(params)
        factor = ball.radius ** params.scaling_exponent
        return CapacityEstimate(unit.value * factor, unit.bracket_lo * factor,
                                unit.bracket_hi * factor, CapacityMethod.CLOSED_FORM_SCALING)

    def quasi_additivity_ratio(self, pieces: List[ClosedSetSpec], params: ProblemParams,
                               separation: float) -> float:
        """Σ_j C(G_j) / C(∪ G_j) on a common grid"""
        if not pieces:
            raise InvalidParametersException("Quasi-additivity needs at least one piece")
        if len(pieces) == 1:
            return 1.0
        for i, a in enumerate(pieces):
            for b in pieces[i + 1:]:
                gap = _gap(a, b)
                if gap < separation or gap <= 0.0:
                    raise PiecesOverlapException(
                        f"Pieces are {gap:.3g} apart, required separation {separation:.3g}",
                        {"gap": gap, "separation": separation},
                    )
        union = Union(tuple(pieces))
        h = self.spacing_for(union)
        union_problem = self.problem_for(union, params, h=h, refine=False)
        length = union_problem.period[0]
        total = self.capacity_numeric(union_problem).value
        parts = sum(
            self.capacity_numeric(self.problem_for(piece, params, h=h, refine=False,
                                                   min_length=length)).value
            for piece in pieces
        )
        ratio = parts / total if total > 0 else np.inf
        logger.info(f"Quasi-additivity ratio over {len(pieces)} pieces: {ratio:.6g}")
        return float(ratio)

    def local_vs_global_capacity(self, K: ClosedSetSpec, r: float, rho: float, params: ProblemParams,
                                 bessel_mass: Optional[float] = None,
                                 min_length: Optional[float] = None) -> Tuple[CapacityEstimate, CapacityEstimate]:
        """Capacity with test functions vanishing outside B_{r+ρ}, and without that constraint"""
        if not params.supercritical:
            raise InvalidParametersException(f"Local capacities are compared for q >= q_c only ({params})")
        if r <= 0 or rho <= 0:
            raise InvalidParametersException("Radii r and ρ must be positive", {"r": r, "rho": rho})
        origin = tuple([0.0] * params.N)
        if K.diameter_from(origin) > r * (1.0 + 1e-12):
            raise InvalidGeometryException(f"K does not lie in the ball of radius {r}")
        outer = Ball(origin, r + rho)
        h = self.spacing_for(K)
        mass = bessel_mass if bessel_mass is not None else self.bessel_mass
        length = max(2.0 / mass, 4.0 * (r + rho), min_length or 0.0)
        local = self.capacity_numeric(self.problem_for(K, params, h=h, pinned_zero_outside=outer,
                                                       bessel_mass=mass, min_length=length))
        global_ = self.capacity_numeric(self.problem_for(K, params, h=h, bessel_mass=mass,
                                                         min_length=length))
        logger.info(f"Local/global capacity at r={r:g}, rho={rho:g}: {local.value:.6g} / {global_.value:.6g}")
        return local, global_

    def local_capacity_sweep(self, K: ClosedSetSpec, r: float, rhos: Sequence[float], params: ProblemParams,
                             far_tolerance: float = 0.10, slack: float = 1e-3) -> ProbeTable:
        """Local over global capacity along ρ, checked against the envelope (1+r/ρ)^{2/(q-1)}.

        On a common box the ratio is at least 1, nonincreasing in ρ and within
        `far_tolerance` of 1 once ρ >= 4r. The envelope constant is fitted at the
        ρ closest to r; every smaller ρ must stay below the fitted envelope.
        """
        rhos = sorted(float(rho) for rho in rhos)
        if len(rhos) < 2:
            raise InvalidParametersException("The local capacity sweep needs at least two radii ρ")
        length = max(2.0 / self.bessel_mass, 4.0 * (r + rhos[-1]))
        table = ProbeTable("local_capacity", LOCAL_CAPACITY_COLUMNS)
        for rho in rhos:
            local, global_ = self.local_vs_global_capacity(K, r, rho, params, min_length=length)
            ratio = local.value / global_.value if global_.value > 0.0 else np.inf
            table.add_row(rho=rho, rho_over_r=rho / r, local_capacity=local.value, global_capacity=global_.value,
                          ratio=ratio, envelope=self.capacity_envelope(r, rho, params))
        ratios = table.column("ratio")
        envelopes = table.column("envelope")
        if min(ratios) < 1.0 - slack:
            table.fail(f"local capacity below the global one (ratio {min(ratios):.6g})")
        if any(b > a * (1.0 + slack) for a, b in zip(ratios, ratios[1:])):
            table.fail("ratio increases with ρ")
        far = [ratio for rho, ratio in zip(rhos, ratios) if rho >= 4.0 * r * (1.0 - 1e-12)]
        if any(abs(ratio - 1.0) > far_tolerance for ratio in far):
            table.fail(f"ratio not within {far_tolerance:g} of 1 for ρ >= 4r: {far}")
        fit = int(np.argmin([abs(rho - r) for rho in rhos]))
        constant = ratios[fit] / envelopes[fit]
        for rho, ratio, envelope in zip(rhos[:fit], ratios[:fit], envelopes[:fit]):
            if ratio > constant * envelope * (1.0 + slack):
                table.fail(f"ratio {ratio:.6g} at ρ={rho:g} exceeds the fitted envelope {constant * envelope:.6g}")
        table.summary.update(
            r=r,
            fitted_constant=constant,
            fitted_at=rhos[fit],
            growth=ratios[0] / ratios[fit],
            envelope_growth=envelopes[0] / envelopes[fit],
            far_ratios=far,
        )
        logger.info(f"Local capacity sweep over {len(rhos)} radii: growth {table.summary['growth']:.4g} "
                    f"vs envelope {table.summary['envelope_growth']:.4g}")
        return table

    @staticmethod
    def capacity_envelope(r: float, rho: float, params: ProblemParams) -> float:
        """Growth envelope of the local capacity in ρ"""
        if params.supercritical:
            return (1.0 + r / rho) ** (2.0 / (params.q - 1.0))
        return max(r ** params.N, rho ** params.N) * (1.0 + rho ** (-2.0 / (params.q - 1.0)))


def _gap(a: ClosedSetSpec, b: ClosedSetSpec) -> float:
    """Distance between two sets; exact in 1-D, bounding-box lower bound otherwise"""
    if a.is_empty or b.is_empty:
        return np.inf
    if a.dim == 1:
        return min(
            max(lo2 - hi1, lo1 - hi2, 0.0)
            for lo1, hi1 in a.intervals()
            for lo2, hi2 in b.intervals()
        )
    box_a, box_b = a.bounding_box(), b.bounding_box()
    separation = np.maximum(np.maximum(box_b[0] - box_a[1], box_a[0] - box_b[1]), 0.0)
    return float(np.linalg.norm(separation))
