import logging
from typing import Union

import numpy as np
from scipy.linalg import solve_banded

from src.application.services.a_priori_bounds import APrioriBounds
from src.domain.entities.solver_config import AbsorptionMode, Geometry, SolverConfig
from src.domain.entities.trajectory import Trajectory
from src.domain.exceptions.domain_exceptions import (
    InvalidParametersException,
    MaximumPrincipleViolatedException,
    PointwiseSolveFailedException,
)
from src.domain.ports.input.pde_service_port import PdeServicePort
from src.domain.value_objects.grid_function import GridFunction, unit_ball_volume, unit_sphere_area
from src.domain.value_objects.radon_measure import RadonMeasure


logger = logging.getLogger(__name__)


class DiffusionOperator:
    """Backward-Euler step (I - Δt Δ_h) u* = u in flux form, Dirichlet at the outer nodes.

    Rows are scaled by the control volumes of the nodes, so Σ V_i u_i only
    changes through the boundary flux and the matrix is an M-matrix.
    """

    def __init__(self, cfg: SolverConfig):
        n, h, dt = cfg.n_nodes, cfg.h, cfg.dt
        if cfg.geometry == Geometry.RADIAL:
            N = cfg.params.N
            r = cfg.coordinates()
            faces = unit_sphere_area(N) * (r[:-1] + 0.5 * h) ** (N - 1)
            volumes = unit_sphere_area(N) * r ** (N - 1) * h
            volumes[0] = unit_ball_volume(N) * (0.5 * h) ** N
            dirichlet = [n - 1]
        else:
            faces = np.ones(n - 1)
            volumes = np.full(n, h)
            dirichlet = [0, n - 1]
        c = dt * faces / h
        diag = volumes.copy()
        diag[:-1] += c
        diag[1:] += c
        bands = np.zeros((3, n))
        # solve_banded layout: bands[0, i+1] = a[i, i+1], bands[2, i] = a[i+1, i]
        bands[1] = diag / volumes
        bands[0, 1:] = -c / volumes[:-1]
        bands[2, :-1] = -c / volumes[1:]
        for i in dirichlet:
            bands[1, i] = 1.0
            if i + 1 < n:
                bands[0, i + 1] = 0.0
            if i > 0:
                bands[2, i - 1] = 0.0
        self.bands = bands
        self.dirichlet = dirichlet

    def apply(self, u: np.ndarray) -> np.ndarray:
        rhs = u.copy()
        rhs[self.dirichlet] = 0.0
        return np.maximum(solve_banded((1, 1), self.bands, rhs), 0.0)


class PdeService(PdeServicePort):
    # absorption

    @staticmethod
    def absorb_implicit(b: np.ndarray, dt: float, q: float, max_iter: int = 50,
                        tolerance: float = 1e-13) -> np.ndarray:
        """Solve v + dt v^q = b pointwise by Newton from above"""
        v = np.minimum(b, (b / dt) ** (1.0 / q))
        for _ in range(max_iter):
            step = (v + dt * v ** q - b) / (1.0 + q * dt * v ** (q - 1.0))
            v = np.maximum(v - step, 0.0)
            if np.all(np.abs(step) <= tolerance * v + 1e-300):
                return v
        raise PointwiseSolveFailedException(
            f"Newton solve of v + dt v^q = b did not converge in {max_iter} iterations",
            {"max_residual": float(np.max(np.abs(v + dt * v ** q - b)))},
        )

    @staticmethod
    def absorb_exact(b: np.ndarray, dt: float, q: float) -> np.ndarray:
        """Exact flow of v' = -v^q over dt"""
        out = np.zeros_like(b)
        positive = b > 0.0
        out[positive] = (b[positive] ** (1.0 - q) + (q - 1.0) * dt) ** (-1.0 / (q - 1.0))
        return out

    def _absorb(self, b: np.ndarray, cfg: SolverConfig) -> np.ndarray:
        if not cfg.absorption_enabled:
            return b
        if cfg.absorption == AbsorptionMode.EXACT_FLOW:
            return self.absorb_exact(b, cfg.dt, cfg.params.q)
        return self.absorb_implicit(b, cfg.dt, cfg.params.q, cfg.newton_max_iter, cfg.newton_tolerance)

    # stepping

    def _check_grid(self, u: GridFunction, cfg: SolverConfig) -> None:
        if u.shape != (cfg.n_nodes,) or abs(u.lo[0] - cfg.lo) > 1e-12 or abs(u.h - cfg.h) > 1e-15:
            raise InvalidParametersException("Grid function does not live on the solver grid",
                                             {"shape": u.shape, "lo": u.lo, "h": u.h})
        if u.values.size and u.values.min() < 0.0:
            raise InvalidParametersException(f"Solver data must be nonnegative, min {u.values.min()}")

    def step(self, u: GridFunction, cfg: SolverConfig) -> GridFunction:
        """One splitting step: implicit diffusion, then pointwise absorption"""
        self._check_grid(u, cfg)
        diffused = DiffusionOperator(cfg).apply(u.values)
        time = (u.time or 0.0) + cfg.dt
        return GridFunction(u.lo, u.h, self._absorb(diffused, cfg), time=time, nonnegative=True,
                            radial_dimension=cfg.radial_dimension)

    # data

    def discretize(self, data: Union[RadonMeasure, GridFunction], cfg: SolverConfig) -> GridFunction:
        """Initial values on the solver grid; atoms become mass-preserving hats of width 2h"""
        grid = cfg.empty_grid()
        if isinstance(data, GridFunction):
            if data.shape == grid.shape and data.lo == grid.lo and abs(data.h - grid.h) < 1e-15:
                values = data.values.copy()
            else:
                values = np.array([data.interpolate([x]) for x in cfg.coordinates()])
            if values.size and values.min() < 0.0:
                raise InvalidParametersException(f"Solver data must be nonnegative, min {values.min()}")
            return grid.with_values(values, time=0.0)
        weights = grid.weights()
        values = np.zeros(cfg.n_nodes)
        for location, mass in data.atoms:
            point = np.asarray(location, dtype=float)
            if cfg.geometry == Geometry.RADIAL:
                if np.linalg.norm(point) > 1e-12:
                    raise InvalidParametersException("Radial runs take atoms at the origin only",
                                                     {"location": location})
                values[0] += mass / weights[0]
                continue
            position = (float(point[0]) - cfg.lo) / cfg.h
            if position < 0 or position > cfg.n_nodes - 1:
                raise InvalidParametersException(f"Atom at {location} lies outside the solver box")
            left = min(int(np.floor(position)), cfg.n_nodes - 2)
            frac = position - left
            values[left] += (1.0 - frac) * mass / cfg.h
            values[left + 1] += frac * mass / cfg.h
        if data.density is not None:
            values += np.array([data.density.interpolate([x]) for x in cfg.coordinates()])
        if values.size and values.min() < 0.0:
            raise InvalidParametersException(f"Solver data must be nonnegative, min {values.min()}")
        return grid.with_values(values, time=0.0)

    def solve_cauchy(self, data: Union[RadonMeasure, GridFunction], cfg: SolverConfig) -> Trajectory:
        """March to cfg.T, recording snapshots, masses and the mass absorbed in each step"""
        u = self.discretize(data, cfg)
        operator = DiffusionOperator(cfg)
        params = cfg.params
        n_steps = cfg.n_steps
        snapshot_steps = {int(round(t / cfg.dt)): t for t in cfg.snapshot_times}
        trajectory = Trajectory()
        trajectory.record(0.0, u.integral(), 0.0)
        if 0 in snapshot_steps:
            trajectory.snapshots[snapshot_steps[0]] = u
        flat = None
        if cfg.absorption_enabled and cfg.absorption == AbsorptionMode.IMPLICIT:
            flat = APrioriBounds.implicit_flat(params, cfg.dt, n_steps, u.sup())
        values = u.values
        weights = u.weights()
        for n in range(1, n_steps + 1):
            diffused = operator.apply(values)
            values = self._absorb(diffused, cfg)
            time = n * cfg.dt
            mass = float(np.sum(weights * values))
            absorbed = float(np.sum(weights * (diffused - values)))
            trajectory.record(time, mass, absorbed)
            if cfg.absorption_enabled:
                bound = float(APrioriBounds.universal(params, time))
                if flat is not None:
                    bound = max(bound, flat[n])
                peak = float(values.max()) if values.size else 0.0
                if peak > bound * (1.0 + 1e-6):
                    raise MaximumPrincipleViolatedException(
                        f"Solution {peak:.6g} exceeds the universal bound {bound:.6g} at t={time:.4g}",
                        {"time": time, "peak": peak, "bound": bound},
                    )
            if n in snapshot_steps:
                trajectory.snapshots[snapshot_steps[n]] = GridFunction(
                    u.lo, u.h, values.copy(), time=snapshot_steps[n], nonnegative=True,
                    radial_dimension=cfg.radial_dimension,
                )
        logger.info(f"Solved to T={cfg.T:g} in {n_steps} steps ({params}, h={cfg.h:g}, dt={cfg.dt:g}); "
                    f"mass {trajectory.masses[0]:.6g} -> {trajectory.masses[-1]:.6g}")
        return trajectory
