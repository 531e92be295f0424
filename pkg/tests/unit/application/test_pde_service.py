# tests/unit/application/test_pde_service.py
import numpy as np
import pytest

from src.application.services.a_priori_bounds import APrioriBounds
from src.application.services.pde_service import PdeService
from src.domain.entities.solver_config import AbsorptionMode, SolverConfig
from src.domain.exceptions.domain_exceptions import InvalidParametersException, NonpositiveTimeException
from src.domain.value_objects.grid_function import GridFunction
from src.domain.value_objects.problem_params import ProblemParams
from src.domain.value_objects.radon_measure import RadonMeasure


# Fixtures
@pytest.fixture
def pde_service():
    return PdeService()


@pytest.fixture
def small_cfg():
    return SolverConfig.create(ProblemParams(1, 2.0), half_width=4.0, h=0.05, T=0.1)


def _flat(cfg: SolverConfig, amplitude: float) -> GridFunction:
    return cfg.empty_grid().with_values(np.full(cfg.n_nodes, amplitude), time=0.0)


def test_absorb_implicit_solves_pointwise_equation():
    """Test v + dt v^q = b"""
    b = np.array([0.0, 0.5, 10.0, 1e8])
    v = PdeService.absorb_implicit(b, 0.01, 3.0)
    np.testing.assert_allclose(v + 0.01 * v ** 3, b, rtol=1e-12)


def test_absorb_exact_matches_ode_flow():
    """Test the exact flow of v' = -v^2 over dt"""
    v = PdeService.absorb_exact(np.array([2.0, 0.0]), 0.5, 2.0)
    assert v[0] == pytest.approx(1.0 / (0.5 + 0.5))
    assert v[1] == 0.0


def test_step_keeps_nonnegativity_and_advances_time(pde_service, small_cfg):
    """Test one step of a bump stays nonnegative and below its start"""
    x = small_cfg.coordinates()
    u0 = small_cfg.empty_grid().with_values(np.maximum(1.0 - x * x, 0.0), time=0.0)
    u1 = pde_service.step(u0, small_cfg)
    assert u1.time == pytest.approx(small_cfg.dt)
    assert u1.values.min() >= 0.0
    assert u1.sup() <= u0.sup()


def test_step_rejects_foreign_grid(pde_service, small_cfg):
    """Test data on another grid is rejected"""
    other = GridFunction((-4.0,), 0.1, np.zeros(81), nonnegative=True)
    with pytest.raises(InvalidParametersException):
        pde_service.step(other, small_cfg)


def test_discretize_dirac_keeps_mass(pde_service, small_cfg):
    """Test a point mass between nodes becomes a hat of the same mass"""
    grid = pde_service.discretize(RadonMeasure.dirac((0.013,), 2.0), small_cfg)
    assert grid.integral() == pytest.approx(2.0)


def test_discretize_radial_dirac_sits_at_origin(pde_service):
    """Test radial runs accept atoms at the origin only"""
    cfg = SolverConfig.create(ProblemParams(2, 3.0), half_width=2.0, h=0.05, T=0.05)
    assert pde_service.discretize(RadonMeasure.dirac((0.0, 0.0), 1.5), cfg).integral() == pytest.approx(1.5)
    with pytest.raises(InvalidParametersException):
        pde_service.discretize(RadonMeasure.dirac((0.5, 0.0), 1.0), cfg)


def test_comparison_principle(pde_service, small_cfg):
    """Test ordered data give ordered solutions"""
    x = small_cfg.coordinates()
    low = small_cfg.empty_grid().with_values(np.exp(-x * x), time=0.0)
    high = low.with_values(2.0 * low.values)
    u_low = pde_service.solve_cauchy(low, small_cfg).final
    u_high = pde_service.solve_cauchy(high, small_cfg).final
    assert np.all(u_low.values <= u_high.values + 1e-14)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_comparison_principle_random_pairs(pde_service, seed):
    """Test random ordered data stay ordered at every snapshot"""
    rng = np.random.default_rng(seed)
    cfg = SolverConfig.create(ProblemParams(1, 3.0), half_width=4.0, h=0.05, T=0.1,
                              snapshot_times=[0.01, 0.05, 0.1])
    inside = np.abs(cfg.coordinates()) < 3.0
    low = rng.uniform(0.0, 5.0, cfg.n_nodes) * inside
    high = low + rng.uniform(0.0, 5.0, cfg.n_nodes) * inside
    u = pde_service.solve_cauchy(cfg.empty_grid().with_values(low, time=0.0), cfg)
    v = pde_service.solve_cauchy(cfg.empty_grid().with_values(high, time=0.0), cfg)
    for t in cfg.snapshot_times:
        assert np.all(u.at(t).values <= v.at(t).values + 1e-12)


def test_universal_bound_rejects_nonpositive_time():
    """Test the universal bound needs t > 0"""
    with pytest.raises(NonpositiveTimeException):
        APrioriBounds.universal(ProblemParams(1, 2.0), 0.0)


def test_implicit_flat_majorant_decreases():
    """Test the implicit flat majorant solves its recursion and decreases"""
    values = APrioriBounds.implicit_flat(ProblemParams(1, 3.0), 0.01, 10, 100.0)
    assert np.all(np.diff(values) < 0.0)
    assert values[1] + 0.01 * values[1] ** 3 == pytest.approx(values[0])


def test_localization_constant_fit():
    """Test the fitted constant makes the envelope dominate the samples"""
    params = ProblemParams(1, 3.0)
    probes = [((0.0,), 0.1), ((2.0,), 0.1)]
    values = [1.0, 0.5]
    C = APrioriBounds.fit_localization_constant(params, probes, values, 1.0)
    for (x, t), u in zip(probes, values):
        assert APrioriBounds.localization(params, x, t, 1.0, C) >= u * (1.0 - 1e-12)


def test_implicit_flat_matches_pointwise_absorption():
    """Test the flat majorant recursion agrees with the grid absorption solve"""
    values = APrioriBounds.implicit_flat(ProblemParams(1, 3.0), 0.01, 20, 1e8)
    assert np.all((values[1:] >= 0.0) & (values[1:] <= values[:-1]))
    stepped = PdeService.absorb_implicit(values[:-1], 0.01, 3.0)
    np.testing.assert_allclose(values[1:], stepped, rtol=1e-12)


@pytest.mark.slow
def test_localization_envelope_fitted_next_to_support(pde_service):
    """Test a constant fitted next to the support bounds the solution farther out and earlier"""
    params = ProblemParams(1, 3.0)
    r = 1.0
    cfg = SolverConfig.create(params, half_width=3.0, h=0.01, T=0.05, snapshot_times=[0.01, 0.025, 0.05])
    x = cfg.coordinates()
    data = cfg.empty_grid().with_values(np.where(np.abs(x) <= r, 1.0, 0.0), time=0.0)
    trajectory = pde_service.solve_cauchy(data, cfg)

    fit_point = ((1.1,), 0.05)
    u_fit = trajectory.at(0.05).interpolate(fit_point[0])
    C = APrioriBounds.fit_localization_constant(params, [fit_point], [u_fit], r)
    assert C > 0.0

    for position in (1.1, 1.3, 1.5, -1.3):
        for t in (0.01, 0.025, 0.05):
            u = trajectory.at(t).interpolate((position,))
            assert u <= APrioriBounds.localization(params, (position,), t, r, C) * (1.0 + 1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("q", [2.0, 4.0])
def test_flat_data_matches_exact_solution(pde_service, q):
    """Test huge flat data follow ((q-1)t)^{-1/(q-1)} to 1e-3 on [0.1, 1]"""
    params = ProblemParams(1, q)
    times = [float(t) for t in np.linspace(0.1, 1.0, 10)]
    cfg = SolverConfig.create(params, half_width=8.0, h=0.02, T=1.0, absorption=AbsorptionMode.EXACT_FLOW,
                              snapshot_times=times)
    trajectory = pde_service.solve_cauchy(_flat(cfg, 1e8), cfg)
    for t in times:
        exact = float(APrioriBounds.universal(params, t))
        assert trajectory.at(t).interpolate([0.0]) == pytest.approx(exact, rel=1e-3)


@pytest.mark.slow
def test_mass_identity_for_gaussian_data(pde_service):
    """Test ∫_s^T∫u^q + ∫u(T) = ∫u(s) within 1% for s = 0.05, T = 0.5"""
    cfg = SolverConfig.create(ProblemParams(1, 2.0), half_width=8.0, h=0.01, T=0.5)
    x = cfg.coordinates()
    data = cfg.empty_grid().with_values(np.exp(-x * x / (2.0 * 0.25 ** 2)), time=0.0)
    trajectory = pde_service.solve_cauchy(data, cfg)
    assert trajectory.mass_identity_residual(0.05, 0.5) <= 1e-2
    assert trajectory.masses[-1] < trajectory.masses[0]
