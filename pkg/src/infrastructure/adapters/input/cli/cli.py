import json
import logging
from math import sqrt
from typing import Any, Dict, Optional

import click

from src.domain.entities.profile import ProfileKind
from src.domain.value_objects.problem_params import ProblemParams
from src.infrastructure.adapters.input.cli.error_handler import EXIT_FAILED, EXIT_PASS, ParcapGroup, handle_errors
from src.infrastructure.adapters.input.cli.experiment_controller import ExperimentController, grid_probes
from src.infrastructure.adapters.input.cli.schemas import ExperimentConfigSchema
from src.infrastructure.config.settings import get_settings


logger = logging.getLogger(__name__)

SET_CHOICES = ["ball", "point", "box", "cantor"]
PROBE_X = [0.0, 0.5, 1.0, 1.5, 2.0]
PROBE_T = [0.05, 0.1, 0.2]


def _set_payload(shape: str, N: int, radius: float) -> Dict[str, Any]:
    origin = [0.0] * N
    if shape == "ball":
        return {"variant": "ball", "center": origin, "radius": radius}
    if shape == "point":
        return {"variant": "point", "center": origin}
    if shape == "box":
        return {"variant": "box", "lo": [-radius] * N, "hi": [radius] * N}
    return {"variant": "cantor", "interval": [-radius, radius], "ratio": 1.0 / 3.0, "depth": 3}


def _experiment(config_path: Optional[str], name: str, shape: str, N: int, q: float, radius: float,
                h: float, T: float, probe_x=PROBE_X, probe_t=PROBE_T, **extra: Any) -> ExperimentConfigSchema:
    """Experiment from a JSON file, or from the command-line shorthand"""
    if config_path:
        return ExperimentController.load_experiment(config_path)
    reach = 0.0 if shape == "point" else radius * (sqrt(N) if shape == "box" else 1.0)
    payload = {
        "name": name,
        "N": N,
        "q": q,
        "set": _set_payload(shape, N, radius),
        "grid": {"h": h, "T": T, "half_width": max(reach + 4.0 * sqrt(T) + 1.0, max(probe_x) + 0.5)},
        "probes": grid_probes(N, probe_x, [t for t in probe_t if t <= T]),
    }
    payload.update({k: v for k, v in extra.items() if v is not None})
    return ExperimentConfigSchema.model_validate(payload)


def _finish(payload: Dict[str, Any], passed: bool) -> int:
    click.echo(json.dumps(payload, indent=2, default=str))
    if not passed:
        logger.warning("Experiment checks failed")
        return EXIT_FAILED
    return EXIT_PASS


def _parse_field_rtol(ctx: click.Context, param: click.Parameter, values) -> Dict[str, float]:
    tolerances: Dict[str, float] = {}
    for item in values:
        name, sep, value = item.partition("=")
        try:
            rtol = float(value)
        except ValueError:
            rtol = -1.0
        if not sep or not name or rtol < 0.0:
            raise click.BadParameter(f"expected FIELD=RTOL with RTOL >= 0, got {item!r}")
        tolerances[name] = rtol
    return tolerances


def _controller(ctx: click.Context, output_dir: Optional[str] = None, plot: bool = False) -> ExperimentController:
    options = ctx.obj or {}
    return ExperimentController(
        output_dir=output_dir or options.get("output_dir"),
        plot=plot or options.get("plot", False),
    )


def experiment_options(command):
    command = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                           help="JSON experiment config; overrides the shorthand options")(command)
    command = click.option("--set", "shape", type=click.Choice(SET_CHOICES), default="ball", show_default=True,
                           help="Closed set F, centred at the origin")(command)
    command = click.option("--radius", type=float, default=1.0, show_default=True)(command)
    command = click.option("--N", "N", type=int, default=1, show_default=True)(command)
    command = click.option("--q", type=float, default=4.0, show_default=True)(command)
    return command


@click.group(cls=ParcapGroup)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None, help="Where reports are written")
@click.option("--plot/--no-plot", default=False, help="Also write SVG line plots")
@click.pass_context
def parcap(ctx: click.Context, output_dir: Optional[str], plot: bool):
    """Capacities, potentials and maximal solutions of u_t - Δu + u^q = 0"""
    ctx.obj = {"output_dir": output_dir, "plot": plot}


@parcap.command()
@experiment_options
@click.option("--h", type=float, default=None, help="Capacity grid spacing")
@click.option("--check", type=click.Choice(["value", "scaling", "duality", "local"]), default=None,
              help="Which capacity check to run; defaults to the value with its bracket")
@click.option("--scaling", is_flag=True, help="Same as --check scaling")
@click.option("--duality", is_flag=True, help="Same as --check duality")
@click.pass_context
@handle_errors
def capacity(ctx, config_path, shape, radius, N, q, h, check, scaling, duality):
    """
    Bessel capacity of a compact set.

    - **--set/--radius**: the set, or **--config** for any tagged set
    - **scaling**: scaling law between the unit ball and the ball of radius 2
    - **duality**: total mass of the capacitary measure over the capacity
    - **local**: capacity relative to B_{r+ρ} over the global one, for ρ/r from 1/4 to 8
    """
    check = check or ("scaling" if scaling else "duality" if duality else "value")
    controller = _controller(ctx)
    if check == "scaling":
        return _finish(*controller.run_scaling(ProblemParams(N, q), h=h))
    config = _experiment(config_path, "capacity", shape, N, q, radius, 0.02, 0.2)
    K = controller.closed_set(config)
    params = ProblemParams(config.N, config.q)
    if check == "duality":
        return _finish(*controller.run_duality(K, params, h=h, name=config.name))
    if check == "local":
        return _finish(*controller.run_local_capacity(K, params, name=f"{config.name}_local"))
    return _finish(*controller.run_capacity(K, params, h=h, name=config.name))


@parcap.command()
@experiment_options
@click.option("--no-refine", is_flag=True, help="Skip the refined rerun")
@click.pass_context
@handle_errors
def potential(ctx, config_path, shape, radius, N, q, no_refine):
    """
    Series and integral capacitary potentials over a probe grid, with their ratio and tail envelope.
    """
    config = _experiment(config_path, "potential", shape, N, q, radius, 0.02, 0.2,
                         refine=False if no_refine else None)
    return _finish(*_controller(ctx, config.output_dir, config.plot).run_potential(config))


@parcap.command()
@click.option("--data", type=click.Choice(["flat", "gaussian", "dirac"]), default="flat", show_default=True)
@click.option("--N", "N", type=int, default=1, show_default=True)
@click.option("--q", "q_values", type=float, multiple=True, default=[2.0], show_default=True,
              help="Repeat to run several exponents")
@click.option("--h", type=float, default=0.01, show_default=True)
@click.option("--dt", type=float, default=None, help="Time step; h²/4 when omitted")
@click.option("--T", "T", type=float, default=1.0, show_default=True)
@click.option("--half-width", type=float, default=8.0, show_default=True)
@click.option("--amplitude", type=float, default=1e8, show_default=True)
@click.option("--width", type=float, default=0.25, show_default=True)
@click.option("--absorption", type=click.Choice(["implicit", "exact_flow"]), default="implicit", show_default=True)
@click.option("--s", type=float, default=0.05, show_default=True, help="Start of the mass identity window")
@click.pass_context
@handle_errors
def solve(ctx, data, N, q_values, h, dt, T, half_width, amplitude, width, absorption, s):
    """
    Cauchy problem with flat, Gaussian or Dirac initial data.

    Flat data is compared with the exact spatially constant solution; other data with the mass identity.
    """
    controller = _controller(ctx)
    results = {}
    passed = True
    for q in q_values:
        payload, ok = controller.run_solve(ProblemParams(N, q), h, T, half_width, data, amplitude, width,
                                           dt=dt, absorption=absorption, s=s, name=f"solve_{data}_q{q:g}")
        results[f"q={q:g}"] = payload
        passed = passed and ok
    return _finish(results, passed)


@parcap.command()
@experiment_options
@click.option("--h", type=float, default=None, help="Solver spacing")
@click.option("--T", "T", type=float, default=0.2, show_default=True)
@click.option("--check", type=click.Choice(["sandwich", "removability", "envelope", "wiener"]), default=None,
              help="Defaults to removability for a point and to the sandwich otherwise")
@click.option("--no-refine", is_flag=True, help="Skip the refined rerun")
@click.option("--assert-threshold", is_flag=True, help="Fail a removability run still above 1e-2 t^(-1/(q-1))")
@click.pass_context
@handle_errors
def sandwich(ctx, config_path, shape, radius, N, q, h, T, check, no_refine, assert_threshold):
    """
    Maximal solution of F against its capacitary potential.

    - **sandwich**: ratio table u_F / W_F and its drift under refinement
    - **removability**: u_F at (0, 0.1) as the support of the data shrinks; the 1e-2 threshold
      is reported, and decides the exit code with **--assert-threshold**
    - **envelope**: σ-moderate envelope of scaled capacitary measures against u_F
    - **wiener**: fitted constant of u_K against the Wiener sum
    """
    check = check or ("removability" if shape == "point" and not config_path else "sandwich")
    if check == "removability":
        config = _experiment(config_path, "removability", shape, N, q, radius, h or 0.005, min(T, 0.1),
                             probe_x=[0.0], probe_t=[min(T, 0.1)])
    else:
        config = _experiment(config_path, check, shape, N, q, radius, h or 0.02, T,
                             refine=False if no_refine or check != "sandwich" else None)
    controller = _controller(ctx, config.output_dir, config.plot)
    runners = {
        "sandwich": controller.run_sandwich,
        "removability": lambda c: controller.run_removability(c, assert_threshold=assert_threshold),
        "envelope": controller.run_envelope,
        "wiener": controller.run_wiener,
    }
    return _finish(*runners[check](config))


@parcap.command()
@click.option("--N", "N", type=int, default=1, show_default=True)
@click.option("--q", type=float, default=2.0, show_default=True)
@click.option("--kind", type=click.Choice([k.value for k in ProfileKind]), default=ProfileKind.RADIAL_VSS.value,
              show_default=True)
@click.option("--bounds", is_flag=True, help="Compare the maximal solution with the profile")
@click.option("--h", type=float, default=0.002, show_default=True, help="Solver spacing for --bounds")
@click.option("--T", "T", type=float, default=0.01, show_default=True, help="Horizon for --bounds")
@click.option("--radius", type=float, default=0.0, show_default=True,
              help="0 compares with a point singularity; r > 0 uses the half-line barrier for [-r, r]")
@click.pass_context
@handle_errors
def profile(ctx, N, q, kind, bounds, h, T, radius):
    """
    Very singular profile by shooting, or the subcritical bounds it gives for maximal solutions.
    """
    controller = _controller(ctx)
    params = ProblemParams(N, q)
    if bounds:
        return _finish(*controller.run_subcritical(params, h, T, radius=radius))
    return _finish(*controller.run_profile(params, ProfileKind(kind)))


@parcap.command()
@click.option("--lemma", default="all", show_default=True,
              type=click.Choice(["kernel", "integral", "series", "spherical", "ell", "slices", "all"]))
@click.option("--sweep", "sweep_version", default="default", show_default=True, help="Sweep version")
@click.pass_context
@handle_errors
def appendix(ctx, lemma, sweep_version):
    """
    Numerical checks of the auxiliary inequalities over a versioned parameter sweep.
    """
    return _finish(*_controller(ctx).run_appendix(lemma, sweep_version))


@parcap.command(name="all")
@click.pass_context
@handle_errors
def run_all(ctx):
    """
    Every check of the toolkit with default settings.
    """
    controller = _controller(ctx)
    runs = {
        "flat_q2": lambda: controller.run_solve(ProblemParams(1, 2.0), 0.01, 1.0, 8.0, "flat", 1e8, 0.25,
                                                absorption="exact_flow", name="solve_flat_q2"),
        "flat_q4": lambda: controller.run_solve(ProblemParams(1, 4.0), 0.01, 1.0, 8.0, "flat", 1e8, 0.25,
                                                absorption="exact_flow", name="solve_flat_q4"),
        "mass": lambda: controller.run_solve(ProblemParams(1, 2.0), 0.01, 0.5, 8.0, "gaussian", 1.0, 0.25,
                                             s=0.05, name="solve_gaussian"),
        "subcritical": lambda: controller.run_subcritical(ProblemParams(1, 2.0), 0.002, 0.01),
        "removability": lambda: controller.run_removability(
            _experiment(None, "removability", "point", 1, 4.0, 1.0, 0.005, 0.1, probe_x=[0.0], probe_t=[0.1])),
        "sandwich": lambda: controller.run_sandwich(_experiment(None, "sandwich", "ball", 1, 4.0, 1.0, 0.02, 0.2)),
        "potential": lambda: controller.run_potential(
            _experiment(None, "potential", "ball", 1, 4.0, 1.0, 0.02, 0.2)),
        "scaling": lambda: controller.run_scaling(ProblemParams(1, 4.0)),
        "duality": lambda: controller.run_duality(controller.closed_set(
            _experiment(None, "duality", "ball", 1, 4.0, 1.0, 0.02, 0.2)), ProblemParams(1, 4.0)),
        "local_capacity": lambda: controller.run_local_capacity(controller.closed_set(
            _experiment(None, "local", "ball", 1, 4.0, 0.5, 0.02, 0.2)), ProblemParams(1, 4.0), name="local_capacity"),
        "appendix": lambda: controller.run_appendix("all"),
        "envelope": lambda: controller.run_envelope(
            _experiment(None, "envelope", "ball", 1, 4.0, 1.0, 0.02, 0.2, refine=False)),
    }
    summary = {}
    for key, run in runs.items():
        logger.info(f"Running {key}")
        _, passed = run()
        summary[key] = passed
    return _finish(summary, all(summary.values()))


@parcap.command()
@click.argument("output", type=click.Path(exists=True, dir_okay=False))
@click.argument("golden", type=click.Path(exists=True, dir_okay=False))
@click.option("--rtol", type=float, default=None, help="Relative tolerance; GOLDEN_RTOL when omitted")
@click.option("--field-rtol", "field_rtol", multiple=True, callback=_parse_field_rtol, metavar="FIELD=RTOL",
              help="Tolerance of one field (repeatable); adds to GOLDEN_FIELD_RTOL")
@click.pass_context
@handle_errors
def golden(ctx, output, golden, rtol, field_rtol):
    """
    Compare a run output (JSON or CSV) with a blessed golden file.

    - **--rtol**: tolerance of every numeric field without its own entry
    - **--field-rtol**: e.g. `--field-rtol W_series=0.1`, matched against the last key of a field path
    """
    return _finish(*_controller(ctx).run_golden(output, golden, rtol or get_settings().GOLDEN_RTOL, field_rtol))
