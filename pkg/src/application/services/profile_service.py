import logging
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from src.domain.entities.profile import Profile, ProfileKind
from src.domain.exceptions.domain_exceptions import NoProfileRegimeException, ShootingFailedException
from src.domain.ports.input.profile_service_port import ProfileServicePort
from src.domain.value_objects.problem_params import ProblemParams


logger = logging.getLogger(__name__)


class ProfileService(ProfileServicePort):
    """Very singular profiles by shooting on f(0).

    The radial ODE f'' + ((N-1)/y + y/2) f' + f/(q-1) - f^q = 0 with f'(0) = 0
    is integrated outward. Below the profile value the trajectory falls into one
    class (crosses zero or decays slowly like y^{-2/(q-1)}), above it into the
    other; the two classes are told apart by the zero crossing.
    """

    def __init__(
        self,
        y_shoot: float = 12.0,
        y_max: float = 30.0,
        rtol: float = 1e-11,
        atol: float = 1e-14,
        bisection_tolerance: float = 1e-13,
        max_bisections: int = 200,
        separation: float = 1e-3,
        n_points: int = 3001,
        max_step: float = np.inf,
    ):
        self.y_shoot = y_shoot
        self.y_max = y_max
        self.rtol = rtol
        self.atol = atol
        self.bisection_tolerance = bisection_tolerance
        self.max_bisections = max_bisections
        self.separation = separation
        self.n_points = n_points
        self.max_step = max_step

    @staticmethod
    def _dimension(params: ProblemParams, kind: ProfileKind) -> int:
        if kind == ProfileKind.HALF_LINE:
            if params.q >= 3.0:
                raise NoProfileRegimeException(f"Half-line profile needs 1 < q < 3, got q={params.q:g}")
            return 1
        if params.supercritical:
            raise NoProfileRegimeException(f"Very singular profile needs 1 < q < q_c ({params})")
        return params.N

    @staticmethod
    def ceiling(q: float) -> float:
        """Constant solution (q-1)^{-1/(q-1)}, i.e. the flat solution in similarity variables"""
        return (q - 1.0) ** (-1.0 / (q - 1.0))

    def _integrate(self, a: float, N: int, q: float, y_end: float,
                   t_eval: Optional[np.ndarray] = None):
        lam = 1.0 / (q - 1.0)
        curvature = (a ** q - lam * a) / N
        y0 = 1e-6
        start = [a + 0.5 * curvature * y0 * y0, curvature * y0]

        def rhs(y, state):
            f, g = state
            return [g, -((N - 1) / y + 0.5 * y) * g - lam * f + max(f, 0.0) ** q]

        def crossing(y, state):
            return state[0]
        crossing.terminal = True
        crossing.direction = -1

        def runaway(y, state):
            return state[0] - 10.0 * self.ceiling(q)
        runaway.terminal = True
        runaway.direction = 1

        if t_eval is not None:
            t_eval = t_eval[(t_eval >= y0) & (t_eval <= y_end)]
        return solve_ivp(rhs, (y0, y_end), start, method="DOP853", rtol=self.rtol, atol=self.atol,
                         events=(crossing, runaway), t_eval=t_eval, max_step=self.max_step)

    def _crosses(self, a: float, N: int, q: float) -> bool:
        sol = self._integrate(a, N, q, self.y_shoot)
        return len(sol.t_events[0]) > 0

    def _bracket(self, N: int, q: float) -> Tuple[float, float, bool]:
        top = self.ceiling(q) * (1.0 - 1e-9)
        bottom = 1e-6 * self.ceiling(q)
        low_crosses = self._crosses(bottom, N, q)
        if low_crosses == self._crosses(top, N, q):
            raise ShootingFailedException(
                "Shooting endpoints fall in the same class",
                {"N": N, "q": q, "bottom": bottom, "top": top, "crosses": low_crosses},
            )
        lo, hi = bottom, top
        for _ in range(self.max_bisections):
            if hi - lo <= self.bisection_tolerance * hi:
                return lo, hi, low_crosses
            mid = 0.5 * (lo + hi)
            if self._crosses(mid, N, q) == low_crosses:
                lo = mid
            else:
                hi = mid
        raise ShootingFailedException(
            f"Bisection on f(0) did not close in {self.max_bisections} steps", {"lo": lo, "hi": hi},
        )

    def very_singular_profile(self, params: ProblemParams, kind: ProfileKind = ProfileKind.RADIAL_VSS) -> Profile:
        N = self._dimension(params, kind)
        q = params.q
        lo, hi, _ = self._bracket(N, q)
        grid = np.linspace(0.0, self.y_shoot, self.n_points)
        below = self._integrate(lo, N, q, self.y_shoot, grid)
        above = self._integrate(hi, N, q, self.y_shoot, grid)
        n = min(below.y.shape[1], above.y.shape[1])
        y = below.t[:n]
        f_lo, f_hi = below.y[0, :n], above.y[0, :n]
        apart = (np.abs(f_lo - f_hi) > self.separation * np.abs(f_hi)) | (f_lo <= 0.0) | (f_hi <= 0.0)
        cut = int(np.argmax(apart)) if apart.any() else n
        if cut < 2:
            raise ShootingFailedException("Bracketing trajectories separate immediately", {"lo": lo, "hi": hi})
        y_sep = float(y[cut - 1])
        f_sep = float(0.5 * (f_lo[cut - 1] + f_hi[cut - 1]))
        f0 = 0.5 * (lo + hi)
        inner_y = np.concatenate([[0.0], y[:cut]])
        inner_f = np.concatenate([[f0], 0.5 * (f_lo[:cut] + f_hi[:cut])])
        step = grid[1] - grid[0]
        outer_y = np.arange(y_sep + step, self.y_max + 0.5 * step, step)
        power = 2.0 * params.time_exponent - N
        outer_f = f_sep * (outer_y / y_sep) ** power * np.exp(-(outer_y ** 2 - y_sep ** 2) / 4.0)
        profile = Profile(
            y=np.concatenate([inner_y, outer_y]),
            f=np.concatenate([inner_f, outer_f]),
            params=params,
            kind=kind,
            f0=f0,
            y_separation=y_sep,
        )
        edge = float(profile.decay_weight()[-1])
        if edge >= 1e-6:
            raise ShootingFailedException(f"Decay weight {edge:.3g} at y={self.y_max} is not below 1e-6")
        logger.info(f"{kind.value} profile for {params}: f(0)={f0:.12g}, trajectories separate at y={y_sep:.3g}")
        return profile

    @staticmethod
    def tail_shape(profile: Profile, y_from: float, y_to: float) -> np.ndarray:
        """log f(y) + y²/4 - (2/(q-1) - N) log y over [y_from, y_to]; flat for the fast-decay tail"""
        mask = (profile.y >= y_from) & (profile.y <= y_to) & (profile.f > 0.0)
        y = profile.y[mask]
        power = 2.0 * profile.params.time_exponent - profile.dimension
        return np.log(profile.f[mask]) + y * y / 4.0 - power * np.log(y)
