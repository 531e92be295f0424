import logging
from math import exp, gamma, log, pi, sinh, cosh, sqrt
from typing import Sequence

import numpy as np
from scipy import integrate, special

from src.domain.entities.kernel_eval import KernelEval
from src.domain.exceptions.domain_exceptions import (
    IncompleteHistoryException,
    InvalidParametersException,
    NonpositiveTimeException,
    QuadratureFailedException,
)
from src.domain.ports.input.heat_kernel_port import HeatKernelPort
from src.domain.value_objects.grid_function import GridFunction, unit_sphere_area
from src.domain.value_objects.radon_measure import RadonMeasure


logger = logging.getLogger(__name__)


def _check_time(t: float) -> None:
    if not t > 0:
        raise NonpositiveTimeException(f"Time must be positive, got {t}")


def scaled_spherical_integral(N: int, m: np.ndarray) -> np.ndarray:
    """e^{-m} 𝓘_N(m) through the modified Bessel function I_{N/2-1}"""
    nu = 0.5 * N - 1.0
    m = np.asarray(m, dtype=float)
    prefactor = sqrt(pi) * gamma(nu + 0.5)
    safe = np.where(m > 1e-8, m, 1.0)
    value = prefactor * (2.0 / safe) ** nu * special.ive(nu, safe)
    # small-argument limit of (2/m)^ν I_ν(m) e^{-m}
    small = prefactor * np.exp(-m) / gamma(nu + 1.0)
    return np.where(m > 1e-8, value, small)


class HeatKernelService(HeatKernelPort):
    def __init__(self, kernel: KernelEval):
        self.kernel = kernel

    @property
    def N(self) -> int:
        return self.kernel.params.N

    def heat_kernel(self, x, y, t: float) -> float:
        """(4πt)^{-N/2} exp(-|x-y|^2 / 4t)"""
        _check_time(t)
        diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
        return float((4.0 * pi * t) ** (-0.5 * self.N) * np.exp(-float(diff @ diff) / (4.0 * t)))

    def shell_kernel(self, rho: float, radii: np.ndarray, t: float) -> np.ndarray:
        """Average of H(x, ., t) over the sphere of radius r, for |x| = rho"""
        _check_time(t)
        N = self.N
        radii = np.asarray(radii, dtype=float)
        gauss = (4.0 * pi * t) ** (-0.5 * N) * np.exp(-(rho - radii) ** 2 / (4.0 * t))
        if N == 1:
            # the 0-sphere is {±r}
            return 0.5 * (gauss + (4.0 * pi * t) ** -0.5 * np.exp(-(rho + radii) ** 2 / (4.0 * t)))
        ratio = unit_sphere_area(N - 1) / unit_sphere_area(N)
        return gauss * ratio * scaled_spherical_integral(N, rho * radii / (2.0 * t))

    def density_potential(self, density: GridFunction, x, t: float) -> float:
        """Trapezoid quadrature of ∫ H(x, y, t) η(y) dy"""
        weights = density.weights() * density.values
        if density.radial_dimension is not None:
            rho = float(np.linalg.norm(np.atleast_1d(x)))
            return float(np.sum(weights * self.shell_kernel(rho, density.axes()[0], t)))
        nodes = density.nodes()
        reach2 = -4.0 * t * log(self.kernel.truncation)
        d2 = np.sum((nodes - np.atleast_1d(np.asarray(x, dtype=float))) ** 2, axis=1)
        keep = d2 <= reach2
        gauss = (4.0 * pi * t) ** (-0.5 * self.N) * np.exp(-d2[keep] / (4.0 * t))
        return float(np.sum(weights.ravel()[keep] * gauss))

    def heat_potential(self, mu: RadonMeasure, x, t: float) -> float:
        _check_time(t)
        value = sum(mass * self.heat_kernel(x, loc, t) for loc, mass in mu.atoms)
        if mu.density is not None:
            value += self.density_potential(mu.density, x, t)
        return float(value)

    def green_potential(self, history: Sequence[GridFunction], x, t: float) -> float:
        """𝔾[f](x, t) = ∫_0^t ℍ[f(s)](x, t - s) ds by the trapezoid rule in s"""
        _check_time(t)
        slices = sorted((g for g in history if g.time is not None and g.time <= t + 1e-12),
                        key=lambda g: g.time)
        times = np.array([g.time for g in slices])
        if len(slices) < 2 or times[0] > 1e-12 or abs(times[-1] - t) > 1e-9 * max(1.0, t):
            raise IncompleteHistoryException(
                f"Source history does not cover [0, {t}]",
                {"times": times.tolist()},
            )
        gaps = np.diff(times)
        if np.max(gaps) > (1.0 + 1e-6) * np.min(gaps):
            raise IncompleteHistoryException("Source history has missing slices",
                                             {"largest_gap": float(np.max(gaps)),
                                              "smallest_gap": float(np.min(gaps))})
        values = np.empty(len(slices))
        for i, g in enumerate(slices):
            lag = t - g.time
            values[i] = g.interpolate(x) if lag <= 1e-14 else self.density_potential(g, x, lag)
        return float(integrate.trapezoid(values, times))

    def gaussian_decay_bound(self, M: float, a: float, b: float, x, t: float) -> float:
        """M (4at+1)^{-N/2} exp(-a (|x| - b)_+^2 / (4at+1))"""
        if M <= 0 or a <= 0:
            raise InvalidParametersException("Decay bound needs M > 0 and a > 0", {"M": M, "a": a})
        if b < 0:
            raise InvalidParametersException(f"Decay shift must be nonnegative, got {b}")
        _check_time(t)
        spread = 4.0 * a * t + 1.0
        excess = max(float(np.linalg.norm(np.atleast_1d(x))) - b, 0.0)
        return M * spread ** (-0.5 * self.N) * exp(-a * excess ** 2 / spread)

    def spherical_integral(self, N: int, m: float) -> float:
        """𝓘_N(m) = ∫_0^π exp(m cos θ) sin^{N-2} θ dθ by adaptive quadrature"""
        if not isinstance(N, int) or N < 2:
            raise InvalidParametersException(f"Spherical integrals need an integer N >= 2, got {N}")
        if m < 0:
            raise InvalidParametersException(f"Spherical integrals need m >= 0, got {m}")
        # factor e^m out so large m stays representable
        integrand = lambda theta: exp(m * (np.cos(theta) - 1.0)) * np.sin(theta) ** (N - 2)
        value, error = integrate.quad(integrand, 0.0, pi, epsabs=0.0,
                                      epsrel=self.kernel.rel_tol, limit=400)
        if not np.isfinite(value) or error > 1e6 * self.kernel.rel_tol * max(abs(value), 1e-300):
            raise QuadratureFailedException(f"Spherical integral did not converge for N={N}, m={m}",
                                            {"value": value, "error": error})
        return exp(m) * value

    def spherical_closed_form(self, N: int, m: float) -> float:
        """Elementary or Bessel closed forms for 2 <= N <= 5"""
        if m == 0.0:
            return sqrt(pi) * gamma(0.5 * (N - 1)) / gamma(0.5 * N)
        if N == 2:
            return pi * float(special.iv(0, m))
        if N == 3:
            return 2.0 * sinh(m) / m
        if N == 4:
            return pi * float(special.iv(1, m)) / m
        if N == 5:
            return 4.0 * cosh(m) / m ** 2 - 4.0 * sinh(m) / m ** 3
        raise InvalidParametersException(f"No elementary closed form for N={N}")

    def spherical_recursion(self, N: int, m: float) -> float:
        """((N-3)/m^2)((N-5) 𝓘_{N-4} - (N-4) 𝓘_{N-2}), exact for N >= 6"""
        if N < 6 or m <= 0:
            raise InvalidParametersException("The three-term recursion needs N >= 6 and m > 0")
        lower = self.spherical_integral(N - 4, m)
        middle = self.spherical_integral(N - 2, m)
        return (N - 3) / m ** 2 * ((N - 5) * lower - (N - 4) * middle)

    def spherical_recursion_bound(self, N: int, m: float) -> float:
        """((N-3)(N-5)/m^2)(𝓘_{N-4} - 𝓘_{N-2}); dominates 𝓘_N for N >= 6"""
        if N < 6 or m <= 0:
            raise InvalidParametersException("The recursion bound needs N >= 6 and m > 0")
        return (N - 3) * (N - 5) / m ** 2 * (
            self.spherical_integral(N - 4, m) - self.spherical_integral(N - 2, m)
        )

    def spherical_envelope_ratio(self, N: int, m: float) -> float:
        """𝓘_N(m) (1+m)^{(N-1)/2} e^{-m}"""
        return self.spherical_integral(N, m) * (1.0 + m) ** (0.5 * (N - 1)) * exp(-m)

    def chapman_kolmogorov_residual(self, x: float, y: float, t: float, s: float) -> float:
        """Relative defect of ∫ H(x,z,t) H(z,y,s) dz = H(x,y,t+s) in one dimension"""
        if self.N != 1:
            raise InvalidParametersException("The convolution check runs in one dimension")
        _check_time(t)
        _check_time(s)
        centre = (s * x + t * y) / (t + s)
        width = 40.0 * sqrt(t * s / (t + s))
        value, _ = integrate.quad(
            lambda z: self.heat_kernel(x, z, t) * self.heat_kernel(z, y, s),
            centre - width, centre + width, epsabs=0.0, epsrel=self.kernel.rel_tol, limit=200,
        )
        exact = self.heat_kernel(x, y, t + s)
        return abs(value - exact) / exact
