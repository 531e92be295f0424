import logging
from math import ceil, exp, log, sqrt
from typing import List, Sequence, Tuple

import numpy as np
from scipy import special

from src.domain.entities.blowup_verdict import BlowupKind, BlowupVerdict
from src.domain.entities.probe_table import ProbeTable
from src.domain.entities.slicing import SliceEntry, Slicing
from src.domain.exceptions.domain_exceptions import (
    InvalidParametersException,
    NonpositiveTimeException,
    UnboundedSetException,
)
from src.domain.ports.input.potential_service_port import PotentialServicePort
from src.domain.ports.output.capacity_backend_port import CapacityBackendPort
from src.domain.value_objects.closed_set import ClosedSetSpec, as_points
from src.domain.value_objects.problem_params import ProblemParams


logger = logging.getLogger(__name__)

EQUIVALENCE_COLUMNS = ["x", "t", "W_series", "W_integral", "ratio", "tail_term", "tail_bound"]


def _panel_rule(breaks: Sequence[float], n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints"""
    panels = [(a, b) for a, b in zip(breaks[:-1], breaks[1:]) if b > a]
    if not panels:
        return np.array([]), np.array([])
    per_panel = max(4, n_nodes // len(panels))
    ref_nodes, ref_weights = special.roots_legendre(per_panel)
    nodes, weights = [], []
    for a, b in panels:
        half = 0.5 * (b - a)
        nodes.append(a + half * (ref_nodes + 1.0))
        weights.append(half * ref_weights)
    return np.concatenate(nodes), np.concatenate(weights)


class PotentialService(PotentialServicePort):
    def __init__(
        self,
        capacity_backend: CapacityBackendPort,
        integral_nodes: int = 64,
        tail_tolerance: float = 1e-4,
        classifier_spread: float = 0.05,
        classifier_window: int = 3,
        truncation: float = 1e-16,
    ):
        self.capacity_backend = capacity_backend
        self.integral_nodes = integral_nodes
        self.tail_tolerance = tail_tolerance
        self.classifier_spread = classifier_spread
        self.classifier_window = classifier_window
        self.truncation = truncation

    @staticmethod
    def _check(F: ClosedSetSpec, t: float) -> None:
        if not t > 0:
            raise NonpositiveTimeException(f"Potentials need t > 0, got {t}")
        if not F.is_bounded:
            raise UnboundedSetException("Potentials are defined for bounded sets", {"variant": F.variant})

    @staticmethod
    def _check_regime(params: ProblemParams) -> None:
        if not params.supercritical:
            raise InvalidParametersException(f"Capacitary potentials need q >= q_c ({params})")

    def slice(self, F: ClosedSetSpec, x, t: float) -> Slicing:
        """Shells √(nt) <= |x - y| <= √((n+1)t) for n = 0..a_t"""
        self._check(F, t)
        centre = as_points(x, F.dim)[0]
        if F.is_empty:
            return Slicing.create(centre, t, [], -1)
        D = F.diameter_from(centre)
        a_t = max(int(ceil(D * D / t)) - 1, 0)
        while sqrt((a_t + 1) * t) < D:
            a_t += 1
        while a_t > 0 and sqrt(a_t * t) >= D:
            a_t -= 1
        slices = [
            SliceEntry(n, F.shell_section(centre, sqrt(n * t), sqrt((n + 1) * t)), sqrt((n + 1) * t))
            for n in range(a_t + 1)
        ]
        return Slicing.create(centre, t, slices, a_t)

    def series_terms(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> List[Tuple[int, float]]:
        """(n, weight_n · C((F_n - x)/d_{n+1})) for the terms kept after tail truncation"""
        self._check_regime(params)
        slicing = self.slice(F, x, t)
        if not slicing.nonempty:
            return []
        n_max = slicing.a_t
        n = np.arange(n_max + 1)
        weights = (n + 1.0) ** (0.5 * params.N - params.time_exponent) * np.exp(-n / 4.0)
        tails = np.cumsum(weights[::-1])[::-1]
        ceiling = self.capacity_backend.unit_ball_capacity(params)
        pieces = dict(slicing.rescaled_pieces())
        terms: List[Tuple[int, float]] = []
        total = 0.0
        for k in range(n_max + 1):
            if total > 0.0 and ceiling * tails[k] <= self.tail_tolerance * total:
                logger.debug(f"Series truncated at n={k} of {n_max}")
                break
            if k not in pieces:
                continue
            term = weights[k] * self.capacity_backend.capacity(pieces[k], params).value
            terms.append((k, term))
            total += term
        return terms

    def w_series(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """t^{-1/(q-1)} Σ_n (n+1)^{N/2 - 1/(q-1)} e^{-n/4} C(F_n / √((n+1)t))"""
        terms = self.series_terms(F, x, t, params)
        return t ** (-params.time_exponent) * sum(term for _, term in terms)

    def scaled_capacity(self, F: ClosedSetSpec, x, s: float, params: ProblemParams) -> float:
        """g(s) = C(((F - x)/s) ∩ B̄_1)"""
        centre = as_points(x, F.dim)[0]
        piece = F.intersect_ball(centre, s)
        if piece.is_empty:
            return 0.0
        return self.capacity_backend.capacity(piece.translate(-centre).scale(1.0 / s), params).value

    def _integral(self, F: ClosedSetSpec, x, t: float, params: ProblemParams, lower: float = 0.0) -> float:
        centre = as_points(x, F.dim)[0]
        D = F.diameter_from(centre)
        start = max(float(F.distance(centre)[0]), lower)
        stop = min(D, sqrt(-4.0 * t * log(self.truncation)))
        if F.is_empty or stop <= start:
            return 0.0
        breaks = {start, stop}
        breaks.update(r for r in F.critical_radii(centre) if start < r < stop)
        if stop * stop / t <= self.integral_nodes:
            breaks.update(sqrt(n * t) for n in range(1, int(stop * stop / t) + 1) if start < sqrt(n * t) < stop)
        nodes, weights = _panel_rule(sorted(breaks), self.integral_nodes)
        exponent = params.scaling_exponent + 1.0
        values = np.array([
            s ** exponent * exp(-s * s / (4.0 * t)) * self.scaled_capacity(F, centre, s, params)
            for s in nodes
        ])
        return t ** (-1.0 - 0.5 * params.N) * float(np.sum(weights * values))

    def w_integral(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """t^{-1-N/2} ∫_0^{D_F(x)} s^{N-2/(q-1)} e^{-s²/4t} C(((F - x)/s) ∩ B̄_1) s ds"""
        self._check(F, t)
        self._check_regime(params)
        return self._integral(F, x, t, params)

    def tail_term(self, F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """Part of the integral potential beyond s = √(t a_t)"""
        slicing = self.slice(F, x, t)
        if slicing.a_t < 0:
            return 0.0
        return self._integral(F, x, t, params, lower=sqrt(t * slicing.a_t))

    @staticmethod
    def tail_envelope(F: ClosedSetSpec, x, t: float, params: ProblemParams) -> float:
        """t^{(q-3)/(2(q-1))} e^{-D²/4t} / D"""
        D = F.diameter_from(as_points(x, F.dim)[0])
        if D <= 0.0:
            return 0.0
        q = params.q
        return t ** ((q - 3.0) / (2.0 * (q - 1.0))) * exp(-D * D / (4.0 * t)) / D

    def equivalence_report(self, F: ClosedSetSpec, probes: Sequence[Tuple[Sequence[float], float]],
                           params: ProblemParams) -> ProbeTable:
        table = ProbeTable(name="equivalence", columns=list(EQUIVALENCE_COLUMNS))
        ratios, constants = [], []
        for x, t in probes:
            series = self.w_series(F, x, t, params)
            integral = self.w_integral(F, x, t, params)
            tail = self.tail_term(F, x, t, params)
            envelope = self.tail_envelope(F, x, t, params)
            ratio = integral / series if series > 0.0 else None
            if ratio is not None:
                ratios.append(ratio)
                if not (0.0 < ratio < np.inf):
                    table.fail(f"ratio {ratio} at x={x}, t={t} is not in (0, inf)")
            elif integral > 0.0:
                table.fail(f"series vanishes but integral is {integral:.3g} at x={x}, t={t}")
            if envelope > 0.0:
                constants.append(tail / envelope)
            table.add_row(x=list(np.atleast_1d(x)), t=t, W_series=series, W_integral=integral,
                          ratio=ratio, tail_term=tail, tail_bound=envelope)
            logger.debug(f"x={x}, t={t}: W_series={series:.6g}, W_integral={integral:.6g}")
        if ratios:
            table.summary.update(min_ratio=min(ratios), max_ratio=max(ratios),
                                 spread=max(ratios) / min(ratios))
        table.summary["tail_constant"] = max(constants) if constants else 0.0
        logger.info(f"Equivalence report over {len(probes)} probes: {table.summary}")
        return table

    def blowup_classifier(self, F: ClosedSetSpec, x, params: ProblemParams,
                          taus: List[float]) -> BlowupVerdict:
        """Classify x by the behaviour of g(τ) = C(((F - x)/τ) ∩ B̄_1) as τ decreases"""
        self._check_regime(params)
        window = self.classifier_window
        if len(taus) < window or any(b >= a for a, b in zip(taus, taus[1:])):
            raise InvalidParametersException(f"Need at least {window} strictly decreasing scales")
        values = [self.scaled_capacity(F, x, tau, params) for tau in taus]
        tail = np.asarray(values[-window:])
        if tail.max() > 0.0 and (tail.max() - tail.min()) / tail.max() < self.classifier_spread:
            return BlowupVerdict(BlowupKind.STRONG_BLOWUP, float(tail.mean()), list(taus), values)
        scaled = np.asarray(taus[-window:]) ** (-2.0 / (params.q - 1.0)) * tail
        if np.all(scaled[1:] <= scaled[:-1] * (1.0 + self.classifier_spread)):
            return BlowupVerdict(BlowupKind.BOUNDED, None, list(taus), values)
        return BlowupVerdict(BlowupKind.INCONCLUSIVE, None, list(taus), values)
