# modules/quadrature/integrate.py
"""
Adaptive integration over Gamma_0(N)\\H.

The quotient is the union of g_i F over the coset representatives g_i, with
F the standard domain. Each translate is pulled back to F, where the
integral splits into an arc region (|x| <= 1/2, sqrt(1 - x^2) <= y <= 3/2)
and a cusp region (3/2 <= y <= Y, in u = log y). Both are covered by
tensor Gauss-Legendre panels, refined four-way on the largest error.
Above Y the integrand is assumed to decay like exp(-2 pi h y / width) for
the caller's decay_hint h; that tail is bounded and added to the error.
"""

import heapq
import itertools
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from sympy.core.intfunc import igcdex

from modules.errors import ConfigError, InvarianceCheckFailed, TruncationDominates
from modules.quadrature.cosets import FundamentalDomainSpec, Matrix
from modules.quadrature.kernels import apply

LOGGER = logging.getLogger(__name__)

Y_MID = 1.5
MEASURES = ("euclidean", "hyperbolic")
INVARIANCE_TOLERANCE = 1e-6
TAIL_SAMPLES = 32


@lru_cache(maxsize=None)
def _rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1) / 2, w / 2


@dataclass
class Panel:
    region: str
    x0: float
    x1: float
    v0: float
    v1: float
    value: Optional[np.ndarray] = None
    error: float = 0.0
    magnitude: float = 0.0

    def split(self) -> List["Panel"]:
        xm, vm = (self.x0 + self.x1) / 2, (self.v0 + self.v1) / 2
        return [
            Panel(self.region, xa, xb, va, vb)
            for xa, xb in ((self.x0, xm), (xm, self.x1))
            for va, vb in ((self.v0, vm), (vm, self.v1))
        ]


@dataclass
class IntegrationResult:
    value: complex
    error: float
    per_coset: List[complex]
    truncation: float
    tail: float
    panels: int
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": [self.value.real, self.value.imag],
            "error": self.error,
            "per_coset": [[c.real, c.imag] for c in self.per_coset],
            "truncation": self.truncation,
            "tail": self.tail,
            "panels": self.panels,
            **self.details,
        }


class ModularIntegrator:
    """
    One integration job: an integrand, the domain and the measure.

    The integrand maps an array of tau to an array of values. If it also has
    ``pullback(gamma, tau)`` returning its values at gamma tau, that is used
    for the coset translates instead of evaluating at gamma tau directly.

    Used as a context manager it evaluates panels on a thread pool of
    domain.workers threads; the refinement heap stays on the calling thread
    and panel results are summed in a fixed order, so the result does not
    depend on the worker count.
    """

    def __init__(
        self,
        integrand: Callable[[np.ndarray], np.ndarray],
        domain: FundamentalDomainSpec,
        measure: str = "euclidean",
    ):
        if measure not in MEASURES:
            raise ConfigError(f"measure must be one of {MEASURES}, got {measure!r}")
        self.integrand = integrand
        self.domain = domain
        self.measure = measure
        self.evaluations = 0
        self._lock = threading.Lock()
        self._pool: Optional[ThreadPoolExecutor] = None

    def __enter__(self) -> "ModularIntegrator":
        if self.domain.workers > 1:
            self.warm()
            self._pool = ThreadPoolExecutor(max_workers=self.domain.workers, thread_name_prefix="panels")
            LOGGER.debug("panel pool with %d workers", self.domain.workers)
        return self

    def __exit__(self, *exc) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def warm(self) -> None:
        """Build the per-coset pulled-back kernels before threads share them."""
        pullback = getattr(self.integrand, "pullback", None)
        if pullback is None:
            return
        tau = np.array([2j])
        for coset in self.domain.cosets:
            pullback(coset.matrix, tau)

    # -- evaluation -------------------------------------------------------

    def values(self, tau: np.ndarray) -> np.ndarray:
        """Pulled-back integrand times the measure density, shape (cosets, nodes)."""
        out = np.empty((len(self.domain.cosets), tau.size), dtype=np.complex128)
        pullback = getattr(self.integrand, "pullback", None)
        for i, coset in enumerate(self.domain.cosets):
            g = coset.matrix
            if pullback is not None:
                h = pullback(g, tau)
            else:
                h = self.integrand(apply(g, tau))
            h = np.broadcast_to(np.asarray(h, dtype=np.complex128), tau.shape)
            if self.measure == "euclidean":
                c, d = g[1]
                out[i] = h * np.abs(c * tau + d) ** -4
            else:
                out[i] = h / tau.imag ** 2
        with self._lock:
            self.evaluations += out.size
        return out

    def _map(self, region: str, x: np.ndarray, v: np.ndarray, height: float):
        """Parameter square -> (tau, Jacobian) for one region."""
        if region == "arc":
            floor = np.sqrt(1 - x ** 2)
            span = Y_MID - floor
            y = floor + v * span
            return x + 1j * y, span
        lo, hi = np.log(Y_MID), np.log(height)
        y = np.exp(lo + v * (hi - lo))
        return x + 1j * y, (hi - lo) * y

    def _panel_sum(self, panel: Panel, order: int, height: float) -> Tuple[np.ndarray, float]:
        nodes, weights = _rule(order)
        xs = panel.x0 + (panel.x1 - panel.x0) * nodes
        vs = panel.v0 + (panel.v1 - panel.v0) * nodes
        X, V = np.meshgrid(xs, vs, indexing="ij")
        W = np.outer(weights, weights) * (panel.x1 - panel.x0) * (panel.v1 - panel.v0)
        tau, jac = self._map(panel.region, X.ravel(), V.ravel(), height)
        vals = self.values(tau) * (W.ravel() * jac)[None, :]
        return vals.sum(axis=1), float(np.abs(vals).sum())

    def _evaluate(self, panel: Panel, height: float) -> Panel:
        order = self.domain.order
        high, magnitude = self._panel_sum(panel, order, height)
        low, _ = self._panel_sum(panel, order - 4, height)
        panel.value = high
        panel.error = float(np.abs(high - low).sum())
        panel.magnitude = magnitude
        return panel

    def _evaluate_all(self, panels: List[Panel], height: float) -> List[Panel]:
        if self._pool is None:
            return [self._evaluate(p, height) for p in panels]
        return list(self._pool.map(lambda p: self._evaluate(p, height), panels))

    # -- adaptive refinement ----------------------------------------------

    def region(self, region: str, height: float) -> Tuple[np.ndarray, float, float, int]:
        """Integrate one region; returns (per-coset values, error, magnitude, panels)."""
        n0 = self.domain.initial_panels
        edges = np.linspace(-0.5, 0.5, n0 + 1)
        counter = itertools.count()
        heap = []
        initial = [Panel(region, float(x0), float(x1), 0.0, 1.0) for x0, x1 in zip(edges[:-1], edges[1:])]
        for p in self._evaluate_all(initial, height):
            heapq.heappush(heap, (-p.error, next(counter), p))
        while len(heap) < self.domain.max_panels:
            error = sum(p.error for _, _, p in heap)
            magnitude = sum(p.magnitude for _, _, p in heap)
            if error <= self.domain.tolerance * magnitude:
                break
            _, _, worst = heapq.heappop(heap)
            for c in self._evaluate_all(worst.split(), height):
                heapq.heappush(heap, (-c.error, next(counter), c))
        else:
            LOGGER.warning("%s region: panel budget %d exhausted", region, self.domain.max_panels)
        # fixed summation order for reproducible reports
        panels = sorted((p for _, _, p in heap), key=lambda p: (p.x0, p.v0))
        value = np.sum([p.value for p in panels], axis=0)
        error = sum(p.error for p in panels)
        magnitude = sum(p.magnitude for p in panels)
        return value, error, magnitude, len(panels)

    def tail(self, height: float, decay_hint: float) -> np.ndarray:
        """Per-coset bound on the part above Im = height, assuming exp(-2 pi h y / width) decay."""
        x = (np.arange(TAIL_SAMPLES) + 0.5) / TAIL_SAMPLES - 0.5
        vals = np.abs(self.values(x + 1j * height)).mean(axis=1)
        widths = np.array([c.width for c in self.domain.cosets], dtype=float)
        return vals * widths / (2 * np.pi * decay_hint)

    # -- invariance -------------------------------------------------------

    def spot_check(self, samples: int = 3, seed: int = 20240) -> float:
        """
        Largest relative violation of h(g tau) |j(g, tau)|^-4 = h(tau) (or
        h(g tau) = h(tau) for the hyperbolic measure) at random g in Gamma_0(N).
        """
        rng = np.random.default_rng(seed)
        n = self.domain.level
        worst = 0.0
        for g in random_gamma0(n, samples, rng):
            tau = rng.uniform(-0.4, 0.4, 2) + 1j * rng.uniform(1.0, 1.4, 2)
            moved = np.asarray(self.integrand(apply(g, tau)), dtype=np.complex128)
            here = np.asarray(self.integrand(tau), dtype=np.complex128)
            if self.measure == "euclidean":
                c, d = g[1]
                moved = moved * np.abs(c * tau + d) ** -4
            scale = np.maximum(np.abs(moved), np.abs(here)) + 1e-300
            worst = max(worst, float(np.max(np.abs(moved - here) / scale)))
        return worst


def random_gamma0(n: int, count: int, rng: np.random.Generator) -> List[Matrix]:
    """Elements of Gamma_0(N) with small nonzero lower-left entry."""
    out = []
    while len(out) < count:
        c = n * int(rng.choice([-1, 1]))
        d = int(rng.integers(-5, 6))
        if d == 0 or gcd(c, d) != 1:
            continue
        x, y, _ = igcdex(d, c)
        out.append(((int(x), int(-y)), (c, d)))
    return out


def integrate_modular(
    integrand: Callable[[np.ndarray], np.ndarray],
    domain: FundamentalDomainSpec,
    decay_hint: Optional[float] = 1.0,
    measure: str = "euclidean",
    check_invariance: bool = True,
) -> IntegrationResult:
    """
    Integral of a Gamma_0(N)-invariant integrand over Gamma_0(N)\\H.

    Args:
        integrand: vectorised tau -> value; with measure "euclidean" the
            product integrand * dx dy must be invariant, with "hyperbolic"
            the integrand itself
        domain: cosets, truncation and refinement controls
        decay_hint: h with |integrand| ~ exp(-2 pi h y) at every cusp of
            width 1; None integrates the truncated domain only
        measure: "euclidean" for dx dy, "hyperbolic" for dx dy / y^2
        check_invariance: evaluate the spot check before integrating

    Returns:
        IntegrationResult with the tail bound included in the error

    Raises:
        InvarianceCheckFailed: the spot check exceeds 1e-6 relative
        TruncationDominates: the tail bound stays above tolerance up to max_height
    """
    job = ModularIntegrator(integrand, domain, measure)
    details: Dict[str, Any] = {"measure": measure, "cosets": len(domain.cosets)}
    if check_invariance:
        violation = job.spot_check()
        details["invariance_violation"] = violation
        if violation > INVARIANCE_TOLERANCE:
            raise InvarianceCheckFailed(f"integrand moves by {violation:.3g} under Gamma_0({domain.level})")

    with job:
        arc, arc_err, arc_mag, arc_panels = job.region("arc", domain.truncation)
        height = domain.truncation
        while True:
            cusp, cusp_err, cusp_mag, cusp_panels = job.region("cusp", height)
            value = arc + cusp
            error = arc_err + cusp_err
            magnitude = arc_mag + cusp_mag
            if decay_hint is None:
                tail = np.zeros(len(domain.cosets))
                break
            tail = job.tail(height, decay_hint)
            if tail.sum() <= max(domain.tolerance * magnitude, error):
                break
            if height * 1.5 > domain.max_height:
                raise TruncationDominates(
                    f"tail bound {tail.sum():.3g} above tolerance at Y = {height:g} (integral magnitude {magnitude:.3g})"
                )
            LOGGER.info("raising truncation height %.3g -> %.3g (tail %.3g)", height, height * 1.5, tail.sum())
            height *= 1.5

    total = complex(value.sum())
    details["evaluations"] = job.evaluations
    LOGGER.debug(
        "Gamma_0(%d) integral %s +- %.3g over %d panels, Y = %g",
        domain.level, total, error + tail.sum(), arc_panels + cusp_panels, height,
    )
    return IntegrationResult(
        value=total,
        error=float(error + tail.sum()),
        per_coset=[complex(v) for v in value],
        truncation=height,
        tail=float(tail.sum()),
        panels=arc_panels + cusp_panels,
        details=details,
    )
