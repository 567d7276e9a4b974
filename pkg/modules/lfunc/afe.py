# modules/lfunc/afe.py
"""
Smoothed approximate functional equation

With theta(t) = sum a_n phi(n t / sqrt(Q)), phi the inverse Mellin transform
of the gamma factor, splitting the Mellin integral of theta at t = A gives

    Lambda(s) = A^s sum a_n G_s(n A / sqrt(Q))
              + eps A^(s-w-1) sum a*_n G_{w+1-s}(n / (A sqrt(Q)))
              + sum_rho r_rho A^(s-rho) / (s - rho),

G_s(x) = x^-s int_x^inf phi(u) u^(s-1) du. The right side does not depend on
A exactly when the functional equation data are right, which is what the
self-test measures.
"""

import logging
import threading
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath as mp

from modules.errors import CrossCheckFailed, FunctionalEquationInvalid, NotEnoughCoefficients, PoleEncountered
from modules.lfunc.spec import LFunctionSpec, series_length

LOGGER = logging.getLogger(__name__)

GUARD_BITS = 24
SPLIT = mp.mpf(5) / 4
# offsets from the centre of symmetry; none lies on Re(s) = (w + 1) / 2
TEST_OFFSETS = (
    mp.mpc("0.37", "0.21"),
    mp.mpc("0.61", "-0.13"),
    mp.mpc("0.83", "0.41"),
    mp.mpc("1.07", "0.07"),
    mp.mpc("-0.29", "0.53"),
    mp.mpc("0.45", "-0.62"),
)


def _nstr(z, digits: int = 20) -> List[str]:
    z = mp.mpc(z)
    return [mp.nstr(z.real, digits), mp.nstr(z.imag, digits)]


# -- gamma factor -----------------------------------------------------------

def _gamma_one(kind: str, z) -> mp.mpc:
    if kind == "C":
        return 2 * mp.power(2 * mp.pi, -z) * mp.gamma(z)
    return mp.power(mp.pi, -z / 2) * mp.gamma(z / 2)


def gamma_factor(spec: LFunctionSpec, s) -> mp.mpc:
    value = mp.mpc(1)
    for mu in spec.shifts:
        value *= _gamma_one(spec.gamma_kind, s + mu)
    return value


def gamma_log_derivative(spec: LFunctionSpec, s) -> mp.mpc:
    total = mp.mpc(0)
    for mu in spec.shifts:
        z = s + mu
        if spec.gamma_kind == "C":
            total += mp.digamma(z) - mp.log(2 * mp.pi)
        else:
            total += (mp.digamma(z / 2) - mp.log(mp.pi)) / 2
    return total


def _is_gamma_pole(spec: LFunctionSpec, z) -> Optional[int]:
    """m when the factor with argument z sits at its pole -m, else None."""
    arg = z if spec.gamma_kind == "C" else z / 2
    if mp.im(arg) == 0 and mp.re(arg) <= 0 and mp.re(arg) == int(mp.re(arg)):
        return -int(mp.re(arg))
    return None


def gamma_poles(spec: LFunctionSpec, s) -> Tuple[int, mp.mpc]:
    """
    Order of the pole of the gamma factor at s and the leading coefficient
    (the residue for a simple pole).
    """
    order, lead = 0, mp.mpc(1)
    for mu in spec.shifts:
        z = s + mu
        m = _is_gamma_pole(spec, z)
        if m is None:
            lead *= _gamma_one(spec.gamma_kind, z)
            continue
        order += 1
        if spec.gamma_kind == "C":
            lead *= 2 * mp.power(2 * mp.pi, m) * (-1) ** m / mp.factorial(m)
        else:
            lead *= 2 * mp.power(mp.pi, m) * (-1) ** m / mp.factorial(m)
    return order, lead


# -- cutoff functions -------------------------------------------------------

class CutoffIntegrals:
    """
    G_s(x) and d/ds G_s(x) on an increasing grid of x.

    One gamma factor gives the incomplete gamma function in closed form;
    otherwise phi is a Bessel K or Meijer G function and the incomplete
    Mellin integrals are accumulated interval by interval from the right.
    """

    def __init__(self, spec: LFunctionSpec, s):
        self.kind = spec.gamma_kind
        self.shifts = list(spec.shifts)
        self.degree = spec.degree
        self.s = mp.mpmathify(s)

    def phi(self, u):
        mus = self.shifts
        if self.kind == "C":
            if len(mus) == 1:
                return 2 * mp.power(u, mus[0]) * mp.exp(-2 * mp.pi * u)
            if len(mus) == 2:
                return 8 * mp.power(u, mp.mpf(mus[0] + mus[1]) / 2) * mp.besselk(mus[0] - mus[1], 4 * mp.pi * mp.sqrt(u))
            d = len(mus)
            return mp.power(2, d) * mp.power(2 * mp.pi, -sum(mus)) * mp.meijerg([[], []], [mus, []], mp.power(2 * mp.pi, d) * u)
        if len(mus) == 1:
            return 2 * mp.power(u, mus[0]) * mp.exp(-mp.pi * u * u)
        d = len(mus)
        half = [mp.mpf(m) / 2 for m in mus]
        return 2 * mp.power(mp.pi, -mp.mpf(sum(mus)) / 2) * mp.meijerg([[], []], [half, []], mp.power(mp.pi, d) * u * u)

    def _closed(self, x):
        mu = self.shifts[0]
        a = self.s + mu
        if self.kind == "C":
            return mp.power(x, -self.s) * 2 * mp.power(2 * mp.pi, -a) * mp.gammainc(a, 2 * mp.pi * x)
        return mp.power(x, -self.s) * mp.power(mp.pi, -a / 2) * mp.gammainc(a / 2, mp.pi * x * x)

    def _breakpoints(self, x) -> List:
        sigma = mp.re(self.s)
        peak = mp.power(max(sigma - 1, 0) / (2 * mp.pi), mp.mpf(self.degree) / 2)
        pts = sorted({x, x + 1, peak, 2 * peak + 2, 4 * peak + 8})
        return [p for p in pts if p >= x] + [mp.inf]

    def values(self, xs: Sequence, derivative: bool = False) -> Tuple[List[mp.mpc], Optional[List[mp.mpc]]]:
        if len(self.shifts) == 1 and not derivative:
            return [self._closed(x) for x in xs], None
        s = self.s

        def f(u):
            return self.phi(u) * mp.power(u, s - 1)

        def g(u):
            return f(u) * mp.log(u)

        n = len(xs)
        I: List[mp.mpc] = [mp.mpc(0)] * n
        J: List[mp.mpc] = [mp.mpc(0)] * n
        I[-1] = mp.quad(f, self._breakpoints(xs[-1]))
        if derivative:
            J[-1] = mp.quad(g, self._breakpoints(xs[-1]))
        for i in range(n - 2, -1, -1):
            I[i] = I[i + 1] + mp.quad(f, [xs[i], xs[i + 1]], method="gauss-legendre")
            if derivative:
                J[i] = J[i + 1] + mp.quad(g, [xs[i], xs[i + 1]], method="gauss-legendre")
        G = [mp.power(x, -s) * i for x, i in zip(xs, I)]
        if not derivative:
            return G, None
        dG = [mp.power(x, -s) * (j - mp.log(x) * i) for x, i, j in zip(xs, I, J)]
        return G, dG


# -- completed function -----------------------------------------------------

@dataclass
class Pieces:
    """Lambda (or Lambda') = direct + eps * dual + sum_i r_i * poles[i]."""

    direct: mp.mpc
    dual: mp.mpc
    poles: List[mp.mpc]
    tail: mp.mpf

    def combine(self, epsilon, residues: Sequence) -> mp.mpc:
        return self.direct + epsilon * self.dual + sum((r * p for r, p in zip(residues, self.poles)), mp.mpc(0))


def completed_pieces(spec: LFunctionSpec, s, split=1, n_terms: Optional[int] = None, derivative: bool = False) -> Pieces:
    """
    The pieces of Lambda(s) (or Lambda'(s)) for the split point A = `split`,
    at the current mpmath precision.

    Raises:
        NotEnoughCoefficients: fewer coefficients than the cutoff needs
        PoleEncountered: s is a pole of Lambda
    """
    s = mp.mpmathify(s)
    A = mp.mpmathify(split)
    w = spec.weight
    for pole in spec.poles:
        if abs(s - mp.mpc(pole.at)) < mp.mpf(2) ** (8 - mp.mp.prec):
            raise PoleEncountered(f"{spec.name}: Lambda has a pole at s = {mp.nstr(s, 10)}")
    if n_terms is None:
        n_terms = series_length(spec.degree, spec.conductor, w, mp.mp.prec, split)
    a, b = spec.coefficient_vectors(n_terms, mp.mp.prec)
    root_q = mp.sqrt(spec.conductor)
    xs = [n * A / root_q for n in range(1, n_terms + 1)]
    ys = [n / (A * root_q) for n in range(1, n_terms + 1)]
    G, dG = CutoffIntegrals(spec, s).values(xs, derivative)
    H, dH = CutoffIntegrals(spec, w + 1 - s).values(ys, derivative)

    front, back = mp.power(A, s), mp.power(A, s - w - 1)
    log_a = mp.log(A)
    direct = dual = mp.mpc(0)
    for n in range(n_terms):
        if derivative:
            direct += a[n] * (log_a * G[n] + dG[n])
            dual += b[n] * (log_a * H[n] - dH[n])
        else:
            direct += a[n] * G[n]
            dual += b[n] * H[n]
    tail = abs(front * a[-1] * G[-1]) + abs(back * b[-1] * H[-1])
    poles = []
    for pole in spec.poles:
        rho = mp.mpc(pole.at)
        factor = mp.power(A, s - rho)
        if derivative:
            poles.append(factor * (log_a / (s - rho) - 1 / (s - rho) ** 2))
        else:
            poles.append(factor / (s - rho))
    return Pieces(front * direct, back * dual, poles, 10 * n_terms * tail)


# -- functional equation test -----------------------------------------------

@dataclass
class FEReport:
    name: str
    residual: mp.mpf
    epsilon: mp.mpc
    residues: Dict[int, mp.mpc]
    points: List[mp.mpc]
    solved_from: int
    n_terms: int
    per_point: List[mp.mpf] = field(default_factory=list)

    def passed(self, tolerance: float) -> bool:
        return self.residual < tolerance and abs(abs(self.epsilon) - 1) < tolerance

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": mp.nstr(self.residual, 5),
            "epsilon": _nstr(self.epsilon),
            "residues": {str(i): _nstr(r) for i, r in sorted(self.residues.items())},
            "points": [_nstr(p, 6) for p in self.points],
            "solved_from": self.solved_from,
            "n_terms": self.n_terms,
            "per_point": [mp.nstr(r, 5) for r in self.per_point],
        }


def default_test_points(spec: LFunctionSpec) -> List[mp.mpc]:
    centre = mp.mpf(spec.weight + 1) / 2
    return [centre + d for d in TEST_OFFSETS[: max(2, spec.unknowns + 2)]]


def fe_selftest(spec: LFunctionSpec, test_points: Optional[Sequence] = None, precision: int = 128) -> FEReport:
    """
    Compare the splittings A = 1 and A = 5/4 at each test point.

    Unknown quantities (root number, pole residues) are solved from the
    first test points and the remaining points give the residual.

    Args:
        spec: L-function data
        test_points: points off the line Re(s) = (w + 1)/2
        precision: bits

    Returns:
        FEReport (never raises for a bad functional equation)
    """
    points = [mp.mpmathify(p) for p in (test_points or default_test_points(spec))]
    unknown_pole_idx = [i for i, p in enumerate(spec.poles) if p.residue is None]
    m = spec.unknowns
    if len(points) < max(2, m + 1):
        raise ValueError(f"{spec.name}: need at least {max(2, m + 1)} test points, got {len(points)}")

    with mp.workprec(precision + GUARD_BITS):
        n_terms = series_length(spec.degree, spec.conductor, spec.weight, precision, SPLIT)
        rows, rhs, scales = [], [], []
        for s in points:
            p1 = completed_pieces(spec, s, 1, n_terms)
            p2 = completed_pieces(spec, s, SPLIT, n_terms)
            known = p1.direct - p2.direct
            row = []
            if spec.epsilon is None:
                row.append(p1.dual - p2.dual)
            else:
                known += mp.mpmathify(spec.epsilon) * (p1.dual - p2.dual)
            for i, pole in enumerate(spec.poles):
                diff = p1.poles[i] - p2.poles[i]
                if pole.residue is None:
                    row.append(diff)
                else:
                    known += mp.mpmathify(pole.residue) * diff
            rows.append(row)
            rhs.append(-known)
            scales.append(max(abs(p1.direct), abs(p1.dual), mp.mpf(1) * 2 ** (-precision)))

        solution: List[mp.mpc] = []
        if m:
            solution = list(mp.lu_solve(mp.matrix(rows[:m]), mp.matrix(rhs[:m])))
        per_point = []
        for row, r, scale in zip(rows[m:], rhs[m:], scales[m:]):
            lhs = sum((c * x for c, x in zip(row, solution)), mp.mpc(0))
            per_point.append(abs(lhs - r) / scale)

        epsilon = solution[0] if spec.epsilon is None else mp.mpmathify(spec.epsilon)
        offset = 1 if spec.epsilon is None else 0
        residues = {i: solution[offset + j] for j, i in enumerate(unknown_pole_idx)}
        for i, pole in enumerate(spec.poles):
            if pole.residue is not None:
                residues[i] = mp.mpmathify(pole.residue)
        report = FEReport(spec.name, max(per_point), epsilon, residues, points, m, n_terms, per_point)
    LOGGER.info("FE test %s: residual %s, eps = %s", spec.name, mp.nstr(report.residual, 5), mp.nstr(epsilon, 12))
    return report


def conductor_scan(spec: LFunctionSpec, candidates: Sequence[int], precision: int = 96) -> List[Dict[str, Any]]:
    """FE residual for each candidate conductor; a diagnostic, never applied."""
    rows = []
    for q in candidates:
        trial = replace(spec, conductor=int(q))
        try:
            report = fe_selftest(trial, precision=precision)
            rows.append({"conductor": int(q), "residual": mp.nstr(report.residual, 5), "epsilon": _nstr(report.epsilon, 10)})
        except NotEnoughCoefficients as e:
            rows.append({"conductor": int(q), "error": str(e)})
    return rows


# -- values and derivatives -------------------------------------------------

@dataclass
class LValue:
    s: mp.mpc
    value: mp.mpc
    error: mp.mpf
    epsilon: mp.mpc
    fe_residual: mp.mpf
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        out = {
            "s": _nstr(self.s, 15),
            "value": _nstr(self.value, 25),
            "error": mp.nstr(self.error, 5),
            "epsilon": _nstr(self.epsilon, 15),
            "fe_residual": mp.nstr(self.fe_residual, 5),
        }
        out.update(self.details)
        return out


class CompletedLFunction:
    """
    An L-function whose functional equation has passed the self-test.

    The test runs once per instance; the solved root number and residues
    are reused for every later value.
    """

    def __init__(self, spec: LFunctionSpec, precision: int = 128, tolerance: float = 1e-8, test_points: Optional[Sequence] = None):
        self.spec = spec
        self.precision = precision
        self.tolerance = tolerance
        self.test_points = test_points
        self._report: Optional[FEReport] = None
        self._lock = threading.Lock()

    @property
    def report(self) -> FEReport:
        if self._report is None:
            with self._lock:
                if self._report is None:
                    self._report = fe_selftest(self.spec, self.test_points, self.precision)
        return self._report

    def check(self) -> FEReport:
        """
        Raises:
            FunctionalEquationInvalid: residual or |eps| - 1 above tolerance
        """
        report = self.report
        if not report.passed(self.tolerance):
            raise FunctionalEquationInvalid(
                f"{self.spec.name}: FE residual {mp.nstr(report.residual, 5)}, |eps| = {mp.nstr(abs(report.epsilon), 10)}"
            )
        return report

    def _residues(self) -> List[mp.mpc]:
        report = self.report
        return [report.residues[i] for i in range(len(self.spec.poles))]

    def completed(self, s, derivative: bool = False) -> Tuple[mp.mpc, mp.mpf]:
        report = self.check()
        n_terms = series_length(self.spec.degree, self.spec.conductor, self.spec.weight, self.precision)
        pieces = completed_pieces(self.spec, s, 1, n_terms, derivative)
        return pieces.combine(report.epsilon, self._residues()), pieces.tail

    def _value(self, s) -> Tuple[mp.mpc, mp.mpf]:
        lam, tail = self.completed(s)
        order, lead = gamma_poles(self.spec, s)
        if order:
            return mp.mpc(0), tail
        scale = mp.power(self.spec.conductor, s / 2) * gamma_factor(self.spec, s)
        return lam / scale, tail / abs(scale)

    def value(self, s) -> LValue:
        report = self.check()
        with mp.workprec(self.precision + GUARD_BITS):
            s = mp.mpmathify(s)
            value, error = self._value(s)
        with mp.workprec(self.precision):
            return LValue(s, +value, +error + mp.mpf(2) ** (-self.precision) * abs(value), report.epsilon, report.residual)

    def derivative(self, s) -> LValue:
        """
        L'(s) from the differentiated series, cross-checked by a central
        difference of values with step 2^(-precision/3).

        Raises:
            CrossCheckFailed: the two derivatives disagree beyond their bounds
        """
        report = self.check()
        with mp.workprec(self.precision + GUARD_BITS):
            s = mp.mpmathify(s)
            lam, tail = self.completed(s)
            d_lam, d_tail = self.completed(s, derivative=True)
            root_q = mp.power(self.spec.conductor, s / 2)
            order, lead = gamma_poles(self.spec, s)
            if order == 0:
                scale = root_q * gamma_factor(self.spec, s)
                log_d = mp.log(self.spec.conductor) / 2 + gamma_log_derivative(self.spec, s)
                analytic = (d_lam - lam * log_d) / scale
                error = (d_tail + tail * abs(log_d)) / abs(scale)
            elif order == 1:
                # trivial zero: L(s) ~ Lambda(s) (s - s0) / (Q^(s0/2) lead)
                analytic = lam / (root_q * lead)
                error = tail / abs(root_q * lead)
            else:
                analytic, error = mp.mpc(0), tail

            h = mp.power(2, -mp.mpf(self.precision) / 3)
            plus, e_plus = self._value(s + h)
            minus, e_minus = self._value(s - h)
            difference = (plus - minus) / (2 * h)
            rounding = mp.power(2, -self.precision) * (abs(plus) + abs(minus)) / h
            bound = (e_plus + e_minus) / (2 * h) + rounding + error + 64 * h * h * max(1, abs(analytic))
            delta = abs(analytic - difference)
        LOGGER.debug("L'(%s): series %s, difference %s", mp.nstr(s, 8), mp.nstr(analytic, 15), mp.nstr(difference, 15))
        if delta > bound:
            raise CrossCheckFailed(
                f"{self.spec.name}: L'({mp.nstr(s, 10)}) series {mp.nstr(analytic, 15)} vs difference {mp.nstr(difference, 15)}"
            )
        with mp.workprec(self.precision):
            return LValue(
                s, +analytic, +error, report.epsilon, report.residual,
                {"finite_difference": _nstr(difference, 25), "cross_check_delta": mp.nstr(delta, 5), "gamma_pole_order": order},
            )


def l_value(spec: LFunctionSpec, s, precision: int = 128, tolerance: float = 1e-8) -> LValue:
    return CompletedLFunction(spec, precision, tolerance).value(s)


def l_derivative(spec: LFunctionSpec, s, precision: int = 128, tolerance: float = 1e-8) -> LValue:
    return CompletedLFunction(spec, precision, tolerance).derivative(s)
