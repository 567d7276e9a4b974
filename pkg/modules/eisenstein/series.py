# modules/eisenstein/series.py
"""
Eisenstein series built from twisted lattice sums.

  lattice_sum     E^{a,b}_beta(tau, h) = sum_v beta(v) L(a, b; tau; 0, (h v)/N)
  series_E        E^(w)_alpha(tau, s), shift alpha in the second coordinate
  series_F        F^(w)_alpha(tau, s), twist e(alpha m)
  series_ENw      E_{w,N}(tau, s, omega)
  gamma_E_limit   lim_{s -> t} Gamma(s + w) E_{w,N}(tau, s, omega)
  bridge_check    the divisor sum for beta_chi against gamma_E_limit

At integer points with a, b >= 1 the series are lattice sums; at s <= -w the
functional equation E^(w)_alpha(tau, s) = F^(w)_alpha(tau, 1 - w - s) moves
the evaluation back into that range.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, gcd
from typing import Any, Dict, Optional

import mpmath as mp
import numpy as np

from modules.arith.characters import DirichletCharacter
from modules.eisenstein.divisor import Divisor, EisensteinPoint, beta_chi, mat_vec
from modules.eisenstein.lattice import GUARD_BITS, LatticeResult, TwistedLattice, box_norm_constant
from modules.errors import NotAbsolutelyConvergent, PoleEncountered, UnsupportedContinuationPoint

LOGGER = logging.getLogger(__name__)

METHODS = ("auto", "continued", "direct", "box")


@dataclass
class EvalResult:
    value: mp.mpc
    error: mp.mpf
    branch: str
    precision: int
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": [mp.nstr(self.value.real, 30), mp.nstr(self.value.imag, 30)],
            "error": mp.nstr(self.error, 5),
            "branch": self.branch,
            "precision": self.precision,
            **self.details,
        }


def _integer(s) -> Optional[int]:
    """s as an int when it is a real integer, else None."""
    if isinstance(s, int):
        return s
    z = mp.mpc(s)
    if z.imag == 0 and z.real == mp.nint(z.real):
        return int(mp.nint(z.real))
    return None


def _evaluate(lat: TwistedLattice, method: str, precision: int) -> LatticeResult:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if method == "box":
        return lat.box()
    if method == "direct":
        return lat.direct(precision)
    return lat.continued(precision)


def lattice_sum(a: int, b: int, beta: Divisor, pt: EisensteinPoint, precision: int = 128, method: str = "direct") -> EvalResult:
    """
    E^{a,b}_beta(tau, h) = sum'_{(c,d)} sum_v beta(h^-1 v) e((c v1 + d v2)/N) (c tau + d)^-a (c conj(tau) + d)^-b

    Args:
        a, b: exponents, a + b >= 3
        beta: degree-zero divisor of modulus N
        pt: (tau, h) with h in GL_2(Z/N)
        precision: working precision in bits
        method: "direct" (polygamma rows, the default) or "continued"

    Returns:
        EvalResult with the summed truncation bounds
    """
    if a < 1 or b < 1 or a + b < 3:
        raise NotAbsolutelyConvergent(f"(a, b) = ({a}, {b}) is outside the absolutely convergent range")
    if beta.modulus != pt.modulus:
        raise ValueError(f"divisor modulus {beta.modulus} differs from point modulus {pt.modulus}")
    n = beta.modulus
    values = beta.complex_values(precision + GUARD_BITS)
    total, error, terms = mp.mpc(0), mp.mpf(0), 0
    with mp.workprec(precision + GUARD_BITS):
        for w, coeff in sorted(values.items()):
            v = mat_vec(pt.h, w, n)
            lat = TwistedLattice(a, b, pt.tau, rho=(Fraction(v[0], n), Fraction(v[1], n)))
            part = _evaluate(lat, method, precision)
            total += coeff * part.value
            error += abs(coeff) * part.error
            terms += part.terms
    with mp.workprec(precision):
        return EvalResult(+total, +error, f"lattice/{method}", precision, {"terms": terms})


def _normalization(w: int, s, y) -> mp.mpc:
    """(-2 pi i)^-w pi^-s Gamma(s + w) Im(tau)^s."""
    return mp.power(-2j * mp.pi, -w) * mp.power(mp.pi, -s) * mp.gamma(s + w) * mp.power(y, s)


def _series(kind: str, w: int, alpha, tau, s, precision: int, method: str) -> EvalResult:
    alpha = Fraction(alpha)
    if kind == "E":
        sigma, rho = (0, alpha), (0, 0)
        other = "F"
    else:
        sigma, rho = (0, 0), (alpha, 0)
        other = "E"
    k = _integer(s)
    y = mp.im(tau)

    if k is not None and k >= 1:
        if w + 2 * k == 2:
            # w = 0, s = 1: the constant term carries zeta(2s - 1)
            if kind == "E" or alpha % 1 == 0:
                raise PoleEncountered(f"{kind}^(0)_{alpha} has a pole at s = 1")
        lat = TwistedLattice(w + k, k, tau, sigma, rho)
        chosen = "continued" if method == "auto" else method
        with mp.workprec(precision + GUARD_BITS):
            part = _evaluate(lat, chosen, precision)
            norm = _normalization(w, k, y)
            value, error = norm * part.value, abs(norm) * part.error
        with mp.workprec(precision):
            return EvalResult(+value, +error, f"{kind}/{part.method}", precision, {"terms": part.terms})

    if k is not None and k <= -w:
        mirrored = _series(other, w, alpha, tau, 1 - w - k, precision, method)
        mirrored.branch = f"{kind}=functional-equation({mirrored.branch})"
        return mirrored

    z = mp.mpc(s)
    if w + 2 * z.real > 2 and method in ("auto", "box"):
        lat = TwistedLattice(w, 0, tau, sigma, rho)
        part = lat.box(s=complex(z), w=w)
        norm = _normalization(w, z, y)
        return EvalResult(norm * part.value, abs(norm) * part.error, f"{kind}/box", 53, {"terms": part.terms})

    raise UnsupportedContinuationPoint(f"{kind}^({w})_{alpha} at s = {s}")


def series_E(w: int, alpha, tau, s, precision: int = 128, method: str = "auto") -> EvalResult:
    """E^(w)_alpha(tau, s) = (-2 pi i)^-w pi^-s Gamma(s+w) sum' Im(tau)^s / ((m tau + n + alpha)^w |m tau + n + alpha|^2s)."""
    return _series("E", w, alpha, tau, s, precision, method)


def series_F(w: int, alpha, tau, s, precision: int = 128, method: str = "auto") -> EvalResult:
    """F^(w)_alpha(tau, s): as series_E with the shift replaced by the twist e(alpha m)."""
    return _series("F", w, alpha, tau, s, precision, method)


def _units(n: int):
    return [u for u in range(n) if gcd(u, n) == 1]


def _box_ENw(w: int, n: int, tau, s, omega: DirichletCharacter, radius: int = 200) -> EvalResult:
    """Plain double-precision box sum of omega(n) (N m tau + n)^-w |N m tau + n|^-2s."""
    s = complex(s)
    sigma_r = w + 2 * s.real
    if sigma_r <= 2:
        raise NotAbsolutelyConvergent(f"w + 2 Re(s) = {sigma_r} <= 2")
    tau = complex(tau)
    m = np.arange(-radius, radius + 1)
    table = np.array([complex(omega.value(r % n, 53)) for r in range(n)])
    weights = table[m % n]
    Z = n * m[:, None] * tau + m[None, :]
    mask = np.abs(Z) > 0
    Zs = np.where(mask, Z, 1.0)
    terms = np.where(mask, weights[None, :] * Zs ** (-w) * np.abs(Zs) ** (-2 * s), 0.0)
    kappa = box_norm_constant(n * tau)
    error = 8 * kappa ** (-sigma_r) * (radius - 1) ** (2 - sigma_r) / (sigma_r - 2)
    return EvalResult(mp.mpc(complex(terms.sum())), mp.mpf(error), "ENw/box", 53, {"radius": radius})


def series_ENw(w: int, n: int, tau, s, omega: DirichletCharacter, precision: int = 128, method: str = "auto") -> EvalResult:
    """
    E_{w,N}(tau, s, omega) = sum' omega(n) / ((N m tau + n)^w |N m tau + n|^2s).

    "box" sums the double series directly; otherwise
    E_{w,N} = N^(-w-2s) sum_alpha omega(alpha) L(w + s, s; tau; (0, alpha/N), 0).
    """
    if omega.modulus != n:
        omega = omega.induce(n)
    if method == "box":
        return _box_ENw(w, n, tau, s, omega)
    k = _integer(s)
    if k is None or k < 1:
        if method == "auto" and w + 2 * mp.re(s) > 2:
            return _box_ENw(w, n, tau, s, omega)
        raise UnsupportedContinuationPoint(f"E_({w},{n}) at s = {s}; use gamma_E_limit at s <= -w")
    if w + 2 * k == 2:
        raise PoleEncountered(f"E_(0,{n}) has a pole at s = 1")
    chosen = "continued" if method == "auto" else method
    total, error, terms = mp.mpc(0), mp.mpf(0), 0
    with mp.workprec(precision + GUARD_BITS):
        for alpha in _units(n):
            weight = omega.value(alpha, precision + GUARD_BITS)
            part = _evaluate(TwistedLattice(w + k, k, tau, sigma=(0, Fraction(alpha, n))), chosen, precision)
            total += weight * part.value
            error += part.error
            terms += part.terms
        scale = mp.power(n, -w - 2 * k)
        total, error = total * scale, error * scale
    with mp.workprec(precision):
        return EvalResult(+total, +error, f"ENw/{chosen}", precision, {"terms": terms})


def gamma_E_limit(w: int, n: int, tau, omega: DirichletCharacter, target_s: int, precision: int = 128, method: str = "auto") -> EvalResult:
    """
    lim_{s -> target_s} Gamma(s + w) E_{w,N}(tau, s, omega).

    For target_s = t <= -w the functional equation turns every E^(w)_{alpha/N}
    into an F-series at 1 - w - t, giving

        pi^(2t+w-1) Im(tau)^(1-w-2t) Gamma(1-t) N^(-w-2t)
            sum_alpha omega(alpha) L(1 - t, 1 - w - t; tau; 0, (alpha/N, 0)).

    For t + w >= 1 inside the convergent range it is the plain product.

    Raises:
        PoleEncountered: when the twisted sum still has a pole (N = 1, w = 0, t = 0)
    """
    t = int(target_s)
    if omega.modulus != n:
        omega = omega.induce(n)
    y = mp.im(tau)
    if t <= -w:
        total, error, terms = mp.mpc(0), mp.mpf(0), 0
        chosen = "continued" if method == "auto" else method
        with mp.workprec(precision + GUARD_BITS):
            for alpha in _units(n):
                weight = omega.value(alpha, precision + GUARD_BITS)
                lat = TwistedLattice(1 - t, 1 - w - t, tau, rho=(Fraction(alpha, n), 0))
                part = _evaluate(lat, chosen, precision)
                total += weight * part.value
                error += part.error
                terms += part.terms
            scale = mp.power(mp.pi, 2 * t + w - 1) * mp.power(y, 1 - w - 2 * t) * mp.gamma(1 - t) * mp.power(n, -w - 2 * t)
            total, error = total * scale, error * abs(scale)
        with mp.workprec(precision):
            return EvalResult(+total, +error, f"gamma-limit/functional-equation/{chosen}", precision, {"terms": terms})
    if t + w >= 1 and w + 2 * t > 2:
        series = series_ENw(w, n, tau, t, omega, precision, method)
        with mp.workprec(precision + GUARD_BITS):
            g = mp.gamma(t + w)
            value, error = g * series.value, g * series.error
        with mp.workprec(precision):
            return EvalResult(+value, +error, f"gamma-limit/product/{series.branch}", precision, series.details)
    raise UnsupportedContinuationPoint(f"Gamma(s + {w}) E_({w},{n}) at s = {t}")


@dataclass
class BridgeResult:
    k: int
    l: int
    j: int
    modulus: int
    character: str
    a: int
    lhs: mp.mpc
    rhs: mp.mpc
    error_bound: mp.mpf

    @property
    def abs_error(self) -> mp.mpf:
        return abs(self.lhs - self.rhs)

    @property
    def rel_error(self) -> mp.mpf:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.abs_error / scale if scale else self.abs_error

    def to_dict(self) -> Dict[str, Any]:
        return {
            "k": self.k, "l": self.l, "j": self.j,
            "modulus": self.modulus, "character": self.character, "a": self.a,
            "lhs": [mp.nstr(self.lhs.real, 25), mp.nstr(self.lhs.imag, 25)],
            "rhs": [mp.nstr(self.rhs.real, 25), mp.nstr(self.rhs.imag, 25)],
            "rel_error": mp.nstr(self.rel_error, 5),
        }


def bridge_check(k: int, l: int, j: int, chi: DirichletCharacter, tau, a: int = 1, precision: int = 128) -> BridgeResult:
    """
    E^{l'+1, k'+1}_{beta_chi}(tau, [[0,-1],[a,0]])
        = pi^(k'+l'+1) / (l'! N^(k'+l') Im(tau)^(k'+l'+1)) lim_{s -> -l'} Gamma(s + l - k) E_{l-k,N}(tau, s, conj(chi))

    with k' = k - j, l' = l - j. The left side uses the direct evaluator,
    the right side the continued one.
    """
    kp, lp = k - j, l - j
    if kp < 0 or lp < 0:
        raise ValueError(f"j = {j} exceeds min(k, l)")
    n = chi.modulus
    pt = EisensteinPoint.nu(tau, a, n)
    lhs = lattice_sum(lp + 1, kp + 1, beta_chi(chi), pt, precision, method="direct")
    limit = gamma_E_limit(l - k, n, tau, chi.conj(), -lp, precision)
    with mp.workprec(precision + GUARD_BITS):
        y = mp.im(tau)
        factor = mp.power(mp.pi, kp + lp + 1) / (factorial(lp) * mp.power(n, kp + lp) * mp.power(y, kp + lp + 1))
        rhs = factor * limit.value
        bound = lhs.error + abs(factor) * limit.error
    result = BridgeResult(k, l, j, n, chi.label(), a, lhs.value, rhs, bound)
    LOGGER.info("bridge (%d,%d,%d) chi=%s a=%d: rel error %s", k, l, j, chi.label(), a, mp.nstr(result.rel_error, 3))
    return result
