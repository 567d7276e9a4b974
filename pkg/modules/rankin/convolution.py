# modules/rankin/convolution.py
"""
The convolution D(f, g, s) = sum a_n(f) a_n(g) n^-s
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Optional

import mpmath as mp
from sympy import primerange

from modules.errors import OutsideConvergence, PoleWarning
from modules.forms.newform import Newform

LOGGER = logging.getLogger(__name__)

MAX_TERMS = 20000


@dataclass
class SeriesValue:
    value: mp.mpc
    tail_bound: mp.mpf
    terms: int

    def to_dict(self):
        return {
            "value": [mp.nstr(self.value.real, 25), mp.nstr(self.value.imag, 25)],
            "tail_bound": mp.nstr(self.tail_bound, 5),
            "terms": self.terms,
        }


def divisor_bound_constant(eps: float) -> mp.mpf:
    """
    C with d(n) <= C n^eps for all n:
    C = prod_{p < 2^(1/eps)} max_r (r + 1) / p^(r eps).
    """
    eps = mp.mpf(eps)
    const = mp.mpf(1)
    for p in primerange(2, int(mp.ceil(mp.power(2, 1 / eps))) + 1):
        best, r = mp.mpf(1), 1
        while True:
            value = (r + 1) / mp.power(p, r * eps)
            if value <= best and r > 1 / eps:
                break
            best = max(best, value)
            r += 1
        const *= best
    return const


def convergence_abscissa(f: Newform, g: Newform) -> mp.mpf:
    return mp.mpf(f.k + g.k) / 2 + 2


def _tail(f: Newform, g: Newform, sigma, n_max: int):
    """
    Deligne bound |a_n(f) a_n(g)| <= d(n)^2 n^((k+l+2)/2) with d(n) <= C n^eps,
    eps a quarter of the distance to the abscissa.
    """
    excess = sigma - convergence_abscissa(f, g)
    eps = excess / 4
    c = divisor_bound_constant(eps)
    exponent = 2 * eps  # tail ~ sum n^(-1 - exponent)
    return c * c * mp.power(n_max, -exponent) / exponent


def is_dual_pair(f: Newform, g: Newform, n_check: int = 30) -> bool:
    """g = f* on the first coefficients (same weight and level)."""
    if f.weight != g.weight or f.level != g.level:
        return False
    for n in range(1, n_check + 1):
        if not (f.has(n) and g.has(n)):
            continue
        if abs(mp.mpc(g.a(n)) - mp.conj(mp.mpc(f.a(n)))) > 1e-8 * (1 + abs(mp.mpc(f.a(n)))):
            return False
    return True


def convolution_D(f: Newform, g: Newform, s, n_max: Optional[int] = None, precision: int = 128, target: float = 1e-12) -> SeriesValue:
    """
    Truncated D(f, g, s) with a rigorous tail bound.

    Args:
        f, g: newforms
        s: point with Re(s) > (k + l)/2 + 2
        n_max: truncation; chosen from the tail bound when omitted (capped)
        precision: bits
        target: tail bound aimed for when n_max is omitted

    Returns:
        SeriesValue

    Raises:
        OutsideConvergence: Re(s) at or left of the abscissa
    """
    with mp.workprec(precision + 10):
        s = mp.mpmathify(s)
        sigma = mp.re(s)
        abscissa = convergence_abscissa(f, g)
        if sigma <= abscissa:
            raise OutsideConvergence(f"Re(s) = {mp.nstr(sigma, 8)} <= {mp.nstr(abscissa, 8)}")
        if f.k == g.k and sigma - (f.k + 2) < mp.mpf("0.5") and is_dual_pair(f, g):
            warnings.warn(f"D({f.label}, {g.label}, s) has a pole at s = {f.k + 2}", PoleWarning)
        if n_max is None:
            n_max = 64
            while n_max < MAX_TERMS and _tail(f, g, sigma, n_max) > target:
                n_max *= 2
            n_max = min(n_max, MAX_TERMS)
            LOGGER.debug("D(%s, %s): n_max = %d", f.label, g.label, n_max)
        fa, ga = f.coefficients(n_max), g.coefficients(n_max)
        total = mp.mpc(0)
        for n in range(1, n_max + 1):
            prod = fa[n - 1] * ga[n - 1]
            if prod:
                total += prod * mp.power(n, -s)
        tail = _tail(f, g, sigma, n_max)
    with mp.workprec(precision):
        return SeriesValue(+total, +tail, n_max)
