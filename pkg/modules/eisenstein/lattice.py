# modules/eisenstein/lattice.py
"""
Twisted, shifted lattice sums

    L(a, b; tau; sigma, rho) = sum' e(rho_1 u + rho_2 v) (u tau + v)^(-a) (u conj(tau) + v)^(-b)

over (u, v) in sigma + Z^2, excluding (0, 0). Every Eisenstein-type series
in this package is a finite combination of these sums.

Each row u is summed over v in closed form through the partial fractions

    X^(-a) (X - delta)^(-b) = sum_i A_i X^(-i) + sum_j B_j (X - delta)^(-j),
    delta = 2 i Im(u tau).

Two evaluators:
  direct     rows by polygamma/cotangent (no Fourier expansion), explicit
             cutoff |u| <= M, exact tail of the constant terms, rigorous
             bound for the rest. Needs a + b >= 3.
  continued  Lipschitz/Lerch Fourier expansion of every row, constant terms
             summed over all rows through Hurwitz zeta. Also valid at
             a + b = 2 with a nontrivial twist.
A numpy box sum covers non-integer exponents.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import List, Tuple

import mpmath as mp
import numpy as np

from modules.errors import NotAbsolutelyConvergent, PoleEncountered

LOGGER = logging.getLogger(__name__)

GUARD_BITS = 20


@dataclass
class LatticeResult:
    value: mp.mpc
    error: mp.mpf
    method: str
    terms: int
    precision: int

    def to_dict(self):
        return {
            "value": [mp.nstr(self.value.real, 30), mp.nstr(self.value.imag, 30)],
            "error": mp.nstr(self.error, 5),
            "method": self.method,
            "terms": self.terms,
            "precision": self.precision,
        }


def e(x) -> mp.mpc:
    """exp(2 pi i x); exact rationals stay exact until here."""
    if isinstance(x, Fraction):
        x = x % 1
        if x == 0:
            return mp.mpc(1)
        return mp.expjpi(2 * mp.mpf(x.numerator) / x.denominator)
    return mp.expjpi(2 * x)


def _frac(x: Fraction) -> Fraction:
    return Fraction(x) % 1


def _q(x: Fraction) -> mp.mpf:
    return mp.mpf(x.numerator) / x.denominator


def _first_above(sigma: Fraction, above: int = 0) -> Fraction:
    """Smallest v in sigma + Z with v > above."""
    base = _frac(sigma)
    return base + above + (0 if base > 0 else 1)


def lerch(sigma: Fraction, rho: Fraction, s: int, above=0) -> mp.mpc:
    """
    sum_{v in sigma + Z, v > above} e(rho v) v^(-s) for rational sigma, rho.

    Split by residue of v - v0 modulo the denominator q of rho and use
    Hurwitz zeta; at s = 1 the poles cancel when rho is not integral.
    """
    v0 = _first_above(sigma, above)
    step = _frac(rho)
    q = step.denominator
    if s == 1 and step == 0:
        raise PoleEncountered("untwisted harmonic series at s = 1")
    total = mp.mpc(0)
    for r in range(q):
        x = _q(v0 + r) / q
        phase = e(step * r)
        if s == 1:
            total -= phase * mp.digamma(x)
        else:
            total += phase * mp.zeta(s, x)
    scale = mp.mpf(q) ** (-s)
    return e(rho * v0) * total * scale


def partial_fractions(a: int, b: int, delta) -> Tuple[List[mp.mpc], List[mp.mpc]]:
    """A[1..a], B[1..b] (index 0 unused) for X^(-a) (X - delta)^(-b)."""
    A = [mp.mpc(0)] * (a + 1)
    B = [mp.mpc(0)] * (b + 1)
    for i in range(1, a + 1):
        A[i] = (-1) ** b * comb(a + b - i - 1, a - i) * mp.power(delta, i - a - b)
    for j in range(1, b + 1):
        B[j] = (-1) ** (b - j) * comb(a + b - j - 1, b - j) * mp.power(delta, j - a - b)
    return A, B


def _lipschitz_coefficient(i: int) -> mp.mpc:
    return mp.power(-2j * mp.pi, i) / factorial(i - 1)


def _harmonic_row(w, i: int) -> mp.mpc:
    """sum_n (w + n)^(-i), symmetric summation for i = 1, w not real."""
    if i == 1:
        return mp.pi * mp.cot(mp.pi * w)
    return ((-1) ** i * mp.psi(i - 1, w) + mp.psi(i - 1, 1 - w)) / factorial(i - 1)


def _twisted_harmonic_row(w, i: int, rho: Fraction) -> mp.mpc:
    """sum_n e(rho n) (w + n)^(-i), split into residues mod the denominator of rho."""
    rho = _frac(rho)
    q = rho.denominator
    if q == 1:
        return _harmonic_row(w, i)
    total = mp.mpc(0)
    for r in range(q):
        total += e(rho * r) * _harmonic_row((w + r) / q, i)
    return total * mp.mpf(q) ** (-i)


def _row_nonconst_bound(a: int, b: int, uy, t_start) -> mp.mpf:
    """
    Bound on the oscillating part of one row with |Im| = uy, summing only
    frequencies t >= t_start.
    """
    x = mp.exp(-2 * mp.pi * uy)
    total = mp.mpf(0)
    for i in range(1, a + 1):
        total += comb(a + b - i - 1, a - i) * mp.power(2 * uy, i - a - b) * mp.power(2 * mp.pi, i) / (1 - x) ** i
    for j in range(1, b + 1):
        total += comb(a + b - j - 1, b - j) * mp.power(2 * uy, j - a - b) * mp.power(2 * mp.pi, j) / (1 - x) ** j
    return total * mp.exp(-2 * mp.pi * uy * t_start)


@dataclass(frozen=True)
class TwistedLattice:
    a: int
    b: int
    tau: complex
    sigma: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    rho: Tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(Fraction(x) for x in self.sigma))
        object.__setattr__(self, "rho", tuple(Fraction(x) for x in self.rho))
        if mp.im(self.tau) <= 0:
            raise ValueError("tau must lie in the upper half plane")

    # -- shared pieces ----------------------------------------------------

    def _phase(self, u: Fraction) -> mp.mpc:
        return e(self.rho[0] * u + self.rho[1] * self.sigma[1])

    def _zero_row(self) -> mp.mpc:
        """u = 0 row, present only when sigma_1 is integral."""
        if _frac(self.sigma[0]) != 0:
            return mp.mpc(0)
        c = self.a + self.b
        s2, r2 = self.sigma[1], self.rho[1]
        # v -> -v picks up (-1)^c
        return lerch(s2, r2, c) + (-1) ** c * lerch(-s2, -r2, c)

    def _constants(self, above: int = 0) -> mp.mpc:
        """Constant Fourier terms of all rows with |u| > above."""
        if _frac(self.rho[1]) != 0:
            return mp.mpc(0)
        a, b = self.a, self.b
        y = mp.im(self.tau)
        prefactor = -2j * mp.pi * comb(a + b - 2, a - 1) * mp.power(2j * y, 1 - a - b)
        prefactor *= e(self.rho[1] * self.sigma[1])
        s = a + b - 1
        pos = lerch(self.sigma[0], self.rho[0], s, above)
        neg = lerch(-self.sigma[0], -self.rho[0], s, above)
        return prefactor * ((-1) ** b * pos + (-1) ** a * neg)

    def _rows(self, limit: int) -> List[Fraction]:
        """u in sigma_1 + Z with 0 < |u| <= limit."""
        rows = []
        u = _first_above(self.sigma[0])
        while u <= limit:
            rows.append(u)
            u += 1
        u = -_first_above(-self.sigma[0])
        while -u <= limit:
            rows.append(u)
            u -= 1
        return rows

    def _target(self, precision: int) -> mp.mpf:
        return (precision + GUARD_BITS) * mp.log(2) + (self.a + self.b) * mp.log(2 + 1 / mp.im(self.tau))

    # -- direct -----------------------------------------------------------

    def direct(self, precision: int = 128) -> LatticeResult:
        """Rows by polygamma, explicit row cutoff."""
        a, b = self.a, self.b
        if a + b < 3:
            raise NotAbsolutelyConvergent(f"a + b = {a + b} needs the continued evaluator")
        with mp.workprec(precision + GUARD_BITS):
            tau = mp.mpc(self.tau)
            y = tau.imag
            shift = _q(self.sigma[1])
            r2 = self.rho[1]
            # smallest frequency in (Z - rho_2) u (Z + rho_2), positive part
            t_min = _q(min(_first_above(-r2), _first_above(r2)))
            limit = int(mp.ceil(self._target(precision) / (2 * mp.pi * y * t_min))) + 1

            total = self._zero_row()
            rows = self._rows(limit)
            for u in rows:
                z = _q(u) * tau + shift
                zb = mp.conj(z)
                A, B = partial_fractions(a, b, z - zb)
                row = mp.mpc(0)
                for i in range(1, a + 1):
                    row += A[i] * _twisted_harmonic_row(z, i, r2)
                for j in range(1, b + 1):
                    row += B[j] * _twisted_harmonic_row(zb, j, r2)
                total += self._phase(u) * row

            total += self._constants(above=limit)
            one_side = _row_nonconst_bound(a, b, limit * y, t_min) / (1 - mp.exp(-2 * mp.pi * y * t_min))
            error = 2 * one_side
        with mp.workprec(precision):
            LOGGER.debug("direct lattice sum: %d rows, bound %s", len(rows), mp.nstr(error, 3))
            return LatticeResult(+total, +error, "direct", len(rows) + 1, precision)

    # -- continued --------------------------------------------------------

    def continued(self, precision: int = 128) -> LatticeResult:
        """Fourier expansion of each row, constants summed in closed form."""
        a, b = self.a, self.b
        if a < 1 or b < 1:
            raise ValueError("the continued evaluator needs integer a, b >= 1")
        with mp.workprec(precision + GUARD_BITS):
            tau = mp.mpc(self.tau)
            y = tau.imag
            shift = _q(self.sigma[1])
            r2 = self.rho[1]
            K = self._target(precision) / (2 * mp.pi * y)
            lipschitz = [None] + [_lipschitz_coefficient(i) for i in range(1, max(a, b) + 1)]
            t_a0 = _first_above(-r2)  # frequencies in Z - rho_2
            t_b0 = _first_above(r2)  # frequencies in Z + rho_2
            t_min = _q(min(t_a0, t_b0))
            limit = int(mp.floor(K / t_min)) + 1

            total = self._zero_row() + self._constants()
            terms = 0
            error = mp.mpf(0)
            for u in self._rows(limit):
                ua = abs(_q(u))
                if u > 0:
                    p, q = a, b
                    z = ua * tau + shift
                else:
                    # S(z; a, b) = S(conj z; b, a)
                    p, q = b, a
                    z = -ua * mp.conj(tau) + shift
                zb = mp.conj(z)
                A, B = partial_fractions(p, q, 2j * ua * y)
                row = mp.mpc(0)
                ends = []
                for start, coeffs, sign, point, order in ((t_a0, A, 1, z, p), (t_b0, B, -1, zb, q)):
                    t = _q(start)
                    while t * ua <= K:
                        poly = mp.mpc(0)
                        for i in range(1, order + 1):
                            weight = coeffs[i] * lipschitz[i] * mp.power(t, i - 1)
                            poly += weight if sign == 1 else weight * (-1) ** i
                        row += poly * mp.exp(sign * 2j * mp.pi * t * point)
                        t += 1
                        terms += 1
                    ends.append(t)
                error += _row_nonconst_bound(p, q, ua * y, min(ends))
                total += self._phase(u) * row
            error += 2 * _row_nonconst_bound(a, b, limit * y, t_min) / (1 - mp.exp(-2 * mp.pi * y * t_min))
        with mp.workprec(precision):
            LOGGER.debug("continued lattice sum: %d Fourier terms, bound %s", terms, mp.nstr(error, 3))
            return LatticeResult(+total, +error, "continued", terms, precision)

    # -- box --------------------------------------------------------------

    def box(self, radius: int = 200, s=None, w: int = None) -> LatticeResult:
        """
        Double precision box sum of e(rho.(u,v)) (u tau + v)^(-w) |u tau + v|^(-2s)
        over max(|m|, |n|) <= radius; defaults w = a - b, s = b.
        """
        w = self.a - self.b if w is None else w
        s = complex(self.b if s is None else s)
        sigma_r = w + 2 * s.real
        if sigma_r <= 2:
            raise NotAbsolutelyConvergent(f"w + 2 Re(s) = {sigma_r} <= 2")
        tau = complex(self.tau)
        m = np.arange(-radius, radius + 1)
        U = m[:, None] + float(self.sigma[0])
        V = m[None, :] + float(self.sigma[1])
        Z = U * tau + V
        mask = np.abs(Z) > 1e-300
        phase = np.exp(2j * np.pi * (float(self.rho[0]) * U + float(self.rho[1]) * V))
        Zs = np.where(mask, Z, 1.0)
        terms = np.where(mask, phase * Zs ** (-w) * np.abs(Zs) ** (-2 * s), 0.0)
        value = complex(terms.sum())
        kappa = box_norm_constant(tau)
        error = 8 * kappa ** (-sigma_r) * (radius - 1) ** (2 - sigma_r) / (sigma_r - 2)
        return LatticeResult(mp.mpc(value), mp.mpf(error), "box", int(mask.sum()), 53)

    # -- modular transformation ------------------------------------------

    def transform(self, gamma) -> Tuple[mp.mpc, "TwistedLattice"]:
        """
        For gamma = ((p, q), (r, s)) in SL_2(Z) and tau' = gamma^-1 tau:

            L(tau) = (r tau' + s)^a (r conj(tau') + s)^b L'(tau')

        with sigma' = sigma.gamma and rho' = gamma^-1 rho. Returns (factor, L').
        """
        (p, q), (r, s) = gamma
        tau = mp.mpc(self.tau)
        tau_p = (s * tau - q) / (-r * tau + p)
        sig = (self.sigma[0] * p + self.sigma[1] * r, self.sigma[0] * q + self.sigma[1] * s)
        rho = (s * self.rho[0] - q * self.rho[1], -r * self.rho[0] + p * self.rho[1])
        factor = mp.power(r * tau_p + s, self.a) * mp.power(r * mp.conj(tau_p) + s, self.b)
        return factor, TwistedLattice(self.a, self.b, tau_p, sig, rho)


def box_norm_constant(tau: complex) -> float:
    """min |u tau + v| over max(|u|, |v|) = 1, sampled with a safety margin."""
    t = np.linspace(-1.0, 1.0, 4001)
    edge = np.concatenate([np.abs(tau + t), np.abs(t * tau + 1.0)])
    return 0.95 * float(edge.min())
