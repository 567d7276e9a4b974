# modules/quadrature/kernels.py
"""
Double-precision lattice sums over arrays of tau, for quadrature integrands.

Same expansion as TwistedLattice.continued: each row u is a Lipschitz
q-series in u tau and the constant terms of all rows are summed once in
mpmath. Constants only depend on tau through (2i Im tau)^(1-a-b).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Dict, List, Tuple

import mpmath as mp
import numpy as np

from modules.arith.characters import DirichletCharacter
from modules.eisenstein.lattice import TwistedLattice
from modules.errors import PoleEncountered, UnsupportedContinuationPoint

LOGGER = logging.getLogger(__name__)

TARGET_NATS = 40.0

Matrix = Tuple[Tuple[int, int], Tuple[int, int]]


def _first_above(x: Fraction) -> Fraction:
    base = x % 1
    return base if base > 0 else base + 1


def apply(g: Matrix, tau: np.ndarray) -> np.ndarray:
    (a, b), (c, d) = g
    return (a * tau + b) / (c * tau + d)


class LatticeKernel:
    """
    L(a, b; tau; sigma, rho) = sum' e(rho.(u, v)) (u tau + v)^-a (u conj(tau) + v)^-b
    over (u, v) in sigma + Z^2, evaluated at many tau at once.
    """

    def __init__(self, a: int, b: int, sigma=(0, 0), rho=(0, 0)):
        if a < 1 or b < 1:
            raise ValueError("lattice kernels need integer a, b >= 1")
        self.a, self.b = a, b
        self.sigma = tuple(Fraction(x) for x in sigma)
        self.rho = tuple(Fraction(x) for x in rho)
        self._base = TwistedLattice(a, b, 1j, self.sigma, self.rho)
        with mp.workprec(80):
            self._zero = complex(self._base._zero_row())
            # value at Im(tau) = 1
            self._const = complex(self._base._constants())
        self._lipschitz = [0j] + [complex((-2j * np.pi) ** i / factorial(i - 1)) for i in range(1, max(a, b) + 1)]
        self._children: Dict[Matrix, "LatticeKernel"] = {}

    def __call__(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        a, b = self.a, self.b
        y = tau.imag
        y_min = float(y.min())
        K = (TARGET_NATS + (a + b) * np.log(2 + 1 / y_min)) / (2 * np.pi * y_min)
        shift = float(self.sigma[1])
        r2 = self.rho[1]
        t_a0, t_b0 = _first_above(-r2), _first_above(r2)
        t_min = float(min(t_a0, t_b0))
        limit = int(np.floor(K / t_min)) + 1

        total = self._zero + self._const * y ** (1 - a - b)
        total = total.astype(np.complex128)
        for u in self._base._rows(limit):
            ua = abs(float(u))
            if u > 0:
                p, q = a, b
                z = ua * tau + shift
            else:
                p, q = b, a
                z = -ua * np.conj(tau) + shift
            delta = 2j * ua * y
            row = np.zeros_like(tau)
            for start, order, sign, point in ((t_a0, p, 1, z), (t_b0, q, -1, np.conj(z))):
                t = np.arange(float(start), K / ua + 1e-12, 1.0)
                if t.size == 0:
                    continue
                waves = np.exp(sign * 2j * np.pi * point[:, None] * t[None, :])
                for i in range(1, order + 1):
                    if sign == 1:
                        coeff = (-1) ** q * comb(p + q - i - 1, p - i) * delta ** (i - p - q)
                    else:
                        coeff = (-1) ** (q - i) * comb(p + q - i - 1, q - i) * delta ** (i - p - q) * (-1) ** i
                    row += coeff * self._lipschitz[i] * (waves @ t ** (i - 1))
            phase = np.exp(2j * np.pi * float((self.rho[0] * u + self.rho[1] * self.sigma[1]) % 1))
            total += phase * row
        return total

    def transformed(self, gamma: Matrix) -> "LatticeKernel":
        """The kernel L' with L(gamma tau) = (r tau + s)^a (r conj(tau) + s)^b L'(tau)."""
        if gamma not in self._children:
            (p, q), (r, s) = gamma
            sig = (self.sigma[0] * p + self.sigma[1] * r, self.sigma[0] * q + self.sigma[1] * s)
            rho = (s * self.rho[0] - q * self.rho[1], -r * self.rho[0] + p * self.rho[1])
            self._children[gamma] = LatticeKernel(self.a, self.b, sig, rho)
        return self._children[gamma]

    def pullback(self, gamma: Matrix, tau) -> np.ndarray:
        """L(gamma tau) computed at tau itself."""
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        (_, _), (r, s) = gamma
        factor = (r * tau + s) ** self.a * (r * np.conj(tau) + s) ** self.b
        return factor * self.transformed(gamma)(tau)


@dataclass
class TwistedSum:
    """
    scale * Im(tau)^y_power * sum_i coeff_i L_i(tau): the shape every
    Eisenstein series used by the integrands takes.
    """

    terms: List[Tuple[complex, LatticeKernel]]
    scale: complex = 1.0
    y_power: float = 0.0
    label: str = field(default="")

    def __call__(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        total = np.zeros_like(tau)
        for coeff, kernel in self.terms:
            total += coeff * kernel(tau)
        return self.scale * tau.imag ** self.y_power * total

    def pullback(self, gamma: Matrix, tau) -> np.ndarray:
        """Value at gamma tau for gamma in SL_2(Z), evaluating the lattice sums at tau."""
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        total = np.zeros_like(tau)
        for coeff, kernel in self.terms:
            total += coeff * kernel.pullback(gamma, tau)
        return self.scale * apply(gamma, tau).imag ** self.y_power * total


def _units(n: int) -> List[int]:
    return [u for u in range(n) if np.gcd(u, n) == 1]


def eisenstein_kernel(w: int, n: int, s: int, omega: DirichletCharacter) -> TwistedSum:
    """
    E_{w,N}(tau, s, omega) at an integer s >= 1 with w + 2s > 2, as in
    series_ENw: N^(-w-2s) sum_alpha omega(alpha) L(w + s, s; tau; (0, alpha/N), 0).
    """
    if omega.modulus != n:
        omega = omega.induce(n)
    if s < 1 or w + s < 1:
        raise UnsupportedContinuationPoint(f"E_({w},{n}) kernel at s = {s}")
    if w + 2 * s == 2:
        raise PoleEncountered(f"E_(0,{n}) has a pole at s = 1")
    terms = []
    for alpha in _units(n):
        weight = complex(omega.value(alpha, 53))
        if weight != 0:
            terms.append((weight, LatticeKernel(w + s, s, sigma=(0, Fraction(alpha, n)))))
    return TwistedSum(terms, scale=float(n) ** (-w - 2 * s), label=f"E_({w},{n})(s={s})")


def gamma_limit_kernel(w: int, n: int, omega: DirichletCharacter, t: int) -> TwistedSum:
    """
    lim_{s -> t} Gamma(s + w) E_{w,N}(tau, s, omega), the numpy counterpart
    of gamma_E_limit. For t <= -w:

        pi^(2t+w-1) Im(tau)^(1-w-2t) Gamma(1-t) N^(-w-2t)
            sum_alpha omega(alpha) L(1 - t, 1 - w - t; tau; 0, (alpha/N, 0)).
    """
    if omega.modulus != n:
        omega = omega.induce(n)
    if t <= -w:
        if n == 1 and w == 0 and t == 0:
            raise PoleEncountered("Gamma(s) E_(0,1)(tau, s) has a pole at s = 0")
        terms = []
        for alpha in _units(n):
            weight = complex(omega.value(alpha, 53))
            if weight != 0:
                terms.append((weight, LatticeKernel(1 - t, 1 - w - t, rho=(Fraction(alpha, n), 0))))
        scale = float(np.pi) ** (2 * t + w - 1) * factorial(-t) * float(n) ** (-w - 2 * t)
        return TwistedSum(terms, scale=scale, y_power=1 - w - 2 * t, label=f"Gamma E_({w},{n})(s->{t})")
    if t + w >= 1 and w + 2 * t > 2:
        kernel = eisenstein_kernel(w, n, t, omega)
        kernel.scale *= factorial(t + w - 1)
        return kernel
    raise UnsupportedContinuationPoint(f"Gamma(s + {w}) E_({w},{n}) at s = {t}")
