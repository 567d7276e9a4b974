# modules/arith/dirichlet_l.py
"""
Dirichlet L-functions through the Hurwitz zeta decomposition

    L(chi, s) = N^(-s) sum_{a=1}^{N} chi(a) zeta(s, a/N)

L is the L-function of chi as a character mod N (Euler factors at primes
dividing N but not the conductor are absent).
"""

import logging

import mpmath as mp

from modules.arith.characters import DirichletCharacter
from modules.errors import PoleAtOne

LOGGER = logging.getLogger(__name__)


def dirichlet_L(chi: DirichletCharacter, s, precision: int = 128) -> mp.mpc:
    """
    Analytically continued L(chi, s).

    Args:
        chi: character mod N
        s: complex point
        precision: bits

    Returns:
        mpc value
    """
    n = chi.modulus
    with mp.workprec(precision + 20):
        s = mp.mpmathify(s)
        at_one = s == 1
        if at_one and chi.is_trivial():
            raise PoleAtOne(f"L({chi.label()}, s) has a pole at s = 1")
        total = mp.mpc(0)
        for a in range(1, n + 1):
            value = chi(a)
            if value.zero:
                continue
            c = value.to_mpc(precision + 20)
            if at_one:
                # zeta(s, x) = 1/(s-1) - digamma(x) + O(s-1); the poles cancel
                total -= c * mp.digamma(mp.mpf(a) / n)
            else:
                total += c * mp.zeta(s, mp.mpf(a) / n)
        result = total / n if at_one else total * mp.power(n, -s)
    with mp.workprec(precision):
        return mp.mpc(+result)


def dirichlet_L_series(chi: DirichletCharacter, s, terms: int, precision: int = 128) -> mp.mpc:
    """Partial sum sum_{n <= terms} chi(n) n^(-s)."""
    with mp.workprec(precision):
        s = mp.mpmathify(s)
        total = mp.mpc(0)
        for m in range(1, terms + 1):
            value = chi(m)
            if not value.zero:
                total += value.to_mpc(precision) * mp.power(m, -s)
        return total
