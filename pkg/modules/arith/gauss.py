# modules/arith/gauss.py
"""
Gauss sums of Dirichlet characters
"""

from fractions import Fraction

import mpmath as mp

from modules.arith.characters import DirichletCharacter


def gauss_sum(chi: DirichletCharacter, precision: int = 128) -> mp.mpc:
    """
    G(chi) = sum_{u mod N_chi} chi(u) e(u / N_chi), over the conductor.

    Args:
        chi: character at any modulus (primitivized first)
        precision: working precision in bits

    Returns:
        G(chi) as mpc
    """
    prim = chi.primitive()
    cond = prim.modulus
    if cond == 1:
        return mp.mpc(1)
    with mp.workprec(precision + 10):
        total = mp.mpc(0)
        for u in range(1, cond):
            value = prim(u)
            if value.zero:
                continue
            angle = (value.angle + Fraction(u, cond)) % 1
            total += mp.expjpi(2 * mp.mpf(angle.numerator) / angle.denominator)
    with mp.workprec(precision):
        return +total


def gauss_product_check(chi: DirichletCharacter, precision: int = 128) -> mp.mpc:
    """G(chi) G(conj chi) - chi(-1) N_chi; zero up to rounding."""
    prim = chi.primitive()
    with mp.workprec(precision):
        return gauss_sum(prim, precision) * gauss_sum(prim.conj(), precision) - prim.parity * prim.modulus
