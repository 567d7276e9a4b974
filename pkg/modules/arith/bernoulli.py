# modules/arith/bernoulli.py
"""
Exact Bernoulli polynomials and generalized Bernoulli numbers
"""

from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Tuple, Union

import mpmath as mp
from sympy import bernoulli

from modules.arith.characters import DirichletCharacter

Rational = Union[int, Fraction]


@lru_cache(maxsize=None)
def bernoulli_number(k: int) -> Fraction:
    """B_k with B_1 = -1/2 (sympy changed its sign convention for B_1)."""
    if k == 1:
        return Fraction(-1, 2)
    value = bernoulli(k)
    return Fraction(int(value.p), int(value.q))


@lru_cache(maxsize=None)
def _coefficients(k: int) -> Tuple[Fraction, ...]:
    # B_k(x) = sum_j C(k, j) B_j x^(k-j); index i holds the x^i coefficient
    coeffs = [Fraction(0)] * (k + 1)
    for j in range(k + 1):
        coeffs[k - j] = comb(k, j) * bernoulli_number(j)
    return tuple(coeffs)


def bernoulli_polynomial(k: int, x: Rational) -> Fraction:
    """
    Exact B_k(x).

    Args:
        k: non-negative degree
        x: rational argument

    Returns:
        Fraction
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    x = Fraction(x)
    result = Fraction(0)
    for c in reversed(_coefficients(k)):
        result = result * x + c
    return result


def fractional_part(x: Rational) -> Fraction:
    """<x> in [0, 1), also at integers."""
    return Fraction(x) % 1


def periodic_bernoulli(k: int, x: Rational) -> Fraction:
    return bernoulli_polynomial(k, fractional_part(x))


def generalized_bernoulli(k: int, chi: DirichletCharacter, precision: int = 128):
    """
    B_{k,chi} = N^(k-1) sum_{a=1}^{N} chi(a) B_k(a/N).

    Returns a Fraction for characters with values in {0, 1, -1}, an mpc otherwise.
    """
    n = chi.modulus
    if chi.is_real():
        total = Fraction(0)
        for a in range(1, n + 1):
            v = chi.int_value(a)
            if v:
                total += v * bernoulli_polynomial(k, Fraction(a, n))
        return total * Fraction(n) ** (k - 1)
    with mp.workprec(precision):
        total = mp.mpc(0)
        for a in range(1, n + 1):
            b = bernoulli_polynomial(k, Fraction(a, n))
            total += chi.value(a, precision) * mp.mpf(b.numerator) / b.denominator
        return total * mp.mpf(n) ** (k - 1)
