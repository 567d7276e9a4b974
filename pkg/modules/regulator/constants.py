# modules/regulator/constants.py
"""
Closed-form constants of the regulator formula. With k' = k - j and
l' = l - j:

    C1 = (-1)^(k+l+1+k'^2+j(k'+l')+(k'+j+l')(k'+j+l'-1)/2)
            k'! l'! / (k'+l')! (2 pi i)^(k+l+2)

    C2 = (-2i)^(k+l-j) i pi^(k'+l') (k'+l'+2)! / (N^(k'+l'+1) l'! (k'+l'+1)) C1
"""

from math import factorial

import mpmath as mp
from sympy import totient

from modules.arith.characters import DirichletCharacter
from modules.errors import ParityMismatch


def _check_range(k: int, l: int, j: int):
    if not 0 <= j <= k <= l:
        raise ValueError(f"need 0 <= j <= k <= l, got k = {k}, l = {l}, j = {j}")


def constant_C1(k: int, l: int, j: int, precision: int = 128) -> mp.mpc:
    _check_range(k, l, j)
    kp, lp = k - j, l - j
    m = kp + j + lp
    exponent = k + l + 1 + kp * kp + j * (kp + lp) + m * (m - 1) // 2
    with mp.workprec(precision):
        ratio = mp.mpf(factorial(kp) * factorial(lp)) / factorial(kp + lp)
        return (-1) ** exponent * ratio * mp.power(2j * mp.pi, k + l + 2)


def constant_C2(k: int, l: int, j: int, n: int, precision: int = 128) -> mp.mpc:
    _check_range(k, l, j)
    kp, lp = k - j, l - j
    with mp.workprec(precision):
        top = mp.power(-2j, k + l - j) * 1j * mp.power(mp.pi, kp + lp) * factorial(kp + lp + 2)
        bottom = mp.power(n, kp + lp + 1) * factorial(lp) * (kp + lp + 1)
        return top / bottom * constant_C1(k, l, j, precision)


def pairing_t_omega(k: int, l: int, j: int, chi_f: DirichletCharacter, chi_g: DirichletCharacter, precision: int = 128) -> mp.mpc:
    """
    <t, Omega> = (-1)^(n+1) chi_f(-1) chi_g(-1) N_chi_f N_chi_g (2 pi i)^(k+l-2j)
    with n = k + l + 2 - j.

    Raises:
        ParityMismatch: chi_f(-1) != (-1)^k or chi_g(-1) != (-1)^l
    """
    for name, chi, weight in (("f", chi_f, k), ("g", chi_g, l)):
        if chi.parity != (-1) ** weight:
            raise ParityMismatch(f"chi_{name}(-1) = {chi.parity} but (-1)^{weight} = {(-1) ** weight}")
    n = k + l + 2 - j
    with mp.workprec(precision):
        sign = (-1) ** (n + 1) * chi_f.parity * chi_g.parity
        return sign * chi_f.conductor * chi_g.conductor * mp.power(2j * mp.pi, k + l - 2 * j)


def rhs_constant(k: int, l: int, j: int, n: int, precision: int = 128) -> mp.mpc:
    """(2 pi i)^(k+l-2j) (k+l-2j+2) j! phi(N)^2 / (2 N^(k+l-2j))."""
    with mp.workprec(precision):
        phi = int(totient(n))
        e = k + l - 2 * j
        return mp.power(2j * mp.pi, e) * (e + 2) * factorial(j) * phi * phi / (2 * mp.power(n, e))


def lhs_constant(k: int, l: int, j: int, n: int, precision: int = 128) -> mp.mpc:
    """C2 N phi(N)^2 / (2 (2 pi i)^(k+l-j+1)), the factor in front of the integral."""
    with mp.workprec(precision):
        phi = int(totient(n))
        return constant_C2(k, l, j, n, precision) * n * phi * phi / (2 * mp.power(2j * mp.pi, k + l - j + 1))
