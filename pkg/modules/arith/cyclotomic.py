# modules/arith/cyclotomic.py
"""
Exact elements of Q(zeta_n), reduced modulo the n-th cyclotomic polynomial
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Sequence, Tuple, Union

import mpmath as mp
from sympy import Poly, cyclotomic_poly, symbols

from modules.arith.characters import RootOfUnityValue

Scalar = Union[int, Fraction]
_X = symbols("x")


@lru_cache(maxsize=None)
def _cyclotomic(n: int) -> Tuple[int, ...]:
    """Coefficients of Phi_n, highest degree first."""
    return tuple(int(c) for c in Poly(cyclotomic_poly(n, _X), _X).all_coeffs())


def _reduce(n: int, coeffs: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    phi = _cyclotomic(n)
    deg = len(phi) - 1
    work = list(coeffs)
    # work[i] is the coefficient of zeta^i; Phi_n is monic
    for top in range(len(work) - 1, deg - 1, -1):
        c = work[top]
        if c:
            for i, p in enumerate(phi):
                work[top - i] -= c * p
    work = work[:deg] + [Fraction(0)] * max(0, deg - len(work))
    return tuple(Fraction(c) for c in work[:deg])


class CyclotomicNumber:
    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Sequence[Scalar]):
        self.order = order
        self.coeffs = _reduce(order, [Fraction(c) for c in coeffs])

    @classmethod
    def rational(cls, x: Scalar) -> "CyclotomicNumber":
        return cls(1, [Fraction(x)])

    @classmethod
    def root(cls, value: RootOfUnityValue) -> "CyclotomicNumber":
        if value.zero:
            return cls.rational(0)
        n = value.denominator
        coeffs = [Fraction(0)] * n
        coeffs[value.numerator] = Fraction(1)
        return cls(n, coeffs)

    def _lift(self, order: int) -> Tuple[Fraction, ...]:
        step = order // self.order
        coeffs = [Fraction(0)] * order
        for i, c in enumerate(self.coeffs):
            coeffs[(i * step) % order] += c
        return _reduce(order, coeffs)

    def _common(self, other: "CyclotomicNumber"):
        order = self.order * other.order // gcd(self.order, other.order)
        return order, self._lift(order), other._lift(order)

    @staticmethod
    def _coerce(other) -> "CyclotomicNumber":
        if isinstance(other, CyclotomicNumber):
            return other
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber.rational(other)
        if isinstance(other, RootOfUnityValue):
            return CyclotomicNumber.root(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order, a, b = self._common(other)
        return CyclotomicNumber(order, [x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(self.order, [c * other for c in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order, a, b = self._common(other)
        prod = [Fraction(0)] * max(1, len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return CyclotomicNumber(order, prod)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        _, a, b = self._common(other)
        return a == b

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0] if self.coeffs else Fraction(0)

    def conjugate(self) -> "CyclotomicNumber":
        coeffs = [Fraction(0)] * self.order
        for i, c in enumerate(self.coeffs):
            coeffs[(-i) % self.order] += c
        return CyclotomicNumber(self.order, coeffs)

    def to_mpc(self, precision: int = 128) -> mp.mpc:
        with mp.workprec(precision):
            total = mp.mpc(0)
            for i, c in enumerate(self.coeffs):
                if c:
                    total += mp.mpf(c.numerator) / c.denominator * mp.expjpi(mp.mpf(2 * i) / self.order)
            return total

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.to_fraction())
        terms = [f"{c}*z{self.order}^{i}" for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"

    def __repr__(self) -> str:
        return f"CyclotomicNumber({self})"
