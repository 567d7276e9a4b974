# modules/arith/characters.py
"""
Dirichlet Characters - exact characters modulo N

A character is stored as an exponent vector on CRT generators of (Z/N)^x.
Values are exact roots of unity and only become floating point numbers at
the boundary (to_mpc / to_complex).
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Any, Callable, Dict, List, Optional, Tuple

import mpmath as mp
from sympy import factorint, n_order, totient

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RootOfUnityValue:
    """exp(2*pi*i*numerator/denominator), or the exact zero."""

    numerator: int = 0
    denominator: int = 1
    zero: bool = False

    def __post_init__(self):
        if self.zero:
            object.__setattr__(self, "numerator", 0)
            object.__setattr__(self, "denominator", 1)
            return
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        frac = Fraction(self.numerator, self.denominator) % 1
        object.__setattr__(self, "numerator", frac.numerator)
        object.__setattr__(self, "denominator", frac.denominator)

    @classmethod
    def from_fraction(cls, frac: Fraction) -> "RootOfUnityValue":
        return cls(frac.numerator, frac.denominator)

    @property
    def angle(self) -> Fraction:
        """Argument as a fraction of a full turn, in [0, 1)."""
        return Fraction(self.numerator, self.denominator)

    def __mul__(self, other: "RootOfUnityValue") -> "RootOfUnityValue":
        if self.zero or other.zero:
            return ZERO
        return RootOfUnityValue.from_fraction(self.angle + other.angle)

    def conjugate(self) -> "RootOfUnityValue":
        if self.zero:
            return ZERO
        return RootOfUnityValue.from_fraction(-self.angle)

    def as_int(self) -> Optional[int]:
        """Exact integer value when the value is 0, 1 or -1."""
        if self.zero:
            return 0
        if self.denominator == 1:
            return 1
        if self.denominator == 2:
            return -1
        return None

    def to_mpc(self, precision: Optional[int] = None) -> mp.mpc:
        if self.zero:
            return mp.mpc(0)
        exact = self.as_int()
        if exact is not None:
            return mp.mpc(exact)
        with mp.workprec(precision or mp.mp.prec):
            return mp.expjpi(mp.mpf(2 * self.numerator) / self.denominator)

    def to_complex(self) -> complex:
        return complex(self.to_mpc(53))


ZERO = RootOfUnityValue(zero=True)
ONE = RootOfUnityValue(0, 1)


@dataclass(frozen=True)
class _Factor:
    prime: int
    modulus: int  # prime power
    generator: int  # residue mod `modulus`
    order: int


@lru_cache(maxsize=None)
def _least_primitive_root(q: int) -> int:
    phi = int(totient(q))
    for g in range(2, q):
        if gcd(g, q) == 1 and n_order(g, q) == phi:
            return g
    return 1


@lru_cache(maxsize=None)
def _factors(modulus: int) -> Tuple[_Factor, ...]:
    """Cyclic factors of (Z/N)^x, odd primes with least primitive roots,
    2^e (e >= 3) split as <-1> x <5>."""
    factors = []
    for p, e in sorted(factorint(modulus).items()):
        q = p ** e
        if p == 2:
            if e == 2:
                factors.append(_Factor(2, q, q - 1, 2))
            elif e >= 3:
                factors.append(_Factor(2, q, q - 1, 2))
                factors.append(_Factor(2, q, 5, q // 4))
        else:
            factors.append(_Factor(p, q, _least_primitive_root(q), q // p * (p - 1)))
    return tuple(factors)


@lru_cache(maxsize=None)
def _log_table(q: int, generator: int) -> Dict[int, int]:
    table = {}
    x = 1
    for t in range(q):
        if x in table:
            break
        table[x] = t
        x = x * generator % q
    return table


def _local_logs(modulus: int, n: int) -> Tuple[int, ...]:
    """Discrete logs of n on each cyclic factor of (Z/N)^x."""
    logs = []
    factors = _factors(modulus)
    i = 0
    while i < len(factors):
        fac = factors[i]
        r = n % fac.modulus
        if fac.prime == 2 and fac.modulus >= 8:
            sign = 0 if r % 4 == 1 else 1
            if sign:
                r = (-r) % fac.modulus
            logs.append(sign)
            logs.append(_log_table(fac.modulus, 5)[r])
            i += 2
            continue
        logs.append(_log_table(fac.modulus, fac.generator)[r])
        i += 1
    return tuple(logs)


@lru_cache(maxsize=None)
def _global_generators(modulus: int) -> Tuple[int, ...]:
    """Each factor generator lifted to N by CRT (1 on the other factors)."""
    factors = _factors(modulus)
    lifts = []
    for fac in factors:
        rest = modulus // fac.modulus
        # x = generator mod q, x = 1 mod rest
        inv = pow(rest, -1, fac.modulus) if fac.modulus > 1 else 0
        x = (1 + rest * ((fac.generator - 1) * inv % fac.modulus)) % modulus
        lifts.append(x)
    return tuple(lifts)


@dataclass(frozen=True)
class DirichletCharacter:
    modulus: int
    exponents: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        orders = self.factor_orders()
        exps = tuple(self.exponents) if self.exponents else tuple(0 for _ in orders)
        if len(exps) != len(orders):
            raise ValueError(
                f"modulus {self.modulus} needs {len(orders)} exponents, got {len(exps)}"
            )
        object.__setattr__(self, "exponents", tuple(e % o for e, o in zip(exps, orders)))

    # -- construction ---------------------------------------------------

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        return cls(modulus)

    @classmethod
    def from_generator_values(
        cls, modulus: int, value_at: Callable[[int], Fraction]
    ) -> "DirichletCharacter":
        """
        Build a character from its angles on the CRT generators.

        Args:
            modulus: N
            value_at: maps a generator (integer coprime to N) to its angle in Q/Z

        Returns:
            DirichletCharacter
        """
        exps = []
        for fac, gen in zip(_factors(modulus), _global_generators(modulus)):
            scaled = Fraction(value_at(gen)) % 1 * fac.order
            if scaled.denominator != 1:
                raise ValueError(f"angle at generator {gen} is not of order {fac.order}")
            exps.append(int(scaled))
        return cls(modulus, tuple(exps))

    @classmethod
    def all_characters(cls, modulus: int) -> List["DirichletCharacter"]:
        """All characters mod N in lexicographic exponent order."""
        ranges = [range(o) for o in cls(modulus).factor_orders()]
        return [cls(modulus, exps) for exps in itertools.product(*ranges)]

    @classmethod
    def from_label(cls, label: str) -> "DirichletCharacter":
        modulus, index = (int(part) for part in label.split("."))
        chars = cls.all_characters(modulus)
        if not 1 <= index <= len(chars):
            raise ValueError(f"no character with label {label}")
        return chars[index - 1]

    @classmethod
    def from_conrey(cls, modulus: int, number: int) -> "DirichletCharacter":
        """
        Character with Conrey label N.c (the LMFDB naming).

        Args:
            modulus: N
            number: Conrey index c, coprime to N
        """
        if gcd(number, modulus) != 1:
            raise ValueError(f"Conrey index {number} is not coprime to {modulus}")
        # The Conrey character c has chi(g_p) = exp(2 pi i log_{g_p}(c) / phi(p^e))
        # on the same least primitive roots used here, and for 2^e the
        # (-1, 5) split matches ours.
        return cls(modulus, _local_logs(modulus, number) if modulus > 1 else ())

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "DirichletCharacter":
        chi = cls(int(data["modulus"]), tuple(int(e) for e in data["exponents"]))
        if "conductor" in data and int(data["conductor"]) != chi.conductor:
            raise ValueError("conductor does not match exponent vector")
        return chi

    # -- structure ------------------------------------------------------

    def factor_orders(self) -> Tuple[int, ...]:
        return tuple(f.order for f in _factors(self.modulus))

    @property
    def order(self) -> int:
        result = 1
        for e, o in zip(self.exponents, self.factor_orders()):
            part = o // gcd(e, o)
            result = result * part // gcd(result, part)
        return result

    def is_trivial(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def conductor(self) -> int:
        return _conductor(self)

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        angle = Fraction(0)
        orders = self.factor_orders()
        for e, o, log in zip(self.exponents, orders, _local_logs(self.modulus, -1)):
            angle += Fraction(e * log, o)
        return 1 if angle % 1 == 0 else -1

    # -- values ---------------------------------------------------------

    def __call__(self, n: int) -> RootOfUnityValue:
        if gcd(n, self.modulus) != 1:
            return ZERO
        if self.modulus == 1:
            return ONE
        orders = self.factor_orders()
        angle = sum(
            (Fraction(e * log, o) for e, o, log in zip(self.exponents, orders, _local_logs(self.modulus, n))),
            Fraction(0),
        )
        return RootOfUnityValue.from_fraction(angle)

    def value(self, n: int, precision: Optional[int] = None) -> mp.mpc:
        return self(n).to_mpc(precision)

    def int_value(self, n: int) -> Optional[int]:
        return self(n).as_int()

    def values(self) -> List[RootOfUnityValue]:
        return [self(n) for n in range(self.modulus)]

    # -- operations -----------------------------------------------------

    def conj(self) -> "DirichletCharacter":
        return DirichletCharacter(self.modulus, tuple(-e for e in self.exponents))

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        if other.modulus != self.modulus:
            modulus = self.modulus * other.modulus // gcd(self.modulus, other.modulus)
            return self.induce(modulus) * other.induce(modulus)
        return DirichletCharacter(
            self.modulus, tuple(a + b for a, b in zip(self.exponents, other.exponents))
        )

    def induce(self, modulus: int) -> "DirichletCharacter":
        """Re-extend to a multiple M of the modulus."""
        if modulus % self.modulus:
            raise ValueError(f"{modulus} is not a multiple of {self.modulus}")
        if modulus == self.modulus:
            return self
        return DirichletCharacter.from_generator_values(modulus, lambda g: self(g).angle)

    def primitive(self) -> "DirichletCharacter":
        """The primitive character mod the conductor inducing this one."""
        cond = self.conductor
        if cond == self.modulus:
            return self

        def angle(g: int) -> Fraction:
            # lift g mod cond to a unit mod N
            x = g
            while gcd(x, self.modulus) != 1:
                x += cond
            return self(x).angle

        return DirichletCharacter.from_generator_values(cond, angle)

    def label(self) -> str:
        """Canonical label "N.index", index 1-based in lexicographic exponent order."""
        index = 0
        for e, o in zip(self.exponents, self.factor_orders()):
            index = index * o + e
        return f"{self.modulus}.{index + 1}"

    def to_json(self) -> Dict[str, Any]:
        return {
            "modulus": self.modulus,
            "conductor": self.conductor,
            "exponents": list(self.exponents),
        }

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.label()}, order={self.order})"


@lru_cache(maxsize=None)
def _conductor(chi: DirichletCharacter) -> int:
    if chi.is_trivial():
        return 1
    n = chi.modulus
    for d in sorted(int(x) for x in _divisors(n)):
        if all(
            chi(m).angle == 0 for m in range(1, n, d) if gcd(m, n) == 1
        ):
            return d
    return n


def _divisors(n: int) -> List[int]:
    divs = [1]
    for p, e in factorint(n).items():
        divs = [d * p ** i for d in divs for i in range(e + 1)]
    return sorted(divs)


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for n >= 1."""
    result = 1
    for p, e in factorint(n).items():
        if p == 2:
            if d % 2 == 0:
                return 0
            local = 1 if d % 8 in (1, 7) else -1
        else:
            r = d % p
            if r == 0:
                return 0
            local = 1 if pow(r, (p - 1) // 2, p) == 1 else -1
        result *= local ** e
    return result


def kronecker_character(d: int) -> DirichletCharacter:
    """Quadratic character n -> (d/n) modulo |d| for a fundamental discriminant d."""
    modulus = abs(d)

    def angle(g: int) -> Fraction:
        sym = kronecker_symbol(d, g)
        if sym == 0:
            raise ValueError(f"{d} is not a fundamental discriminant")
        return Fraction(0) if sym == 1 else Fraction(1, 2)

    return DirichletCharacter.from_generator_values(modulus, angle)
