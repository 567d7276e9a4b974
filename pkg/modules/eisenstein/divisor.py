# modules/eisenstein/divisor.py
"""
Degree-zero divisors on (Z/N)^2 and matrices over Z/N

Matrices are ((a, b), (c, d)) tuples acting on column vectors.
"""

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, Iterator, Tuple, Union

import mpmath as mp

from modules.arith.characters import DirichletCharacter
from modules.arith.cyclotomic import CyclotomicNumber
from modules.errors import NotDegreeZero, TrivialCharacter

Vector = Tuple[int, int]
Matrix = Tuple[Tuple[int, int], Tuple[int, int]]
Value = Union[Fraction, CyclotomicNumber]


def mat_vec(g: Matrix, v: Vector, n: int) -> Vector:
    return ((g[0][0] * v[0] + g[0][1] * v[1]) % n, (g[1][0] * v[0] + g[1][1] * v[1]) % n)


def mat_mul(g: Matrix, h: Matrix, n: int) -> Matrix:
    return (
        ((g[0][0] * h[0][0] + g[0][1] * h[1][0]) % n, (g[0][0] * h[0][1] + g[0][1] * h[1][1]) % n),
        ((g[1][0] * h[0][0] + g[1][1] * h[1][0]) % n, (g[1][0] * h[0][1] + g[1][1] * h[1][1]) % n),
    )


def mat_det(g: Matrix, n: int) -> int:
    return (g[0][0] * g[1][1] - g[0][1] * g[1][0]) % n


def mat_inv(g: Matrix, n: int) -> Matrix:
    det = mat_det(g, n)
    if gcd(det, n) != 1:
        raise ValueError(f"matrix {g} is not invertible mod {n}")
    inv = pow(det, -1, n)
    (a, b), (c, d) = g
    return ((d * inv % n, -b * inv % n), (-c * inv % n, a * inv % n))


def mat_neg(g: Matrix, n: int) -> Matrix:
    return tuple(tuple(-x % n for x in row) for row in g)


def nu_matrix(a: int, n: int) -> Matrix:
    """[[0, -1], [a, 0]], the component matrices of the nu-map."""
    if gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    return ((0, -1 % n), (a % n, 0))


def gl2(n: int) -> Iterator[Matrix]:
    """All of GL_2(Z/N)."""
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if gcd((a * d - b * c) % n, n) == 1:
                        yield ((a, b), (c, d))


@dataclass
class Divisor:
    modulus: int
    values: Dict[Vector, Value] = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        cleaned = {}
        for (v1, v2), val in self.values.items():
            if not isinstance(val, CyclotomicNumber):
                val = Fraction(val)
            if val != 0:
                key = (v1 % self.modulus, v2 % self.modulus)
                cleaned[key] = cleaned.get(key, Fraction(0)) + val
        self.values = {k: v for k, v in cleaned.items() if v != 0}
        if self.check and not self.is_degree_zero():
            raise NotDegreeZero(f"divisor of degree {self.degree()} on (Z/{self.modulus})^2")

    def degree(self) -> Value:
        total = Fraction(0)
        for v in self.values.values():
            total = v + total
        return total

    def is_degree_zero(self) -> bool:
        return self.degree() == 0

    def __call__(self, v: Vector) -> Value:
        return self.values.get((v[0] % self.modulus, v[1] % self.modulus), Fraction(0))

    def __add__(self, other: "Divisor") -> "Divisor":
        vals = dict(self.values)
        for k, v in other.values.items():
            vals[k] = vals.get(k, Fraction(0)) + v
        return Divisor(self.modulus, vals, check=self.check and other.check)

    def scale(self, c: Union[int, Fraction]) -> "Divisor":
        return Divisor(self.modulus, {k: v * Fraction(c) for k, v in self.values.items()}, check=self.check)

    def is_rational(self) -> bool:
        return all(not isinstance(v, CyclotomicNumber) or v.is_rational() for v in self.values.values())

    def complex_values(self, precision: int = 128) -> Dict[Vector, mp.mpc]:
        out = {}
        with mp.workprec(precision):
            for k, v in self.values.items():
                if isinstance(v, CyclotomicNumber):
                    out[k] = v.to_mpc(precision)
                else:
                    out[k] = mp.mpf(v.numerator) / v.denominator
        return out

    def to_json(self):
        return {
            "modulus": self.modulus,
            "values": [[v1, v2, str(val)] for (v1, v2), val in sorted(self.values.items())],
        }

    @classmethod
    def from_json(cls, data) -> "Divisor":
        return cls(int(data["modulus"]), {(int(a), int(b)): Fraction(c) for a, b, c in data["values"]})

    @classmethod
    def point_difference(cls, n: int, p: Vector, q: Vector) -> "Divisor":
        """[p] - [q]."""
        return cls(n, {p: Fraction(1), q: Fraction(-1)}) if p != q else cls(n, {})

    @classmethod
    def random(cls, n: int, rng: random.Random, support: int = 4, height: int = 5) -> "Divisor":
        vals: Dict[Vector, Fraction] = {}
        points = [(rng.randrange(n), rng.randrange(n)) for _ in range(support)]
        for p in points[:-1]:
            vals[p] = vals.get(p, Fraction(0)) + Fraction(rng.randint(-height, height), rng.randint(1, height))
        last = points[-1]
        vals[last] = vals.get(last, Fraction(0)) - sum(vals.values(), Fraction(0))
        return cls(n, vals)


def beta_chi(chi: DirichletCharacter) -> Divisor:
    """
    beta_chi(v1, v2) = conj(chi)(-v2) if v1 = 0, else 0.

    Args:
        chi: nontrivial character mod N

    Returns:
        Divisor of modulus N, degree zero by orthogonality
    """
    if chi.is_trivial():
        raise TrivialCharacter("beta_chi needs a nontrivial character")
    n = chi.modulus
    bar = chi.conj()
    values: Dict[Vector, Value] = {}
    for v2 in range(n):
        val = bar(-v2)
        if val.zero:
            continue
        exact = val.as_int()
        values[(0, v2)] = Fraction(exact) if exact is not None else CyclotomicNumber.root(val)
    return Divisor(n, values)


@dataclass(frozen=True)
class EisensteinPoint:
    tau: complex
    h: Matrix
    modulus: int

    def __post_init__(self):
        if mp.im(self.tau) <= 0:
            raise ValueError("tau must lie in the upper half plane")
        if gcd(mat_det(self.h, self.modulus), self.modulus) != 1:
            raise ValueError(f"h = {self.h} is not invertible mod {self.modulus}")

    @classmethod
    def nu(cls, tau, a: int, n: int) -> "EisensteinPoint":
        return cls(tau, nu_matrix(a, n), n)
