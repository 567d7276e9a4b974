# modules/residue/boundary.py
"""
Boundary functions on GL_2(Z/N) and the horospherical map

    omega^k_N(beta)(g) = sum_{x in (Z/N)^2} beta(g x^t) B_{k+2}(<x_2 / N>).

Vectors are columns and g x^t is the matrix acting on the column x^t, so the
sum collapses to one term per support point v of beta, with x = g^-1 v.
Values stay exact: Fractions, or cyclotomic numbers for complex divisors.
"""

import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

from modules.arith.bernoulli import periodic_bernoulli
from modules.arith.characters import DirichletCharacter
from modules.arith.cyclotomic import CyclotomicNumber
from modules.eisenstein.divisor import (
    Divisor,
    Matrix,
    Value,
    beta_chi,
    gl2,
    mat_inv,
    mat_mul,
    mat_neg,
    mat_vec,
)
from modules.errors import NotDegreeZero
from modules.storage.data_manager import write_json

LOGGER = logging.getLogger(__name__)

EXHAUSTIVE_LEVEL = 8


def is_zero(value: Value) -> bool:
    if isinstance(value, CyclotomicNumber):
        return value.is_zero()
    return value == 0


def borel_elements(n: int) -> Iterator[Matrix]:
    """[[a, b], [0, 1]] with a a unit mod N."""
    for a in range(1, n):
        if gcd(a, n) == 1:
            for b in range(n):
                yield ((a, b), (0, 1))


def _key(g: Matrix) -> str:
    return ",".join(str(x) for row in g for x in row)


@dataclass
class BoundaryFunction:
    """
    A function GL_2(Z/N) -> Q (or a cyclotomic field), stored densely with
    zero values omitted.
    """

    level: int
    k: int
    values: Dict[Matrix, Value] = field(default_factory=dict)

    def __call__(self, g: Matrix) -> Value:
        n = self.level
        g = tuple(tuple(x % n for x in row) for row in g)
        return self.values.get(g, Fraction(0))

    def support(self) -> List[Matrix]:
        return sorted(self.values)

    def violations(self, samples: Optional[int] = None, seed: int = 7) -> List[Dict[str, Any]]:
        """
        Failures of f(g [[a, b], [0, 1]]) = (-1)^k f(-g). Exhaustive for
        N <= 8, otherwise on sampled g.
        """
        n = self.level
        sign = (-1) ** self.k
        if samples is None and n <= EXHAUSTIVE_LEVEL:
            elements = list(gl2(n))
        else:
            rng = random.Random(seed)
            pool = list(gl2(n))
            elements = [rng.choice(pool) for _ in range(samples or 200)]
        bad = []
        for g in elements:
            target = self(mat_neg(g, n)) * sign
            for u in borel_elements(n):
                value = self(mat_mul(g, u, n))
                if not is_zero(value - target):
                    bad.append({"g": _key(g), "u": _key(u), "value": str(value), "expected": str(target)})
                    break
        return bad

    def is_in_F(self, samples: Optional[int] = None) -> bool:
        return not self.violations(samples)

    def __add__(self, other: "BoundaryFunction") -> "BoundaryFunction":
        if (other.level, other.k) != (self.level, self.k):
            raise ValueError("boundary functions of different level or weight")
        values = dict(self.values)
        for g, v in other.values.items():
            values[g] = v + values.get(g, Fraction(0))
        return BoundaryFunction(self.level, self.k, {g: v for g, v in values.items() if not is_zero(v)})

    def scale(self, c) -> "BoundaryFunction":
        c = Fraction(c)
        return BoundaryFunction(self.level, self.k, {g: v * c for g, v in self.values.items() if c != 0})

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoundaryFunction):
            return NotImplemented
        if (other.level, other.k) != (self.level, self.k):
            return False
        keys = set(self.values) | set(other.values)
        return all(is_zero(self(g) - other(g)) for g in keys)

    def to_json(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "k": self.k,
            "values": {_key(g): str(v) for g, v in sorted(self.values.items())},
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "BoundaryFunction":
        """Rational values only; cyclotomic values are written for reading, not reloading."""
        values = {}
        for key, text in data["values"].items():
            a, b, c, d = (int(x) for x in key.split(","))
            values[((a, b), (c, d))] = Fraction(text)
        return cls(int(data["level"]), int(data["k"]), values)

    def save(self, path: Path) -> Path:
        return write_json(Path(path), self.to_json())

    @classmethod
    def load(cls, path: Path) -> "BoundaryFunction":
        return cls.from_json(json.loads(Path(path).read_text()))


def horospherical_value(beta: Divisor, k: int, g: Matrix) -> Value:
    """omega^k_N(beta)(g) for a single g."""
    n = beta.modulus
    g_inv = mat_inv(g, n)
    total: Value = Fraction(0)
    for v, weight in sorted(beta.values.items()):
        x = mat_vec(g_inv, v, n)
        total = weight * periodic_bernoulli(k + 2, Fraction(x[1], n)) + total
    return total


def horospherical(beta: Divisor, k: int) -> BoundaryFunction:
    """
    omega^k_N(beta) on all of GL_2(Z/N).

    Raises:
        NotDegreeZero: beta is not of degree zero
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if not beta.is_degree_zero():
        raise NotDegreeZero(f"degree {beta.degree()} divisor")
    n = beta.modulus
    values = {}
    for g in gl2(n):
        value = horospherical_value(beta, k, g)
        if not is_zero(value):
            values[g] = value
    LOGGER.debug("omega^%d_%d: %d nonzero values", k, n, len(values))
    return BoundaryFunction(n, k, values)


def residue_of_beta_chi(chi: DirichletCharacter, k: int) -> BoundaryFunction:
    """
    omega^k_N(beta_chi), the boundary side of the residue of the Eisenstein class.

    Raises:
        TrivialCharacter: chi = 1
    """
    return horospherical(beta_chi(chi), k)
