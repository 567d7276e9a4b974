# modules/rankin/automorphic.py
"""
The automorphic factor

    R_{f,g,N}(s) = (prod_{p | N} P_p(f x g, s)) sum_{n in S(N)} a_n(f) a_n(g) n^-s,

a product over p | N of polynomials R_p(X) in X = p^-s.
"""

import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Dict, List, Optional

import mpmath as mp
from sympy import factorint

from modules.arith.characters import DirichletCharacter
from modules.errors import BadPrime, InsufficientCoefficients
from modules.forms.newform import Newform
from modules.rankin.euler import (
    EulerFactorSet,
    Poly,
    char_value,
    encode_number,
    local_euler_factor,
    is_zero,
    poly_eval,
    poly_mul,
    to_complex,
    trim,
)

LOGGER = logging.getLogger(__name__)

DEGREE_BOUND = 4


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


@dataclass
class RankinSpec:
    f: Newform
    g: Newform
    j: int
    level: Optional[int] = None

    def __post_init__(self):
        base = _lcm(self.f.level, self.g.level)
        if self.level is None:
            self.level = base
        if self.level % base:
            raise ValueError(f"N = {self.level} is not a multiple of lcm(N_f, N_g) = {base}")
        if not 0 <= self.j <= min(self.k, self.l):
            raise ValueError(f"j = {self.j} outside 0..min(k, l) = {min(self.k, self.l)}")

    @property
    def k(self) -> int:
        return self.f.k

    @property
    def l(self) -> int:
        return self.g.k

    @property
    def n(self) -> int:
        return self.k + self.l + 2 - self.j

    @property
    def k_prime(self) -> int:
        return self.k - self.j

    @property
    def l_prime(self) -> int:
        return self.l - self.j

    @property
    def chi(self) -> DirichletCharacter:
        """chi_f chi_g induced to N."""
        return self.f.character.induce(self.level) * self.g.character.induce(self.level)

    @property
    def exact(self) -> bool:
        return self.f.is_exact() and self.g.is_exact()

    def primes(self) -> List[int]:
        return sorted(factorint(self.level))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "f": self.f.label, "g": self.g.label, "N": self.level,
            "k": self.k, "l": self.l, "j": self.j, "n": self.n,
        }


@dataclass
class LocalR:
    p: int
    coefficients: Poly
    rule: str
    euler_factor: Optional[Poly] = None

    def evaluate(self, s, precision: int = 128) -> mp.mpc:
        with mp.workprec(precision):
            return poly_eval(self.coefficients, mp.power(self.p, -mp.mpmathify(s)), precision)

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "rule": self.rule, "coefficients": [encode_number(c) for c in self.coefficients]}


def local_D(spec: RankinSpec, p: int, degree: int) -> Poly:
    """sum_{r <= degree} a_{p^r}(f) a_{p^r}(g) X^r."""
    out: Poly = []
    for r in range(degree + 1):
        q = p ** r
        try:
            af, ag = spec.f.a(q), spec.g.a(q)
        except InsufficientCoefficients as exc:
            raise InsufficientCoefficients(f"need a_{q} of both forms for R at p = {p}") from exc
        prod = af * ag
        out.append(prod if spec.exact else mp.mpc(prod))
    return out


def local_R(
    spec: RankinSpec, p: int, bad_factors: Optional[EulerFactorSet] = None, degree: int = DEGREE_BOUND, derive: bool = False
) -> LocalR:
    """
    R_p(X) for a prime p | N.

    p dividing exactly one level gives R_p = 1 without touching
    coefficients unless `derive` is set. Otherwise R_p = P_p D_p with P_p
    taken from `bad_factors`, the good-prime product or the special x
    special rule, in that order; BadPrime when none applies.
    """
    if spec.level % p:
        raise ValueError(f"{p} does not divide N = {spec.level}")
    in_f, in_g = spec.f.level % p == 0, spec.g.level % p == 0
    one_sided = in_f != in_g
    if one_sided and not derive:
        return LocalR(p, [1], "one-sided")
    euler, source = local_euler_factor(spec.f, spec.g, p, bad_factors, spec.exact)
    if one_sided:
        rule = "one-sided"
    elif source == "good":
        rule = "unramified"
    elif source == "rule":
        rule = "special-pair"
    else:
        rule = source
    # R_p = P_p * D_p is a polynomial; D_p is read far enough to see it close
    span = degree + 2
    product = poly_mul(euler, local_D(spec, p, span), degree=span)
    tol = 0 if spec.exact else mp.mpf(10) ** -20 * max(1, max(abs(to_complex(c)) for c in product))
    if any(not is_zero(c, tol) for c in product[degree + 1:]):
        raise InsufficientCoefficients(f"R_p at p = {p} has no polynomial form of degree <= {degree}")
    return LocalR(p, trim(product[: degree + 1], tol), rule, euler)


def closed_form_R(spec: RankinSpec, p: int) -> Poly:
    """1 - chi_f(p) chi_g(p) p^(k+l+2) X^2 for p | N with p prime to both levels."""
    if (spec.f.level * spec.g.level) % p == 0:
        raise BadPrime(f"the unramified rule does not apply at p = {p}")
    exact = spec.exact
    c = char_value(spec.f.character, p, exact) * char_value(spec.g.character, p, exact)
    return [1, 0, -c * p ** (spec.k + spec.l + 2)]


@dataclass
class AutomorphicFactor:
    spec: RankinSpec
    factors: Dict[int, LocalR] = field(default_factory=dict)

    def evaluate(self, s, precision: int = 128) -> mp.mpc:
        with mp.workprec(precision):
            value = mp.mpc(1)
            for local in self.factors.values():
                value *= local.evaluate(s, precision)
            return value

    def dirichlet_coefficients(self) -> Dict[int, Any]:
        """R = sum_r R_r r^-s over r in S(N)."""
        coeffs: Dict[int, Any] = {1: 1}
        for p, local in self.factors.items():
            nxt: Dict[int, Any] = {}
            for r, c in coeffs.items():
                for e, d in enumerate(local.coefficients):
                    if is_zero(d):
                        continue
                    key = r * p ** e
                    nxt[key] = nxt.get(key, 0) + c * d
            coeffs = nxt
        return coeffs

    def to_dict(self) -> Dict[str, Any]:
        return {"spec": self.spec.to_dict(), "factors": [local.to_dict() for _, local in sorted(self.factors.items())]}


def automorphic_R(spec: RankinSpec, bad_factors: Optional[EulerFactorSet] = None, degree: int = DEGREE_BOUND) -> AutomorphicFactor:
    """R_{f,g,N} as one local polynomial per p | N."""
    factor = AutomorphicFactor(spec)
    for p in spec.primes():
        factor.factors[p] = local_R(spec, p, bad_factors, degree)
        LOGGER.info("R_%d(X) = %s (%s)", p, factor.factors[p].to_dict()["coefficients"], factor.factors[p].rule)
    return factor


def predicted_nonvanishing(k: int, l: int, j: int) -> bool:
    """The sufficient condition k + l - 2j not in {0, 1, 2}."""
    return k + l - 2 * j not in (0, 1, 2)


def vanishing_scan(f: Newform, g: Newform, level: Optional[int] = None, bad_factors: Optional[EulerFactorSet] = None, precision: int = 128) -> List[Dict[str, Any]]:
    """
    R_{f,g,N}(j + 1) for every admissible j, with the predicted
    nonvanishing flag alongside.
    """
    rows = []
    for j in range(min(f.k, g.k) + 1):
        spec = RankinSpec(f, g, j, level)
        R = automorphic_R(spec, bad_factors)
        with mp.workprec(precision):
            value = R.evaluate(j + 1, precision)
            vanishes = abs(value) < mp.mpf(2) ** (20 - precision)
        rows.append({
            "j": j,
            "value": [mp.nstr(value.real, 20), mp.nstr(value.imag, 20)],
            "vanishes": bool(vanishes),
            "predicted_nonzero": predicted_nonvanishing(spec.k, spec.l, j),
        })
    return rows
