# modules/rankin/euler.py
"""
Local factors of L(f x g, s) as polynomials in X = p^-s

Polynomials are coefficient lists [c0, c1, ...]. Entries stay exact (int,
Fraction, CyclotomicNumber) when both forms have rational coefficients and
become mpc otherwise.
"""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import mpmath as mp

from modules.arith.characters import DirichletCharacter
from modules.arith.cyclotomic import CyclotomicNumber
from modules.errors import BadPrime, InsufficientCoefficients
from modules.forms.newform import Newform
from modules.storage.data_manager import write_json

LOGGER = logging.getLogger(__name__)

Number = Union[int, Fraction, CyclotomicNumber, mp.mpc]
Poly = List[Number]

SOURCES = ("good", "rule", "user", "database")


def char_value(chi: DirichletCharacter, n: int, exact: bool) -> Number:
    """chi(n) as int/CyclotomicNumber when exact, else as mpc."""
    value = chi(n)
    if not exact:
        return value.to_mpc()
    if value.zero:
        return 0
    as_int = value.as_int()
    return as_int if as_int is not None else CyclotomicNumber.root(value)


def to_complex(x: Number, precision: int = 128) -> mp.mpc:
    if isinstance(x, CyclotomicNumber):
        return x.to_mpc(precision)
    if isinstance(x, Fraction):
        return mp.mpc(mp.mpf(x.numerator) / x.denominator)
    return mp.mpc(x)


def is_zero(x: Number, tol: float = 0.0) -> bool:
    if isinstance(x, CyclotomicNumber):
        return x.is_zero()
    if isinstance(x, mp.mpc) or isinstance(x, mp.mpf):
        return abs(x) <= tol
    return x == 0


def poly_mul(a: Sequence[Number], b: Sequence[Number], degree: int = None) -> Poly:
    n = len(a) + len(b) - 1
    if degree is not None:
        n = min(n, degree + 1)
    out: Poly = [0] * n
    for i, x in enumerate(a):
        if is_zero(x):
            continue
        for j, y in enumerate(b):
            if i + j < n:
                out[i + j] = out[i + j] + x * y
    return out


def series_inverse(p: Sequence[Number], terms: int) -> Poly:
    """Power series 1/p to X^(terms-1); requires p[0] = 1."""
    if p[0] != 1:
        raise ValueError("series inversion needs constant term 1")
    inv: Poly = [1] + [0] * (terms - 1)
    for r in range(1, terms):
        acc = 0
        for i in range(1, min(r, len(p) - 1) + 1):
            acc = acc + p[i] * inv[r - i]
        inv[r] = -acc
    return inv


def poly_eval(p: Sequence[Number], x, precision: int = 128) -> mp.mpc:
    with mp.workprec(precision):
        acc = mp.mpc(0)
        for c in reversed(p):
            acc = acc * x + to_complex(c, precision)
        return acc


def trim(p: Sequence[Number], tol: float = 0.0) -> Poly:
    out = list(p)
    while len(out) > 1 and is_zero(out[-1], tol):
        out.pop()
    return out


def good_euler_factor(f: Newform, g: Newform, p: int, exact: bool = None) -> Poly:
    """
    prod_{i,j} (1 - alpha_i beta_j X) over the Satake roots of f and g at p.

    With a = a_p(f), A = chi_f(p) p^(k+1), b = a_p(g), B = chi_g(p) p^(l+1)
    the product expands to

        1 - ab X + (a^2 B + b^2 A - 2AB) X^2 - abAB X^3 + A^2 B^2 X^4,

    the resultant of the two Hecke polynomials, so no roots are extracted.

    Raises:
        BadPrime: p divides N_f N_g
    """
    if (f.level * g.level) % p == 0:
        raise BadPrime(f"p = {p} divides the levels {f.level}, {g.level}")
    if exact is None:
        exact = f.is_exact() and g.is_exact()
    a, b = f.a(p), g.a(p)
    if not exact:
        a, b = mp.mpc(a), mp.mpc(b)
    A = char_value(f.character, p, exact) * p ** (f.k + 1)
    B = char_value(g.character, p, exact) * p ** (g.k + 1)
    ab, AB = a * b, A * B
    return [1, -ab, a * a * B + b * b * A - 2 * AB, -ab * AB, AB * AB]


def special_pair_factor(f: Newform, g: Newform, p: int) -> Poly:
    """
    Twin special representations at p: (1 - c X)(1 - p c X), c = a_p(f) a_p(g).

    Applies when p exactly divides both levels, both characters are
    unramified at p and a_p(f) a_p(g) != 0.
    """
    if not is_special_pair(f, g, p):
        raise BadPrime(f"p = {p} is not a special x special prime for {f.label}, {g.label}")
    c = f.a(p) * g.a(p)
    return [1, -(c + p * c), p * c * c]


def is_special_pair(f: Newform, g: Newform, p: int) -> bool:
    for h in (f, g):
        if h.level % p or (h.level // p) % p == 0:
            return False
        if h.character.conductor % p == 0:
            return False
    try:
        return not is_zero(f.a(p)) and not is_zero(g.a(p))
    except InsufficientCoefficients:
        return False


def encode_number(x: Number) -> Any:
    if isinstance(x, int):
        return x
    if isinstance(x, (Fraction, CyclotomicNumber)) and (not isinstance(x, CyclotomicNumber) or x.is_rational()):
        return str(x if isinstance(x, Fraction) else x.to_fraction())
    c = to_complex(x)
    return [mp.nstr(c.real, 30), mp.nstr(c.imag, 30)]


def conjugate_number(x: Number) -> Number:
    if isinstance(x, CyclotomicNumber):
        return x.conjugate()
    if isinstance(x, (mp.mpc, mp.mpf)):
        return mp.conj(x)
    return x


def decode_number(x: Any) -> Number:
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return mp.mpf(x)
    if isinstance(x, str):
        value = Fraction(x)
        return int(value) if value.denominator == 1 else value
    if isinstance(x, list) and len(x) == 2:
        return mp.mpc(mp.mpf(x[0]), mp.mpf(x[1]))
    raise ValueError(f"cannot decode Euler-factor coefficient {x!r}")


@dataclass
class EulerFactorSet:
    factors: Dict[int, Poly] = field(default_factory=dict)
    sources: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        for p, poly in self.factors.items():
            self._check(p, poly)
            self.sources.setdefault(p, "user")

    @staticmethod
    def _check(p: int, poly: Sequence[Number]):
        if len(trim(poly)) > 5:
            raise ValueError(f"local factor at {p} has degree > 4")
        if poly[0] != 1:
            raise ValueError(f"local factor at {p} does not start with 1")

    def add(self, p: int, poly: Poly, source: str) -> None:
        if source not in SOURCES:
            raise ValueError(f"unknown source {source!r}")
        self._check(p, poly)
        self.factors[p] = list(poly)
        self.sources[p] = source

    def __contains__(self, p: int) -> bool:
        return p in self.factors

    def __getitem__(self, p: int) -> Poly:
        return self.factors[p]

    def __len__(self) -> int:
        return len(self.factors)

    def overlay(self, fallback: Optional["EulerFactorSet"]) -> "EulerFactorSet":
        """These factors, with primes missing here taken from `fallback`."""
        out = EulerFactorSet()
        for source in (fallback, self):
            if source is None:
                continue
            for p, poly in source.factors.items():
                out.add(p, poly, source.sources[p])
        return out

    def conjugate(self) -> "EulerFactorSet":
        """Factors of the dual pair (f*, g*): coefficients conjugated."""
        out = EulerFactorSet()
        for p, poly in self.factors.items():
            out.add(p, [conjugate_number(c) for c in poly], self.sources[p])
        return out

    def to_json(self) -> Dict[str, Any]:
        return {
            str(p): {"coefficients": [encode_number(c) for c in trim(poly)], "source": self.sources[p]}
            for p, poly in sorted(self.factors.items())
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "EulerFactorSet":
        """Accepts {p: [c0..c4]} or {p: {"coefficients": [...], "source": ...}}."""
        out = cls()
        for key, entry in data.items():
            if isinstance(entry, dict):
                coeffs, source = entry["coefficients"], entry.get("source", "user")
            else:
                coeffs, source = entry, "user"
            out.add(int(key), [decode_number(c) for c in coeffs], source)
        return out

    def save(self, path: Path) -> Path:
        return write_json(Path(path), self.to_json())

    @classmethod
    def load(cls, path: Path) -> "EulerFactorSet":
        return cls.from_json(json.loads(Path(path).read_text()))


def one_sided_factor(ramified: Newform, unramified: Newform, p: int, exact: bool = None) -> Poly:
    """
    p divides the level of `ramified` only:
    1 - c b X + c^2 B X^2 with c = a_p(ramified), b = a_p(unramified),
    B = chi(p) p^(weight-1) of the unramified form. Collapses to 1 when c = 0.
    """
    if ramified.level % p or unramified.level % p == 0:
        raise BadPrime(f"p = {p} is not one-sided for levels {ramified.level}, {unramified.level}")
    if exact is None:
        exact = ramified.is_exact() and unramified.is_exact()
    c, b = ramified.a(p), unramified.a(p)
    if not exact:
        c, b = mp.mpc(c), mp.mpc(b)
    B = char_value(unramified.character, p, exact) * p ** (unramified.k + 1)
    return [1, -c * b, c * c * B]


def local_euler_factor(f: Newform, g: Newform, p: int, bad_factors: "EulerFactorSet" = None, exact: bool = None) -> Tuple[Poly, str]:
    """
    P_p(f x g) with the source it came from.

    Supplied factors come first; in a set built by `overlay` user entries
    shadow database ones. Then the good-prime product, the one-sided and
    special x special rules, and BadPrime for anything else.
    """
    if bad_factors is not None and p in bad_factors:
        return bad_factors[p], bad_factors.sources.get(p, "user")
    in_f, in_g = f.level % p == 0, g.level % p == 0
    if not in_f and not in_g:
        return good_euler_factor(f, g, p, exact), "good"
    if in_f and not in_g:
        return one_sided_factor(f, g, p, exact), "rule"
    if in_g and not in_f:
        return one_sided_factor(g, f, p, exact), "rule"
    if is_special_pair(f, g, p):
        return special_pair_factor(f, g, p), "rule"
    raise BadPrime(f"no local factor of {f.label} x {g.label} at p = {p}; supply one")
