# modules/forms/eta.py
"""
Eta quotients (optionally times weight-2 Eisenstein series E_2^(M)) and
the catalogue of newforms built from them.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, List, Tuple

import numpy as np
from sympy import divisor_sigma

from modules.arith.characters import DirichletCharacter, kronecker_character
from modules.errors import NotFound, NotHolomorphic
from modules.forms.newform import Newform

LOGGER = logging.getLogger(__name__)


@lru_cache(maxsize=None)
def sigma(n: int) -> int:
    """Sum of the divisors of n (0 for non-integers passed as 0)."""
    return int(divisor_sigma(n)) if n > 0 else 0


def _series_product(a: List[int], b: List[int], n_max: int) -> List[int]:
    av = np.array(a[: n_max + 1], dtype=object)
    out = []
    for n in range(n_max + 1):
        out.append(int(np.dot(av[: n + 1], np.array(b[n::-1], dtype=object))))
    return out


def eisenstein_e2(level: int, n_max: int) -> List[int]:
    """
    E_2^(M) = 1 + 24/(M-1) sum (sigma(n) - M sigma(n/M)) q^n, a holomorphic
    weight-2 form on Gamma_0(M).
    """
    if level < 2 or 24 % (level - 1):
        raise ValueError(f"E_2^({level}) has non-integral coefficients")
    scale = 24 // (level - 1)
    coeffs = [1]
    for n in range(1, n_max + 1):
        coeffs.append(scale * (sigma(n) - (level * sigma(n // level) if n % level == 0 else 0)))
    return coeffs


@dataclass(frozen=True)
class EtaQuotient:
    """prod_d eta(d tau)^{r_d} * prod_M E_2^(M)(tau)."""

    terms: Tuple[Tuple[int, int], ...]
    eisenstein: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def weight(self) -> int:
        half = Fraction(sum(r for _, r in self.terms), 2)
        if half.denominator != 1:
            raise NotHolomorphic(f"{self} has half-integral weight")
        return int(half) + 2 * len(self.eisenstein)

    @property
    def valuation(self) -> Fraction:
        return Fraction(sum(d * r for d, r in self.terms), 24)

    def __str__(self) -> str:
        parts = [f"eta({d}t)^{r}" if d > 1 else f"eta(t)^{r}" for d, r in self.terms]
        parts += [f"E2^({m})" for m in self.eisenstein]
        return " * ".join(parts)


def eta_expand(q: EtaQuotient, n_max: int) -> List[int]:
    """
    Exact coefficients a_1..a_{n_max} of the expansion.

    Uses n p_n = sum_{k<=n} c_k p_{n-k} with c_k = -sum_{d|k} r_d d sigma(k/d),
    the logarithmic derivative of prod_d prod_m (1 - q^{dm})^{r_d}.

    Args:
        q: eta quotient
        n_max: number of coefficients, >= 1

    Returns:
        [a_1, ..., a_{n_max}]
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    v = q.valuation
    if v.denominator != 1 or v <= 0:
        raise NotHolomorphic(f"{q}: q-valuation {v} is not a positive integer")
    v = int(v)
    length = n_max - v  # series index range 0..length
    if length < 0:
        return [0] * n_max

    c = [0] * (length + 1)
    for k in range(1, length + 1):
        c[k] = -sum(r * d * sigma(k // d) for d, r in q.terms if k % d == 0)
    cv = np.array(c, dtype=object)
    p = [1]
    for n in range(1, length + 1):
        total = int(np.dot(cv[1 : n + 1], np.array(p[::-1], dtype=object)))
        if total % n:
            raise ArithmeticError("non-integral eta coefficient")
        p.append(total // n)

    for m in q.eisenstein:
        p = _series_product(p, eisenstein_e2(m, length), length)

    return [0] * (v - 1) + p


@dataclass(frozen=True)
class KnownEtaForm:
    label: str
    quotient: EtaQuotient
    level: int
    character: Callable[[], DirichletCharacter]


KNOWN_ETA_FORMS: Dict[str, KnownEtaForm] = {
    "1.12.a.a": KnownEtaForm("1.12.a.a", EtaQuotient(((1, 24),)), 1, lambda: DirichletCharacter.trivial(1)),
    "11.2.a.a": KnownEtaForm("11.2.a.a", EtaQuotient(((1, 2), (11, 2))), 11, lambda: DirichletCharacter.trivial(11)),
    "3.8.a.a": KnownEtaForm("3.8.a.a", EtaQuotient(((1, 6), (3, 6)), (3,)), 3, lambda: DirichletCharacter.trivial(3)),
    "5.4.a.a": KnownEtaForm("5.4.a.a", EtaQuotient(((1, 4), (5, 4))), 5, lambda: DirichletCharacter.trivial(5)),
    "7.3.b.a": KnownEtaForm("7.3.b.a", EtaQuotient(((1, 3), (7, 3))), 7, lambda: kronecker_character(-7)),
}

ETA_ALIASES = {"delta": "1.12.a.a", "11a": "11.2.a.a", "3.8.a": "3.8.a.a"}


def eta_newform(name: str, n_max: int = 200) -> Newform:
    """
    Newform from the catalogue, extended lazily by eta_expand.

    Args:
        name: label or alias ("delta", "11a")
        n_max: coefficients to expand up front
    """
    key = ETA_ALIASES.get(name.lower(), name)
    if key not in KNOWN_ETA_FORMS:
        raise NotFound(f"no eta-quotient form named '{name}'; known: {sorted(KNOWN_ETA_FORMS)}")
    known = KNOWN_ETA_FORMS[key]

    def extender(n: int) -> Dict[int, int]:
        return dict(enumerate(eta_expand(known.quotient, n), start=1))

    return Newform(
        weight=known.quotient.weight,
        level=known.level,
        character=known.character(),
        coeffs=extender(n_max),
        label=known.label,
        source="eta",
        extender=extender,
    )
