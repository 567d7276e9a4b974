# modules/quadrature/cosets.py
"""
Right cosets of Gamma_0(N) in SL_2(Z).

Gamma_0(N) g = Gamma_0(N) h exactly when the bottom rows of g and h agree in
P^1(Z/N), so the cosets are enumerated from P^1(Z/N) and each class is lifted
to the integer matrix whose bottom row (c, d) has the smallest c^2 + d^2.
Small bottom rows keep Im(g tau) away from zero on the standard domain.
"""

import logging
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Dict, List, Optional, Tuple

from sympy import factorint
from sympy.core.intfunc import igcdex

from modules.errors import ConfigError

LOGGER = logging.getLogger(__name__)

Matrix = Tuple[Tuple[int, int], Tuple[int, int]]


def index_gamma0(n: int) -> int:
    """[SL_2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    index = n
    for p in factorint(n):
        index = index // p * (p + 1)
    return index


def p1_class(c: int, d: int, n: int) -> Tuple[int, int]:
    """Canonical representative of (c : d) in P^1(Z/N): least pair over unit multiples."""
    if n == 1:
        return (0, 0)
    c, d = c % n, d % n
    return min(((u * c) % n, (u * d) % n) for u in range(1, n) if gcd(u, n) == 1)


def cusp_width(c: int, n: int) -> int:
    """Width of the cusp a/c of Gamma_0(N); the cusp at infinity has width 1."""
    if c % n == 0:
        return 1
    return n // gcd(c * c, n)


def complete(c: int, d: int) -> Matrix:
    """A matrix of SL_2(Z) with bottom row (c, d), gcd(c, d) = 1."""
    x, y, g = igcdex(d, c)
    if g != 1:
        raise ValueError(f"({c}, {d}) is not a primitive vector")
    return ((int(x), int(-y)), (c, d))


@dataclass(frozen=True)
class Coset:
    matrix: Matrix
    p1: Tuple[int, int]
    width: int

    def to_dict(self) -> Dict[str, Any]:
        return {"matrix": [list(r) for r in self.matrix], "p1": list(self.p1), "width": self.width}


def coset_representatives(n: int) -> List[Coset]:
    """
    One SL_2(Z) matrix per right coset of Gamma_0(N).

    Raises:
        ConfigError: for N < 1
    """
    if n < 1:
        raise ConfigError(f"level must be positive, got {n}")
    if n == 1:
        return [Coset(((1, 0), (0, 1)), (0, 0), 1)]
    expected = index_gamma0(n)
    span = 3 * n
    candidates = [(c, d) for c in range(0, span + 1) for d in range(-span, span + 1) if gcd(c, d) == 1]
    # ties broken towards c = 0, then positive d
    candidates.sort(key=lambda cd: (cd[0] ** 2 + cd[1] ** 2, cd[0], -cd[1]))
    found: Dict[Tuple[int, int], Coset] = {}
    for c, d in candidates:
        key = p1_class(c, d, n)
        if key not in found:
            found[key] = Coset(complete(c, d), key, cusp_width(c, n))
            if len(found) == expected:
                break
    if len(found) != expected:
        raise RuntimeError(f"found {len(found)} cosets of Gamma_0({n}), expected {expected}")
    LOGGER.debug("Gamma_0(%d): %d cosets", n, expected)
    return sorted(found.values(), key=lambda cs: (cs.matrix[1][0], cs.matrix[1][1]))


def in_gamma0(g: Matrix, n: int) -> bool:
    (a, b), (c, d) = g
    return a * d - b * c == 1 and c % n == 0


@dataclass
class FundamentalDomainSpec:
    """
    Gamma_0(N)\\H as coset translates of the standard domain
    {|x| <= 1/2, |tau| >= 1}, truncated at Im(tau) = truncation.

    Args:
        level: N
        truncation: starting height Y; raised automatically up to max_height
        max_height: ceiling for the automatic raise; default from the widest cusp
        tolerance: relative target for the panel error estimate
        order: Gauss-Legendre points per direction (error from order - 4)
        initial_panels: x-subdivisions of each region at the start
        max_panels: refinement budget per region
        workers: threads evaluating panels; never changes the result
    """

    level: int
    truncation: float = 8.0
    max_height: Optional[float] = None
    tolerance: float = 1e-10
    order: int = 12
    initial_panels: int = 2
    max_panels: int = 4000
    workers: int = 1
    cosets: List[Coset] = field(default_factory=list)

    def __post_init__(self):
        if self.truncation <= 1.5:
            raise ConfigError(f"truncation height must exceed 1.5, got {self.truncation}")
        if self.order < 6:
            raise ConfigError("need at least 6 Gauss-Legendre points per direction")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.cosets:
            self.cosets = coset_representatives(self.level)
        if self.max_height is None:
            # a cusp of width w needs Y of order 2w before cusp forms have decayed
            self.max_height = max(48.0, 8.0 * max(c.width for c in self.cosets))

    @classmethod
    def from_effort(
        cls, level: int, effort: int = 1, truncation: Optional[float] = None, workers: int = 1
    ) -> "FundamentalDomainSpec":
        """Effort e tightens the tolerance by 10^-2 per step and adds points."""
        return cls(
            level=level,
            truncation=truncation or 8.0,
            tolerance=1e-8 * 10.0 ** (-2 * (effort - 1)),
            order=10 + 2 * effort,
            workers=workers,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "cosets": len(self.cosets),
            "truncation": self.truncation,
            "tolerance": self.tolerance,
            "order": self.order,
        }
