# modules/residue/cusps.py
"""
Cusps of the level-N modular curve as classes in GL_2(Z/N) / +-B, where B is
the group of [[a, b], [0, 1]]. A function in F^k_N is fixed by one value per
class, up to the sign (-1)^k between g and -g.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from sympy import primefactors

from modules.eisenstein.divisor import Matrix, gl2, mat_mul, mat_neg
from modules.residue.boundary import BoundaryFunction, borel_elements, is_zero

LOGGER = logging.getLogger(__name__)


@dataclass
class CuspClass:
    representative: Matrix
    members: Dict[Matrix, int]

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self):
        (a, b), (c, d) = self.representative
        return {"representative": [a, b, c, d], "size": len(self.members)}


def cusp_enumeration(n: int) -> List[CuspClass]:
    """
    Brute-force orbits. members maps each matrix in the class to +1 when it
    lies in g B and to -1 when it lies in -g B.
    """
    seen = set()
    classes = []
    borel = list(borel_elements(n)) if n > 1 else [((1, 0), (0, 1))]
    for g in gl2(n):
        if g in seen:
            continue
        members: Dict[Matrix, int] = {}
        neg = mat_neg(g, n)
        for u in borel:
            members.setdefault(mat_mul(g, u, n), 1)
        for u in borel:
            members.setdefault(mat_mul(neg, u, n), -1)
        seen.update(members)
        classes.append(CuspClass(g, members))
    LOGGER.debug("level %d: %d cusp classes", n, len(classes))
    return classes


def cusp_count_formula(n: int) -> int:
    """(N^2 / 2) prod_{p | N} (1 - 1/p^2), valid for N >= 3."""
    if n < 3:
        raise ValueError("the closed form holds for N >= 3")
    count = Fraction(n * n, 2)
    for p in primefactors(n):
        count *= 1 - Fraction(1, p * p)
    return int(count)


def relation_sign(g: Matrix, h: Matrix, n: int, k: int) -> Optional[int]:
    """
    The sign e with f(h) = e f(g) for every f in F^k_N, or None when g and h
    lie in different classes.
    """
    for u in borel_elements(n):
        gu = mat_mul(g, u, n)
        if gu == h:
            return 1
        if mat_neg(gu, n) == h:
            return (-1) ** k
    return None


def decompose(f: BoundaryFunction, classes: Optional[List[CuspClass]] = None) -> Dict[Matrix, object]:
    """Value of f at each class representative, zeros omitted."""
    classes = classes or cusp_enumeration(f.level)
    out = {}
    for cusp in classes:
        value = f(cusp.representative)
        if not is_zero(value):
            out[cusp.representative] = value
    return out


def from_cusp_values(n: int, k: int, values: Dict[Matrix, object], classes: Optional[List[CuspClass]] = None) -> BoundaryFunction:
    """The element of F^k_N taking the given values at class representatives."""
    classes = classes or cusp_enumeration(n)
    out = {}
    for cusp in classes:
        value = values.get(cusp.representative)
        if value is None or is_zero(value):
            continue
        for h, sign in cusp.members.items():
            out[h] = value * (sign if k % 2 else 1)
    return BoundaryFunction(n, k, out)


def cusp_flags(f: BoundaryFunction, classes: Optional[List[CuspClass]] = None) -> List[Dict[str, object]]:
    """One row per class: representative, value there and whether it vanishes."""
    classes = classes or cusp_enumeration(f.level)
    rows = []
    for cusp in classes:
        value = f(cusp.representative)
        rows.append({**cusp.to_dict(), "value": str(value), "vanishes": is_zero(value)})
    return rows
