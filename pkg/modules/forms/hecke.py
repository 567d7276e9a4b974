# modules/forms/hecke.py
"""
Hecke-consistency checks on coefficient streams
"""

from dataclasses import dataclass
from typing import List

import mpmath as mp
from sympy import factorint, primerange

from modules.forms.newform import Newform


@dataclass(frozen=True)
class Violation:
    n: int
    rule: str
    detail: str

    def __str__(self) -> str:
        return f"n={self.n}: {self.rule} ({self.detail})"


def _close(a, b, rel: float = 1e-6) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    scale = max(abs(a), abs(b), 1)
    return abs(a - b) <= rel * scale


def hecke_validate(f: Newform, n_max: int, rel_tol: float = 1e-6) -> List[Violation]:
    """
    Check normalization, multiplicativity, the p-power recurrence and the
    Deligne bound on a_1..a_{n_max}.

    Sparse forms are checked only on the indices they store.

    Args:
        f: newform
        n_max: range to check

    Returns:
        list of violations, empty when all rules hold
    """
    if not f.sparse:
        f.extend(n_max)

    def have(n: int) -> bool:
        return n <= n_max and f.has(n)

    violations: List[Violation] = []
    w = f.k + 1

    if have(1) and not _close(f.a(1), 1, rel_tol):
        violations.append(Violation(1, "normalization", f"a_1 = {f.a(1)}"))

    for n in range(2, n_max + 1):
        if not have(n):
            continue
        parts = factorint(n)
        if len(parts) < 2:
            continue
        pieces = [p ** e for p, e in parts.items()]
        if not all(have(q) for q in pieces):
            continue
        expected = 1
        for q in pieces:
            expected = expected * f.a(q)
        if not _close(f.a(n), expected, rel_tol):
            violations.append(
                Violation(n, "multiplicativity", f"a_{n} = {f.a(n)} but product of prime-power terms = {expected}")
            )

    for p in primerange(2, n_max + 1):
        p = int(p)
        if f.level % p == 0 or not have(p):
            continue
        chi_p = f.character.int_value(p)
        if chi_p is None:
            chi_p = f.character.value(p, f.precision)
        bound = 2 * mp.power(p, mp.mpf(w) / 2)
        if abs(f.a(p)) > bound * (1 + rel_tol):
            violations.append(Violation(p, "Deligne bound", f"|a_{p}| = {mp.nstr(abs(f.a(p)), 10)} > {mp.nstr(bound, 10)}"))
        prev, cur, r = 1, f.a(p), 1
        while p ** (r + 1) <= n_max and have(p ** (r + 1)):
            nxt = f.a(p) * cur - chi_p * p ** w * prev
            if not _close(f.a(p ** (r + 1)), nxt, rel_tol):
                violations.append(
                    Violation(p ** (r + 1), "p-power recurrence", f"a = {f.a(p ** (r + 1))}, recurrence gives {nxt}")
                )
            prev, cur, r = cur, f.a(p ** (r + 1)), r + 1

    return violations
