# modules/forms/newform.py
"""
Newform data model

Coefficients are exact integers when the Hecke field is Q and complex
mpmath numbers (one fixed embedding) otherwise. The coefficient store can
be extended lazily through an `extender` callback (eta expansion or a
database fetch); extension is serialized by a lock.
"""

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Optional, Union

import mpmath as mp
import numpy as np

from modules.arith.characters import DirichletCharacter
from modules.errors import InsufficientCoefficients
from modules.storage.data_manager import read_jsonl, write_jsonl_atomic

LOGGER = logging.getLogger(__name__)

Coefficient = Union[int, mp.mpc]


@dataclass
class Newform:
    weight: int
    level: int
    character: DirichletCharacter
    coeffs: Dict[int, Coefficient] = field(default_factory=dict)
    label: Optional[str] = None
    source: str = "file"
    embedding: int = 0
    precision: int = 128
    sparse: bool = False
    extender: Optional[Callable[[int], Dict[int, Coefficient]]] = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if self.character.modulus != self.level:
            self.character = self.character.induce(self.level)

    # -- basic data -------------------------------------------------------

    @property
    def k(self) -> int:
        """The k of weight k+2."""
        return self.weight - 2

    @property
    def n_max(self) -> int:
        return max(self.coeffs) if self.coeffs else 0

    @property
    def dense_bound(self) -> int:
        """Largest n with a_1..a_n all known."""
        n = 0
        while n + 1 in self.coeffs:
            n += 1
        return n

    def is_exact(self) -> bool:
        return all(isinstance(c, int) for c in self.coeffs.values())

    def has(self, n: int) -> bool:
        return n in self.coeffs

    # -- access -----------------------------------------------------------

    def extend(self, n_max: int) -> None:
        """Make a_1..a_{n_max} available, calling the extender if needed."""
        if self.dense_bound >= n_max:
            return
        with self._lock:
            if self.dense_bound >= n_max:
                return
            if self.extender is None or self.sparse:
                raise InsufficientCoefficients(
                    f"{self.label or 'form'} has coefficients up to {self.dense_bound}, need {n_max}"
                )
            LOGGER.debug("extending %s to n=%d", self.label, n_max)
            self.coeffs.update(self.extender(n_max))
            if self.dense_bound < n_max:
                raise InsufficientCoefficients(
                    f"{self.label or 'form'}: source provided only {self.dense_bound} coefficients"
                )

    def a(self, n: int) -> Coefficient:
        if n < 1:
            raise ValueError("coefficients are indexed from 1")
        if n not in self.coeffs:
            if self.sparse:
                raise InsufficientCoefficients(f"a_{n} not stored for sparse form {self.label}")
            self.extend(n)
        return self.coeffs[n]

    def coefficients(self, n_max: int) -> List[Coefficient]:
        """[a_1, ..., a_{n_max}]."""
        self.extend(n_max)
        return [self.coeffs[n] for n in range(1, n_max + 1)]

    def coefficient_array(self, n_max: int) -> np.ndarray:
        """complex128 array indexed by n (slot 0 is zero)."""
        arr = np.zeros(n_max + 1, dtype=np.complex128)
        for n, c in enumerate(self.coefficients(n_max), start=1):
            arr[n] = complex(c)
        return arr

    def q_expansion(self, tau, n_terms: Optional[int] = None) -> np.ndarray:
        """
        sum a_n e(n tau), vectorised over an array of tau.

        Args:
            tau: complex scalar or array in the upper half plane
            n_terms: truncation; default from the smallest Im(tau)
        """
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        if n_terms is None:
            y_min = float(np.min(tau.imag))
            # |a_n| grows polynomially; e^{-2 pi n y} below 1e-20 of the first term
            n_terms = max(8, int(np.ceil((46.0 + self.weight * 4.0) / (2 * np.pi * y_min))))
        coeffs = self.coefficient_array(n_terms)
        q = np.exp(2j * np.pi * tau)
        # Horner in q
        acc = np.zeros_like(q)
        for n in range(n_terms, 0, -1):
            acc = (acc + coeffs[n]) * q
        return acc

    # -- serialization ----------------------------------------------------

    def header(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "weight": self.weight,
            "level": self.level,
            "character": self.character.to_json(),
            "embedding": self.embedding,
            "precision": self.precision,
            "source": self.source,
            "sparse": self.sparse,
            "n_max": self.n_max,
        }

    def records(self) -> Iterator[Dict[str, Any]]:
        digits = int(self.precision * 0.30103) + 3
        for n in sorted(self.coeffs):
            c = self.coeffs[n]
            if isinstance(c, int):
                yield {"n": n, "re": c, "im": 0}
            else:
                yield {
                    "n": n,
                    "re": mp.nstr(c.real, digits, strip_zeros=False),
                    "im": mp.nstr(c.imag, digits, strip_zeros=False),
                }

    def save(self, path: Path) -> Path:
        return write_jsonl_atomic(Path(path), [{"header": self.header()}, *self.records()])

    @classmethod
    def load(cls, path: Path) -> "Newform":
        rows = read_jsonl(Path(path))
        if not rows or "header" not in rows[0]:
            raise ValueError(f"{path}: first record must be a header")
        head = rows[0]["header"]
        precision = int(head.get("precision", 128))
        coeffs: Dict[int, Coefficient] = {}
        with mp.workprec(precision):
            for row in rows[1:]:
                re, im = row["re"], row["im"]
                if isinstance(re, int) and isinstance(im, int) and im == 0:
                    coeffs[int(row["n"])] = re
                else:
                    coeffs[int(row["n"])] = mp.mpc(mp.mpf(re), mp.mpf(im))
        return cls(
            weight=int(head["weight"]),
            level=int(head["level"]),
            character=DirichletCharacter.from_json(head["character"]),
            coeffs=coeffs,
            label=head.get("label"),
            source=head.get("source", "file"),
            embedding=int(head.get("embedding", 0)),
            precision=precision,
            sparse=bool(head.get("sparse", False)),
        )


def _conjugate(c: Coefficient) -> Coefficient:
    return c if isinstance(c, int) else mp.conj(c)


def dual_form(f: Newform) -> Newform:
    """
    f* : conjugate coefficients, inverse nebentypus, same weight and level.

    Args:
        f: newform

    Returns:
        A new Newform; lazy extension goes through f's extender.
    """
    if f.is_exact() and f.character.is_real():
        return f
    extender = None
    if f.extender is not None:
        def extender(n_max: int) -> Dict[int, Coefficient]:
            f.extend(n_max)
            return {n: _conjugate(f.coeffs[n]) for n in range(1, n_max + 1)}
    label = f"{f.label}*" if f.label and not f.label.endswith("*") else (f.label[:-1] if f.label else None)
    return Newform(
        weight=f.weight,
        level=f.level,
        character=f.character.conj(),
        coeffs={n: _conjugate(c) for n, c in f.coeffs.items()},
        label=label,
        source=f.source,
        embedding=f.embedding,
        precision=f.precision,
        sparse=f.sparse,
        extender=extender,
    )
