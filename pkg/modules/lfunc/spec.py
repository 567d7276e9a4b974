# modules/lfunc/spec.py
"""
L-function data: Dirichlet coefficients, gamma factor, conductor, weight,
root number and poles of the completed function

    Lambda(s) = Q^(s/2) prod_j Gamma_K(s + mu_j) L(s) = eps Lambda*(w + 1 - s),

with Gamma_R(s) = pi^(-s/2) Gamma(s/2) or Gamma_C(s) = 2 (2 pi)^-s Gamma(s),
one kind per spec. Lambda* is built from the dual coefficients.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from math import gcd
from pathlib import Path
from typing import Any, Dict, List, Optional

import mpmath as mp

from modules.arith.characters import DirichletCharacter
from modules.arith.gauss import gauss_sum
from modules.errors import ConfigError, NotEnoughCoefficients
from modules.forms.newform import Newform, dual_form
from modules.rankin.automorphic import RankinSpec
from modules.rankin.convolution import is_dual_pair
from modules.rankin.euler import EulerFactorSet, Number, decode_number, encode_number, to_complex
from modules.rankin.identity import tensor_coefficients
from modules.storage.data_manager import write_json

LOGGER = logging.getLogger(__name__)

GAMMA_KINDS = ("R", "C")


@dataclass
class Pole:
    """Simple pole of Lambda; residue None means solve for it."""

    at: Any
    residue: Optional[Any] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "at": encode_number(mp.mpc(self.at)),
            "residue": None if self.residue is None else encode_number(mp.mpc(self.residue)),
        }


@dataclass
class LFunctionSpec:
    name: str
    coefficients: List[Number]
    gamma_kind: str
    shifts: List[int]
    conductor: int
    weight: int
    epsilon: Optional[Any] = None
    dual_coefficients: Optional[List[Number]] = None
    poles: List[Pole] = field(default_factory=list)

    def __post_init__(self):
        if self.gamma_kind not in GAMMA_KINDS:
            raise ConfigError(f"gamma kind must be one of {GAMMA_KINDS}, got {self.gamma_kind!r}")
        if self.conductor < 1:
            raise ConfigError(f"conductor must be a positive integer, got {self.conductor}")
        if not self.shifts:
            raise ConfigError("at least one gamma shift is needed")

    @property
    def degree(self) -> int:
        return len(self.shifts) * (1 if self.gamma_kind == "R" else 2)

    @property
    def self_dual(self) -> bool:
        return self.dual_coefficients is None

    @property
    def dual(self) -> List[Number]:
        return self.coefficients if self.dual_coefficients is None else self.dual_coefficients

    @property
    def unknowns(self) -> int:
        """Number of quantities the functional equation test has to solve for."""
        return (self.epsilon is None) + sum(p.residue is None for p in self.poles)

    def coefficient_vectors(self, n_terms: int, precision: int = 128):
        """a_1..a_n and the dual a*_1..a*_n as mpc lists."""
        if len(self.coefficients) < n_terms or len(self.dual) < n_terms:
            raise NotEnoughCoefficients(
                f"{self.name}: {min(len(self.coefficients), len(self.dual))} coefficients stored, {n_terms} needed"
            )
        with mp.workprec(precision):
            a = [to_complex(c, precision) for c in self.coefficients[:n_terms]]
            b = a if self.self_dual else [to_complex(c, precision) for c in self.dual_coefficients[:n_terms]]
        return a, b

    def with_solution(self, epsilon, residues: Dict[int, Any]) -> "LFunctionSpec":
        """Copy with the root number and pole residues filled in."""
        poles = [replace(p, residue=residues.get(i, p.residue)) for i, p in enumerate(self.poles)]
        return replace(self, epsilon=epsilon, poles=poles)

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "gamma_kind": self.gamma_kind,
            "shifts": list(self.shifts),
            "conductor": self.conductor,
            "weight": self.weight,
            "epsilon": None if self.epsilon is None else encode_number(mp.mpc(self.epsilon)),
            "poles": [p.to_json() for p in self.poles],
            "coefficients": [encode_number(c) for c in self.coefficients],
            "dual_coefficients": None if self.self_dual else [encode_number(c) for c in self.dual_coefficients],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "LFunctionSpec":
        try:
            dual = data.get("dual_coefficients")
            return cls(
                name=data["name"],
                coefficients=[decode_number(c) for c in data["coefficients"]],
                gamma_kind=data["gamma_kind"],
                shifts=[int(m) for m in data["shifts"]],
                conductor=int(data["conductor"]),
                weight=int(data["weight"]),
                epsilon=None if data.get("epsilon") is None else decode_number(data["epsilon"]),
                dual_coefficients=None if dual is None else [decode_number(c) for c in dual],
                poles=[
                    Pole(decode_number(p["at"]), None if p.get("residue") is None else decode_number(p["residue"]))
                    for p in data.get("poles", [])
                ],
            )
        except KeyError as e:
            raise ConfigError(f"L-function spec is missing {e}")

    def save(self, path: Path) -> Path:
        return write_json(Path(path), self.to_json())

    @classmethod
    def load(cls, path: Path) -> "LFunctionSpec":
        return cls.from_json(json.loads(Path(path).read_text()))


def series_length(degree: int, conductor: int, weight: int, precision: int, split: float = 1.0) -> int:
    """
    Terms needed so that the cutoff weights at n / (split sqrt(Q)) fall
    below 2^-precision; the weights decay like exp(-d pi x^(2/d)).
    """
    scale = max(split, 1 / split) * mp.sqrt(conductor)
    n = 10
    for _ in range(3):
        target = (precision + 20) * mp.log(2) + (mp.mpf(weight) / 2 + 1) * mp.log(n)
        n = int(mp.ceil(scale * mp.power(target / (degree * mp.pi), mp.mpf(degree) / 2))) + 10
    return n


def zeta_spec(n_terms: int = 64) -> LFunctionSpec:
    """Riemann zeta: Gamma_R(s), Q = 1, eps = 1, poles at 1 and 0."""
    return LFunctionSpec(
        name="zeta",
        coefficients=[1] * n_terms,
        gamma_kind="R",
        shifts=[0],
        conductor=1,
        weight=0,
        epsilon=1,
        poles=[Pole(1, 1), Pole(0, -1)],
    )


def dirichlet_spec(chi: DirichletCharacter, n_terms: Optional[int] = None, precision: int = 128) -> LFunctionSpec:
    """
    L(chi, s) for the primitive character behind chi.

    The root number is G(chi) / (i^a sqrt(q)) with a = 0 for even and 1 for
    odd characters.
    """
    prim = chi.primitive()
    if prim.modulus == 1:
        return zeta_spec(n_terms or series_length(1, 1, 0, precision, 1.25))
    q = prim.modulus
    odd = prim.parity == -1
    n_terms = n_terms or series_length(1, q, 0, precision, 1.25)
    with mp.workprec(precision):
        eps = gauss_sum(prim, precision) / ((mp.j if odd else 1) * mp.sqrt(q))
    coeffs = [prim(n).as_int() if prim.is_real() else prim(n).to_mpc(precision) for n in range(1, n_terms + 1)]
    dual = None if prim.is_real() else [mp.conj(c) for c in coeffs]
    return LFunctionSpec(
        name=f"L({prim.label()})",
        coefficients=coeffs,
        gamma_kind="R",
        shifts=[1 if odd else 0],
        conductor=q,
        weight=0,
        epsilon=eps,
        dual_coefficients=dual,
    )


def newform_spec(f: Newform, n_terms: Optional[int] = None, epsilon=None, precision: int = 128) -> LFunctionSpec:
    """L(f, s) with Lambda(s) = N^(s/2) Gamma_C(s) L(f, s) = eps Lambda(f*, k + 2 - s)."""
    n_terms = n_terms or series_length(2, f.level, f.k + 1, precision, 1.25)
    dual = dual_form(f)
    return LFunctionSpec(
        name=f"L({f.label})",
        coefficients=f.coefficients(n_terms),
        gamma_kind="C",
        shifts=[0],
        conductor=f.level,
        weight=f.k + 1,
        epsilon=epsilon,
        dual_coefficients=None if dual is f else dual.coefficients(n_terms),
    )


def rankin_spec_lfunction(
    f: Newform,
    g: Newform,
    conductor: Optional[int] = None,
    bad_factors: Optional[EulerFactorSet] = None,
    n_terms: Optional[int] = None,
    precision: int = 128,
    dual_pair: Optional[bool] = None,
) -> LFunctionSpec:
    """
    L(f x g, s) with gamma factor Gamma_C(s) Gamma_C(s - k - 1) (k <= l),
    weight k + l + 2 and reflection s -> k + l + 3 - s.

    The conductor defaults to N_f^2 N_g^2 for coprime levels and must be
    supplied otherwise. When g is the dual of f the completed function has
    simple poles at k + 2 and k + 1 whose residues are left to the
    functional-equation test.
    """
    if conductor is None:
        if gcd(f.level, g.level) != 1:
            raise ConfigError(f"levels {f.level}, {g.level} share a factor; supply the conductor")
        conductor = f.level ** 2 * g.level ** 2
    k = min(f.k, g.k)
    weight = f.k + g.k + 2
    n_terms = n_terms or series_length(4, conductor, weight, precision, 1.25)
    level = f.level * g.level // gcd(f.level, g.level)
    coeffs = tensor_coefficients(RankinSpec(f, g, 0, level), n_terms, bad_factors)[1:]
    fd, gd = dual_form(f), dual_form(g)
    dual = None
    if fd is not f or gd is not g:
        dual_bad = bad_factors.conjugate() if bad_factors is not None else None
        dual = tensor_coefficients(RankinSpec(fd, gd, 0, level), n_terms, dual_bad)[1:]
    if dual_pair is None:
        dual_pair = is_dual_pair(f, g)
    poles = [Pole(k + 2), Pole(k + 1)] if dual_pair else []
    LOGGER.info("L(%s x %s): Q = %d, %d coefficients", f.label, g.label, conductor, n_terms)
    return LFunctionSpec(
        name=f"L({f.label} x {g.label})",
        coefficients=coeffs,
        gamma_kind="C",
        shifts=[0, -(k + 1)],
        conductor=conductor,
        weight=weight,
        dual_coefficients=dual,
        poles=poles,
    )
