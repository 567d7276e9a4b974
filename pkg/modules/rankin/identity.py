# modules/rankin/identity.py
"""
The series identity

    L(chi, 2s - k - l - 2) D(f, g, s) = R_{f,g,N}(s) L(f x g, s),

checked coefficient by coefficient and numerically at a point of absolute
convergence. L(f x g, s) is generated from its Euler product, D from the
raw coefficient products, so the two sides share nothing but the forms.
"""

import logging
from dataclasses import dataclass, field
from math import isqrt
from typing import Any, Dict, List, Optional

import mpmath as mp
import numpy as np

from modules.arith.dirichlet_l import dirichlet_L
from modules.errors import OutsideConvergence
from modules.rankin.automorphic import AutomorphicFactor, RankinSpec, automorphic_R
from modules.rankin.convolution import convergence_abscissa, convolution_D
from modules.rankin.euler import EulerFactorSet, Number, char_value, is_zero, local_euler_factor, series_inverse, to_complex

LOGGER = logging.getLogger(__name__)


def _smallest_prime_factors(n_max: int) -> np.ndarray:
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in range(2, n_max + 1):
        if spf[p] == 0:
            spf[p:: p][spf[p:: p] == 0] = p
    return spf


def tensor_coefficients(spec: RankinSpec, n_max: int, bad_factors: Optional[EulerFactorSet] = None) -> List[Number]:
    """
    Dirichlet coefficients b_1..b_{n_max} of L(f x g, s), index 0 unused.
    """
    spf = _smallest_prime_factors(n_max)
    local: Dict[int, List[Number]] = {}
    b: List[Number] = [0] * (n_max + 1)
    b[1] = 1
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m, r = n, 0
        while m % p == 0:
            m //= p
            r += 1
        if p not in local:
            depth = 1
            while p ** (depth + 1) <= n_max:
                depth += 1
            euler, _ = local_euler_factor(spec.f, spec.g, p, bad_factors, spec.exact)
            local[p] = series_inverse(euler, depth + 1)
        b[n] = b[m] * local[p][r]
    return b


def _close(x: Number, y: Number, exact: bool, rel: float = 1e-20) -> bool:
    if exact:
        return is_zero(x - y)
    x, y = to_complex(x), to_complex(y)
    return abs(x - y) <= rel * max(1, abs(x), abs(y))


@dataclass
class IdentityCheck:
    spec: Dict[str, Any]
    n_max: int
    formal_ok: bool
    first_mismatch: Optional[int] = None
    s: Optional[str] = None
    lhs: Optional[mp.mpc] = None
    rhs: Optional[mp.mpc] = None
    tail_bound: Optional[mp.mpf] = None
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def residual(self) -> Optional[mp.mpf]:
        if self.lhs is None:
            return None
        return abs(self.lhs - self.rhs)

    def to_dict(self) -> Dict[str, Any]:
        out = {"spec": self.spec, "n_max": self.n_max, "formal_ok": self.formal_ok, "first_mismatch": self.first_mismatch}
        if self.lhs is not None:
            out.update({
                "s": self.s,
                "lhs": [mp.nstr(self.lhs.real, 25), mp.nstr(self.lhs.imag, 25)],
                "rhs": [mp.nstr(self.rhs.real, 25), mp.nstr(self.rhs.imag, 25)],
                "residual": mp.nstr(self.residual, 5),
                "tail_bound": mp.nstr(self.tail_bound, 5),
            })
        out.update(self.details)
        return out


def formal_identity(spec: RankinSpec, n_max: int, R: AutomorphicFactor, b: List[Number]) -> Optional[int]:
    """First n <= n_max where the coefficients of the two sides differ, or None."""
    exact = spec.exact
    # coefficients read from doubles cannot meet the 128-bit tolerance
    rel = max(1e-20, 2.0 ** (16 - min(spec.f.precision, spec.g.precision)))
    chi = spec.chi
    weight = spec.k + spec.l + 2
    r_coeffs = R.dirichlet_coefficients()
    fa, ga = spec.f.coefficients(n_max), spec.g.coefficients(n_max)
    for n in range(1, n_max + 1):
        lhs: Number = 0
        for d in range(1, isqrt(n) + 1):
            if n % (d * d):
                continue
            c = char_value(chi, d, exact)
            if is_zero(c):
                continue
            m = n // (d * d)
            lhs = lhs + c * d ** weight * fa[m - 1] * ga[m - 1]
        rhs: Number = 0
        for r, c in r_coeffs.items():
            if n % r == 0:
                rhs = rhs + c * b[n // r]
        if not _close(lhs, rhs, exact, rel):
            LOGGER.warning("formal identity fails at n = %d", n)
            return n
    return None


def series_identity_check(
    spec: RankinSpec,
    s=None,
    n_max: int = 1000,
    bad_factors: Optional[EulerFactorSet] = None,
    precision: int = 128,
) -> IdentityCheck:
    """
    Formal check over n <= n_max and, when s is given, both sides summed to
    n_max at s.

    Raises:
        OutsideConvergence: Re(s) not in the region of absolute convergence
    """
    R = automorphic_R(spec, bad_factors)
    b = tensor_coefficients(spec, n_max, bad_factors)
    mismatch = formal_identity(spec, n_max, R, b)
    check = IdentityCheck(spec.to_dict(), n_max, mismatch is None, mismatch)
    if s is None:
        return check
    with mp.workprec(precision + 10):
        s = mp.mpmathify(s)
        if mp.re(s) <= convergence_abscissa(spec.f, spec.g):
            raise OutsideConvergence(f"Re(s) = {mp.nstr(mp.re(s), 8)} outside the region of convergence")
        d_value = convolution_D(spec.f, spec.g, s, n_max, precision)
        l_chi = dirichlet_L(spec.chi, 2 * s - spec.k - spec.l - 2, precision)
        tensor = mp.mpc(0)
        for n in range(1, n_max + 1):
            if not is_zero(b[n]):
                tensor += to_complex(b[n], precision + 10) * mp.power(n, -s)
        r_value = R.evaluate(s, precision + 10)
        check.s = mp.nstr(s, 15)
        check.lhs = l_chi * d_value.value
        check.rhs = r_value * tensor
        check.tail_bound = abs(l_chi) * d_value.tail_bound
        check.details["R(s)"] = [mp.nstr(r_value.real, 20), mp.nstr(r_value.imag, 20)]
    LOGGER.info("series identity at s = %s: residual %s", check.s, mp.nstr(check.residual, 5))
    return check
