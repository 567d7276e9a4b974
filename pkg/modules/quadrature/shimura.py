# modules/quadrature/shimura.py
"""
Both sides of the unfolding identity

    int_{Gamma_0(N)\\H} f(tau) g(-conj tau) E_{l-k,N}(tau, s-1-l, chi) y^(s-1) dx dy
        = 2 (4 pi)^-s Gamma(s) L(chi, 2s - k - l - 2) D(f, g, s)

with chi = chi_f chi_g mod N, f of weight k + 2 and g of weight l + 2.
"""

import logging
import time
from typing import Optional

import mpmath as mp
import numpy as np

from modules.arith.characters import DirichletCharacter
from modules.arith.dirichlet_l import dirichlet_L
from modules.errors import UnsupportedContinuationPoint
from modules.forms.newform import Newform
from modules.quadrature.cosets import FundamentalDomainSpec, Matrix
from modules.quadrature.integrate import IntegrationResult, integrate_modular
from modules.quadrature.kernels import TwistedSum, apply, eisenstein_kernel
from modules.rankin.convolution import convolution_D
from modules.report import VerificationReport

LOGGER = logging.getLogger(__name__)


def _lcm(a: int, b: int) -> int:
    return a * b // np.gcd(a, b)


class PairIntegrand:
    """
    f(tau) g(-conj tau) G(tau) Im(tau)^y_power for a vectorised Eisenstein
    factor G; the shape of both the Shimura and the regulator integrands.
    """

    def __init__(self, f: Newform, g: Newform, eisenstein: TwistedSum, y_power: float):
        self.f = f
        self.g = g
        self.eisenstein = eisenstein
        self.y_power = y_power

    def _cusp_part(self, tau: np.ndarray) -> np.ndarray:
        return self.f.q_expansion(tau) * self.g.q_expansion(-np.conj(tau)) * tau.imag ** self.y_power

    def __call__(self, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        return self._cusp_part(tau) * self.eisenstein(tau)

    def pullback(self, gamma: Matrix, tau) -> np.ndarray:
        tau = np.atleast_1d(np.asarray(tau, dtype=np.complex128))
        return self._cusp_part(apply(gamma, tau)) * self.eisenstein.pullback(gamma, tau)


def shimura_character(f: Newform, g: Newform, n: int) -> DirichletCharacter:
    return f.character.induce(n) * g.character.induce(n)


def shimura_integrand(f: Newform, g: Newform, n: int, s: int) -> PairIntegrand:
    """
    Raises:
        UnsupportedContinuationPoint: s - 1 - l is not a positive integer in
            the convergent range of E_{l-k,N}
    """
    if f.k > g.k:
        raise ValueError(f"order the pair by weight: k = {f.k} > l = {g.k}")
    if int(s) != s:
        raise UnsupportedContinuationPoint(f"the Shimura integrand needs an integer s, got {s}")
    s = int(s)
    w, t = g.k - f.k, s - 1 - g.k
    if t < 1 or w + 2 * t <= 2:
        raise UnsupportedContinuationPoint(f"E_({w},{n}) at s - 1 - l = {t} is outside the convergent range")
    kernel = eisenstein_kernel(w, n, t, shimura_character(f, g, n))
    return PairIntegrand(f, g, kernel, s - 1)


def shimura_lhs(
    f: Newform,
    g: Newform,
    s: int,
    n: Optional[int] = None,
    domain: Optional[FundamentalDomainSpec] = None,
) -> IntegrationResult:
    """The integral over Gamma_0(N)\\H in the dx dy measure."""
    n = n or _lcm(f.level, g.level)
    domain = domain or FundamentalDomainSpec(level=n)
    integrand = shimura_integrand(f, g, n, s)
    LOGGER.info("Shimura integral for %s x %s at s = %s over %d cosets", f.label, g.label, s, len(domain.cosets))
    # f g decays like exp(-4 pi y)
    return integrate_modular(integrand, domain, decay_hint=2.0)


def shimura_rhs(f: Newform, g: Newform, s, n: Optional[int] = None, precision: int = 128, n_max: int = 4000):
    """
    2 (4 pi)^-s Gamma(s) L(chi, 2s - k - l - 2) D(f, g, s); returns (value, D tail bound).
    """
    n = n or _lcm(f.level, g.level)
    chi = shimura_character(f, g, n)
    with mp.workprec(precision):
        d = convolution_D(f, g, s, n_max=n_max, precision=precision)
        scale = 2 * mp.power(4 * mp.pi, -s) * mp.gamma(s) * dirichlet_L(chi, 2 * s - f.k - g.k - 2, precision)
        return scale * d.value, abs(scale) * d.tail_bound


def verify_shimura(
    f: Newform,
    g: Newform,
    s: int,
    n: Optional[int] = None,
    domain: Optional[FundamentalDomainSpec] = None,
    precision: int = 128,
    tolerance: float = 1e-6,
    rhs_shift: int = 0,
) -> VerificationReport:
    """
    Integral against the L-series product. rhs_shift moves the right-hand
    point away from s, which the CLI uses to exercise the failure path.
    """
    started = time.monotonic()
    n = n or _lcm(f.level, g.level)
    integral = shimura_lhs(f, g, s, n, domain)
    rhs, d_tail = shimura_rhs(f, g, s + rhs_shift, n, precision)
    report = VerificationReport(
        identity="shimura",
        lhs=mp.mpc(integral.value),
        rhs=rhs,
        tolerance=tolerance,
        parameters={"f": f.label, "g": g.label, "N": n, "s": s},
        runtime=time.monotonic() - started,
        precision=precision,
        details={"quadrature": integral.to_dict(), "d_tail_bound": mp.nstr(d_tail, 5)},
    )
    LOGGER.info("Shimura %s x %s: rel_err %s", f.label, g.label, mp.nstr(report.rel_err, 5))
    return report
