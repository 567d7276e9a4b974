# modules/regulator/formula.py
"""
Both sides of the regulator formula for a pair f, g of weights k + 2 <= l + 2
and 0 <= j <= k:

    lhs = C2 N phi(N)^2 / (2 (2 pi i)^(k+l-j+1))
            lim_{s -> -l'} Gamma(s + l - k)
            int_{Gamma_0(N)\\H} f*(tau) g*(-conj tau) E_{l-k,N}(tau, s, conj chi) y^(s+l) dx dy

    rhs = (2 pi i)^(k+l-2j) (k+l-2j+2) j! phi(N)^2 / (2 N^(k+l-2j))
            R_{f*,g*,N}(j + 1) L'(f* x g*, j + 1)

with chi = chi_f chi_g. The two agree up to a sign that is resolved
numerically and reported.
"""

import logging
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Optional

import mpmath as mp

from modules.errors import AutomorphicFactorVanishes, ConfigError, TrivialCharacter
from modules.forms.newform import Newform, dual_form
from modules.lfunc.afe import CompletedLFunction, LValue
from modules.lfunc.spec import rankin_spec_lfunction
from modules.quadrature.cosets import FundamentalDomainSpec
from modules.quadrature.integrate import IntegrationResult, integrate_modular
from modules.quadrature.kernels import gamma_limit_kernel
from modules.quadrature.shimura import PairIntegrand
from modules.rankin.automorphic import RankinSpec, automorphic_R, predicted_nonvanishing
from modules.rankin.euler import EulerFactorSet
from modules.regulator.constants import lhs_constant, pairing_t_omega, rhs_constant
from modules.report import VerificationReport

LOGGER = logging.getLogger(__name__)


@dataclass
class RegulatorJob:
    """
    One verification of the regulator formula.

    Args:
        spec: the pair, j and the level N
        precision: bits for the L-function side
        domain: quadrature controls; default from the level
        conductor: conductor of L(f x g); required when the levels share a factor
        bad_factors: local Euler factors of L(f x g) at bad primes (user or database)
        tolerance: relative tolerance for the report
        beta_scale: rational multiple of the divisor beta_chi
    """

    spec: RankinSpec
    precision: int = 128
    domain: Optional[FundamentalDomainSpec] = None
    conductor: Optional[int] = None
    bad_factors: Optional[EulerFactorSet] = None
    tolerance: float = 1e-3
    beta_scale: Fraction = Fraction(1)

    def __post_init__(self):
        spec = self.spec
        if spec.k > spec.l:
            raise ConfigError(f"order the pair by weight: k = {spec.k} > l = {spec.l}")
        if spec.chi.is_trivial():
            raise TrivialCharacter("chi_f chi_g is trivial; the formula assumes chi != 1")
        # raises ParityMismatch on inconsistent nebentypus
        pairing_t_omega(spec.k, spec.l, spec.j, spec.f.character, spec.g.character, 53)
        if self.domain is None:
            self.domain = FundamentalDomainSpec(level=spec.level)
        elif self.domain.level != spec.level:
            raise ConfigError(f"quadrature domain has level {self.domain.level}, job has N = {spec.level}")
        self.beta_scale = Fraction(self.beta_scale)

    @classmethod
    def from_forms(cls, f: Newform, g: Newform, j: int, level: Optional[int] = None, **kwargs) -> "RegulatorJob":
        return cls(RankinSpec(f, g, j, level), **kwargs)

    def dual(self) -> "RegulatorJob":
        """The same job for the pair (f*, g*)."""
        spec = RankinSpec(dual_form(self.spec.f), dual_form(self.spec.g), self.spec.j, self.spec.level)
        return replace(self, spec=spec)

    def to_dict(self) -> Dict[str, Any]:
        return {
            **self.spec.to_dict(),
            "chi": self.spec.chi.label(),
            "precision": self.precision,
            "conductor": self.conductor,
            "beta_scale": str(self.beta_scale),
            "quadrature": self.domain.to_dict(),
        }


@dataclass
class LhsResult:
    value: mp.mpc
    constant: mp.mpc
    integral: IntegrationResult

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": [mp.nstr(self.value.real, 20), mp.nstr(self.value.imag, 20)],
            "constant": [mp.nstr(self.constant.real, 20), mp.nstr(self.constant.imag, 20)],
            "integral": self.integral.to_dict(),
        }


@dataclass
class RhsResult:
    value: mp.mpc
    constant: mp.mpc
    automorphic: mp.mpc
    derivative: LValue
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": [mp.nstr(self.value.real, 20), mp.nstr(self.value.imag, 20)],
            "constant": [mp.nstr(self.constant.real, 20), mp.nstr(self.constant.imag, 20)],
            "R": [mp.nstr(self.automorphic.real, 20), mp.nstr(self.automorphic.imag, 20)],
            "L_derivative": self.derivative.to_dict(),
            **self.details,
        }


def regulator_integrand(job: RegulatorJob) -> PairIntegrand:
    """f*(tau) g*(-conj tau) lim Gamma(s + l - k) E_{l-k,N}(tau, s, conj chi) y^j at s = -l'."""
    spec = job.spec
    kernel = gamma_limit_kernel(spec.l - spec.k, spec.level, spec.chi.conj(), -spec.l_prime)
    return PairIntegrand(dual_form(spec.f), dual_form(spec.g), kernel, spec.j)


def regulator_lhs(job: RegulatorJob, integral: Optional[IntegrationResult] = None) -> LhsResult:
    """
    The prefactored integral. A previous IntegrationResult for the same
    pair can be passed to rescale without integrating again.
    """
    spec = job.spec
    if integral is None:
        LOGGER.info("regulator integral for %s x %s, j = %d, N = %d", spec.f.label, spec.g.label, spec.j, spec.level)
        integral = integrate_modular(regulator_integrand(job), job.domain, decay_hint=2.0)
    with mp.workprec(job.precision):
        scale = mp.mpf(job.beta_scale.numerator) / job.beta_scale.denominator
        constant = lhs_constant(spec.k, spec.l, spec.j, spec.level, job.precision) * scale
        return LhsResult(constant * mp.mpc(integral.value), constant, integral)


def regulator_rhs(job: RegulatorJob, lfunction: Optional[CompletedLFunction] = None) -> RhsResult:
    """
    The L-value side, sign left open.

    Raises:
        AutomorphicFactorVanishes: R_{f*,g*,N}(j + 1) = 0, where the formula
            gives no information about L'(f* x g*, j + 1)
    """
    spec = job.spec
    fd, gd = dual_form(spec.f), dual_form(spec.g)
    dual_spec = RankinSpec(fd, gd, spec.j, spec.level)
    # supplied factors refer to (f, g)
    dual_bad = job.bad_factors.conjugate() if job.bad_factors is not None else None
    R = automorphic_R(dual_spec, dual_bad)
    with mp.workprec(job.precision):
        r_value = R.evaluate(spec.j + 1, job.precision)
        if abs(r_value) < mp.mpf(2) ** (20 - job.precision):
            raise AutomorphicFactorVanishes(
                f"R_(f*,g*,{spec.level})({spec.j + 1}) = 0: k + l - 2j = {spec.k + spec.l - 2 * spec.j}, "
                "the regulator formula says nothing about L' here"
            )
    if lfunction is None:
        lspec = rankin_spec_lfunction(fd, gd, job.conductor, dual_bad, precision=job.precision)
        lfunction = CompletedLFunction(lspec, precision=job.precision)
    derivative = lfunction.derivative(spec.j + 1)
    with mp.workprec(job.precision):
        constant = rhs_constant(spec.k, spec.l, spec.j, spec.level, job.precision)
        value = constant * r_value * derivative.value
    return RhsResult(
        value=value,
        constant=constant,
        automorphic=r_value,
        derivative=derivative,
        details={
            "R_factors": R.to_dict()["factors"],
            "predicted_nonvanishing": predicted_nonvanishing(spec.k, spec.l, spec.j),
        },
    )


def verify_regulator(job: RegulatorJob, lfunction: Optional[CompletedLFunction] = None) -> VerificationReport:
    """Both sides with the sign resolved; failures of the comparison are reported, not raised."""
    started = time.monotonic()
    # R(j + 1) = 0 is caught here, before any integration
    rhs = regulator_rhs(job, lfunction)
    lhs = regulator_lhs(job)
    spec = job.spec
    with mp.workprec(job.precision):
        pairing = pairing_t_omega(spec.k, spec.l, spec.j, spec.f.character, spec.g.character, job.precision)
    report = VerificationReport.resolved(
        "regulator",
        lhs.value,
        rhs.value,
        tolerance=job.tolerance,
        parameters=job.to_dict(),
        runtime=time.monotonic() - started,
        precision=job.precision,
        details={
            "lhs": lhs.to_dict(),
            "rhs": rhs.to_dict(),
            "pairing_t_omega": [mp.nstr(mp.re(pairing), 20), mp.nstr(mp.im(pairing), 20)],
            "parity_class": [spec.k % 2, spec.l % 2, spec.j % 2],
        },
    )
    LOGGER.info("regulator %s x %s: sign %+d, rel_err %s", spec.f.label, spec.g.label, report.sign, mp.nstr(report.rel_err, 5))
    return report
