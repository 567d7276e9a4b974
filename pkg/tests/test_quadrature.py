import numpy as np
import pytest

from modules.arith.characters import DirichletCharacter
from modules.eisenstein.series import gamma_E_limit, series_ENw
from modules.errors import ConfigError, InvarianceCheckFailed, TruncationDominates, UnsupportedContinuationPoint
from modules.quadrature.cosets import (
    FundamentalDomainSpec,
    coset_representatives,
    index_gamma0,
    p1_class,
)
from modules.quadrature.integrate import integrate_modular
from modules.quadrature.kernels import apply, eisenstein_kernel, gamma_limit_kernel
from modules.quadrature.shimura import shimura_integrand, verify_shimura

PETERSSON_DELTA = 1.035362056804320922e-6


def ones(tau):
    return np.ones(tau.shape)


@pytest.mark.parametrize("n", range(1, 61))
def test_coset_count_and_classes(n):
    cosets = coset_representatives(n)
    assert len(cosets) == index_gamma0(n)
    assert len({c.p1 for c in cosets}) == len(cosets)
    for coset in cosets:
        (a, b), (c, d) = coset.matrix
        assert a * d - b * c == 1
        if n > 1:
            assert p1_class(c, d, n) == coset.p1


def test_index_formula_examples():
    assert [index_gamma0(n) for n in (1, 2, 4, 6, 11, 12)] == [1, 3, 6, 12, 12, 24]


def test_cusp_widths_at_prime_level():
    widths = sorted(c.width for c in coset_representatives(11))
    assert widths == [1] + [11] * 11


def test_hyperbolic_area_of_truncated_domain():
    domain = FundamentalDomainSpec(level=1, truncation=8)
    result = integrate_modular(ones, domain, decay_hint=None, measure="hyperbolic")
    assert abs(result.value - (np.pi / 3 - 1 / 8)) < 1e-12


def test_hyperbolic_area_scales_with_index():
    domain = FundamentalDomainSpec(level=6, truncation=8)
    result = integrate_modular(ones, domain, decay_hint=None, measure="hyperbolic")
    assert len(result.per_coset) == 12
    assert abs(result.value - 12 * (np.pi / 3 - 1 / 8)) < 1e-11


def test_euclidean_area_of_truncated_domain():
    domain = FundamentalDomainSpec(level=1, truncation=8)
    result = integrate_modular(ones, domain, decay_hint=None, check_invariance=False)
    assert abs(result.value - (8 - np.pi / 6 - np.sqrt(3) / 4)) < 1e-12


def test_odd_integrand_vanishes():
    def odd(tau):
        return tau.real * np.exp(-tau.imag)

    domain = FundamentalDomainSpec(level=1)
    result = integrate_modular(odd, domain, decay_hint=1 / (2 * np.pi), check_invariance=False)
    assert abs(result.value) < 1e-12
    assert result.truncation > 8


def test_non_invariant_integrand_is_rejected():
    with pytest.raises(InvarianceCheckFailed):
        integrate_modular(lambda tau: tau.imag, FundamentalDomainSpec(level=3), measure="hyperbolic")


def test_slow_decay_is_reported():
    with pytest.raises(TruncationDominates):
        integrate_modular(ones, FundamentalDomainSpec(level=1), decay_hint=1.0, measure="hyperbolic")



def test_pooled_panels_match_serial(form_11a):
    integrand = shimura_integrand(form_11a, form_11a, 11, 5)
    results = [
        integrate_modular(integrand, FundamentalDomainSpec(level=11, tolerance=1e-5, order=8, workers=workers), decay_hint=2.0)
        for workers in (1, 4)
    ]
    serial, pooled = results
    assert pooled.per_coset == serial.per_coset
    assert pooled.panels == serial.panels
    assert pooled.details["evaluations"] == serial.details["evaluations"]


def test_worker_count_is_validated():
    with pytest.raises(ConfigError):
        FundamentalDomainSpec(level=1, workers=0)

def test_petersson_norm_of_delta(delta):
    def norm(tau):
        return np.abs(delta.q_expansion(tau)) ** 2 * tau.imag ** 10

    low = integrate_modular(norm, FundamentalDomainSpec(level=1, truncation=6), decay_hint=2.0)
    high = integrate_modular(norm, FundamentalDomainSpec(level=1, truncation=10), decay_hint=2.0)
    assert abs(low.value - high.value) < 1e-10 * abs(high.value)
    assert abs(high.value - PETERSSON_DELTA) < 1e-8 * PETERSSON_DELTA
    assert high.details["invariance_violation"] < 1e-8


def test_eisenstein_kernel_matches_lattice_series():
    tau = 0.13 + 1.07j
    trivial = DirichletCharacter.trivial()
    kernel = eisenstein_kernel(0, 1, 3, trivial)(np.array([tau]))[0]
    reference = complex(series_ENw(0, 1, tau, 3, trivial, precision=64).value)
    assert abs(kernel - reference) < 1e-12 * abs(reference)


def test_gamma_limit_kernel_matches_lattice_series():
    tau = -0.21 + 0.93j
    chi = DirichletCharacter.from_conrey(7, 6)
    kernel = gamma_limit_kernel(1, 7, chi, -1)(np.array([tau]))[0]
    reference = complex(gamma_E_limit(1, 7, tau, chi, -1, precision=64).value)
    assert abs(kernel - reference) < 1e-11 * abs(reference)


def test_kernel_pullback_is_the_value_at_the_image():
    chi = DirichletCharacter.from_conrey(7, 6)
    kernel = gamma_limit_kernel(1, 7, chi, -1)
    tau = np.array([0.1 + 1.2j, -0.3 + 0.95j])
    for gamma in (((0, -1), (1, 2)), ((1, 0), (3, 1)), ((2, 1), (7, 4))):
        direct = kernel(apply(gamma, tau))
        pulled = kernel.pullback(gamma, tau)
        assert np.max(np.abs(direct - pulled) / np.abs(direct)) < 1e-10


def test_shimura_integrand_range(delta):
    with pytest.raises(UnsupportedContinuationPoint):
        shimura_integrand(delta, delta, 1, 12)
    with pytest.raises(UnsupportedContinuationPoint):
        shimura_integrand(delta, delta, 1, 14.5)


@pytest.mark.slow
def test_shimura_identity_level_one(delta):
    report = verify_shimura(delta, delta, 14, precision=96)
    assert report.sign == 1
    assert report.rel_err < 1e-6


@pytest.mark.slow
def test_shimura_identity_level_eleven(form_11a):
    report = verify_shimura(form_11a, form_11a, 5, precision=96)
    assert report.passed
    assert len(report.details["quadrature"]["per_coset"]) == 12
