from dataclasses import replace
from fractions import Fraction

import mpmath as mp
import pytest
from sympy import totient

from modules.arith.characters import DirichletCharacter
from modules.errors import AutomorphicFactorVanishes, ConfigError, ParityMismatch, TrivialCharacter
from modules.forms.lmfdb_client import fetch_euler_factors, fetch_lmfdb
from modules.forms.newform import dual_form
from modules.lfunc.afe import CompletedLFunction, conductor_scan
from modules.lfunc.spec import rankin_spec_lfunction
from modules.quadrature.cosets import FundamentalDomainSpec
from modules.quadrature.integrate import IntegrationResult
from modules.regulator.constants import (
    constant_C1,
    constant_C2,
    lhs_constant,
    pairing_t_omega,
    rhs_constant,
)
from modules.regulator.formula import RegulatorJob, regulator_lhs, regulator_rhs, verify_regulator
from modules.report import VerificationReport, resolve_sign


def test_C1_at_the_origin():
    assert abs(constant_C1(0, 0, 0) + (2j * mp.pi) ** 2) < 1e-30


def test_C2_at_the_origin():
    for n in (3, 7, 13):
        assert abs(constant_C2(0, 0, 0, n) - 2j / n * constant_C1(0, 0, 0)) < 1e-30


@pytest.mark.parametrize("k,l,j", [(0, 0, 0), (0, 1, 0), (1, 1, 0), (1, 1, 1), (2, 5, 1), (3, 3, 2)])
def test_C1_phase_follows_parity(k, l, j):
    c = constant_C1(k, l, j)
    if (k + l) % 2 == 0:
        assert abs(c.imag) < 1e-30 * abs(c)
    else:
        assert abs(c.real) < 1e-30 * abs(c)


def test_constants_reject_bad_range():
    with pytest.raises(ValueError):
        constant_C1(2, 1, 0)
    with pytest.raises(ValueError):
        constant_C2(1, 2, 2, 5)


def test_pairing_examples():
    trivial = DirichletCharacter.trivial()
    assert pairing_t_omega(0, 0, 0, trivial, trivial) == -1
    odd = DirichletCharacter.from_conrey(5, 2)
    value = pairing_t_omega(1, 1, 0, odd, odd)
    assert abs(value + 25 * (2j * mp.pi) ** 2) < 1e-25


def test_pairing_parity_rule():
    with pytest.raises(ParityMismatch):
        pairing_t_omega(0, 0, 0, DirichletCharacter.from_conrey(5, 2), DirichletCharacter.trivial())


def test_rhs_constant_at_the_origin():
    for n in (5, 12, 13):
        assert rhs_constant(0, 0, 0, n) == int(totient(n)) ** 2


def test_resolve_sign():
    assert resolve_sign(2, -2.001) == -1
    assert resolve_sign(2, 1.9) == 1
    report = VerificationReport.resolved("x", mp.mpf(1), mp.mpf(-1.0005), tolerance=1e-3)
    assert report.sign == -1 and report.passed
    assert report.to_dict()["schema_version"] == 1


def test_trivial_character_is_rejected(delta):
    with pytest.raises(TrivialCharacter):
        RegulatorJob.from_forms(delta, delta, 0)


def test_pair_must_be_ordered_by_weight(delta, form_7_3):
    with pytest.raises(ConfigError):
        RegulatorJob.from_forms(delta, form_7_3, 0)


def test_vanishing_pair(fixture_cache, form_3_8):
    form_39 = fetch_lmfdb("39.8.5a", 10, fixture_cache, offline=True)
    job = RegulatorJob.from_forms(form_39, form_3_8, 6)
    with pytest.raises(AutomorphicFactorVanishes):
        regulator_rhs(job)


def test_lhs_is_linear_in_beta(form_7_3, delta):
    job = RegulatorJob.from_forms(form_7_3, delta, 0)
    integral = IntegrationResult(1.25 - 0.5j, 1e-12, [1.25 - 0.5j], 8.0, 0.0, 1)
    base = regulator_lhs(job, integral)
    scaled = regulator_lhs(replace(job, beta_scale=Fraction(-3, 7)), integral)
    assert abs(scaled.value + base.value * 3 / 7) < 1e-30 * abs(base.value)
    assert abs(base.constant - lhs_constant(1, 10, 0, 7)) < 1e-30 * abs(base.constant)


@pytest.mark.slow
def test_rhs_under_level_raising(form_7_3, delta):
    lspec = rankin_spec_lfunction(form_7_3, delta, precision=96)
    lfunction = CompletedLFunction(lspec, precision=96)
    base = regulator_rhs(RegulatorJob.from_forms(form_7_3, delta, 0, precision=96), lfunction)
    raised = regulator_rhs(RegulatorJob.from_forms(form_7_3, delta, 0, level=14, precision=96), lfunction)
    # phi(14)^2 / phi(7)^2 = 1, (7/14)^(k+l) and the new factor at 2
    expected = base.value * mp.power(2, -11) * (1 - mp.power(2, 11))
    assert abs(raised.value - expected) < 1e-6 * abs(expected)


@pytest.mark.slow
def test_regulator_formula_weight_three_pair(form_7_3, delta):
    job = RegulatorJob.from_forms(form_7_3, delta, 0, precision=96)
    report = verify_regulator(job)
    assert report.rel_err < 1e-3
    finer = replace(job, domain=FundamentalDomainSpec.from_effort(7, 2))
    again = verify_regulator(finer)
    assert again.rel_err < 1e-4
    assert again.sign == report.sign
    assert report.details["rhs"]["predicted_nonvanishing"] is True


@pytest.mark.slow
def test_sign_is_stable_within_parity_class(form_7_3, delta, form_3_8):
    first = verify_regulator(RegulatorJob.from_forms(form_7_3, delta, 0, precision=96))
    second = verify_regulator(RegulatorJob.from_forms(form_7_3, form_3_8, 0, precision=96))
    assert first.details["parity_class"] == second.details["parity_class"]
    assert first.sign == second.sign
    assert second.rel_err < 1e-3


@pytest.mark.slow
def test_sextic_level_thirteen_pair(fixture_cache):
    f = fetch_lmfdb("13.2.e.a", 6000, fixture_cache, offline=True)
    database = fetch_euler_factors("13.2.e.a", "13.2.e.a", fixture_cache, offline=True)
    fd = dual_form(f)
    lspec = rankin_spec_lfunction(fd, fd, conductor=13 ** 3, bad_factors=database.conjugate(), precision=96)
    rows = conductor_scan(lspec, [13 ** 2, 13 ** 3, 13 ** 4])
    conductor = min((row for row in rows if "residual" in row), key=lambda row: mp.mpf(row["residual"]))["conductor"]
    assert conductor == 13 ** 3
    job = RegulatorJob.from_forms(f, f, 0, conductor=conductor, bad_factors=database, precision=96)
    report = verify_regulator(job)
    assert report.rel_err < 1e-3
    dual = job.dual()
    integral = regulator_lhs(job).integral
    dual_integral = regulator_lhs(dual).integral
    assert abs(dual_integral.value - integral.value.conjugate()) < 1e-6 * abs(integral.value)
