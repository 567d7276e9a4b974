import mpmath as mp
import pytest

from modules.arith.characters import DirichletCharacter
from modules.arith.dirichlet_l import dirichlet_L
from modules.errors import FunctionalEquationInvalid, NotEnoughCoefficients, PoleEncountered
from modules.lfunc.afe import CompletedLFunction, conductor_scan, fe_selftest, l_derivative, l_value
from modules.lfunc.spec import LFunctionSpec, dirichlet_spec, newform_spec, rankin_spec_lfunction, zeta_spec
from modules.rankin.convolution import convolution_D


def rel(x, y):
    return abs(x - y) / max(abs(y), mp.mpf(10) ** -40)


def test_zeta_value():
    assert rel(l_value(zeta_spec(), 2).value, mp.pi ** 2 / 6) < 1e-20


def test_zeta_selftest_and_injected_conductor():
    assert fe_selftest(zeta_spec()).residual < 1e-25
    wrong = zeta_spec()
    wrong.conductor = 2
    assert fe_selftest(wrong).residual > 1e-4
    with pytest.raises(FunctionalEquationInvalid):
        l_value(wrong, 2)


def test_conductor_scan_prefers_the_true_conductor():
    rows = conductor_scan(zeta_spec(), [1, 2, 3])
    residuals = {row["conductor"]: mp.mpf(row["residual"]) for row in rows}
    assert min(residuals, key=residuals.get) == 1


def test_zeta_derivative():
    result = l_derivative(zeta_spec(), 2)
    expected = -mp.nsum(lambda n: mp.log(n) / n ** 2, [2, mp.inf])
    assert rel(result.value, expected) < 1e-10
    assert result.details["gamma_pole_order"] == 0


def test_zeta_trivial_zero():
    zeta = CompletedLFunction(zeta_spec())
    assert zeta.value(-2).value == 0
    derivative = zeta.derivative(-2)
    assert derivative.details["gamma_pole_order"] == 1
    assert rel(derivative.value, -mp.zeta(3) / (4 * mp.pi ** 2)) < 1e-15


def test_zeta_pole():
    with pytest.raises(PoleEncountered):
        l_value(zeta_spec(), 1)


def test_too_few_coefficients():
    with pytest.raises(NotEnoughCoefficients):
        l_value(zeta_spec(5), 2)


def test_odd_quadratic_character():
    chi = DirichletCharacter.from_conrey(4, 3)
    spec = dirichlet_spec(chi)
    result = l_value(spec, 1)
    assert rel(result.value, mp.pi / 4) < 1e-20
    assert abs(result.epsilon - 1) < 1e-20


def test_complex_character_matches_hurwitz_route():
    chi = DirichletCharacter.from_conrey(5, 2)
    spec = dirichlet_spec(chi)
    assert not spec.self_dual
    for s in (2, mp.mpc("0.5", "3")):
        assert rel(l_value(spec, s).value, dirichlet_L(chi, s)) < 1e-18


def test_delta_root_number_is_solved(delta):
    spec = newform_spec(delta)
    assert spec.epsilon is None
    report = fe_selftest(spec)
    assert abs(report.epsilon - 1) < 1e-15
    assert report.residual < 1e-15


def test_delta_value_in_convergence_region(delta):
    series = mp.fsum(delta.a(n) * mp.power(n, -12) for n in range(1, 1001))
    assert rel(l_value(newform_spec(delta), 12).value, series) < 1e-10


def test_weight_two_root_number(form_11a):
    report = fe_selftest(newform_spec(form_11a))
    assert abs(report.epsilon - 1) < 1e-15


def test_nebentypus_form_functional_equation(form_7_3):
    report = fe_selftest(newform_spec(form_7_3))
    assert report.passed(1e-15)


def test_derivative_cross_check(delta):
    result = l_derivative(newform_spec(delta), 6)
    assert mp.mpf(result.details["cross_check_delta"]) < 1e-15


def test_spec_round_trip(tmp_path):
    spec = dirichlet_spec(DirichletCharacter.from_conrey(5, 2), n_terms=20)
    back = LFunctionSpec.load(spec.save(tmp_path / "spec.json"))
    assert back.conductor == 5 and back.gamma_kind == "R" and back.shifts == [1]
    assert len(back.dual_coefficients) == 20
    assert abs(mp.mpc(back.epsilon) - spec.epsilon) < 1e-25
    assert back.to_json() == spec.to_json()


@pytest.mark.slow
def test_rankin_square_of_delta(delta):
    spec = rankin_spec_lfunction(delta, delta, precision=96)
    assert spec.shifts == [0, -11] and spec.weight == 22 and spec.conductor == 1
    assert len(spec.poles) == 2
    lfun = CompletedLFunction(spec, precision=96)
    report = lfun.check()
    assert report.residual < 1e-8
    assert abs(report.epsilon - 1) < 1e-8
    # residues at 12 and 11 come from zeta(s - 11) and cancel under s -> 23 - s
    assert abs(report.residues[0] + report.residues[1]) < 1e-8 * abs(report.residues[0])

    identity_route = mp.zeta(12) * convolution_D(delta, delta, 17, n_max=1000).value
    assert rel(lfun.value(17).value, identity_route) < 1e-8

    at_five = lfun.derivative(5)
    assert at_five.details["gamma_pole_order"] == 1
    assert abs(at_five.value) > 0
