from fractions import Fraction

import mpmath as mp
import pytest

from modules.arith.characters import DirichletCharacter
from modules.eisenstein.divisor import Divisor, EisensteinPoint, beta_chi
from modules.eisenstein.lattice import TwistedLattice, lerch
from modules.eisenstein.series import (
    bridge_check,
    gamma_E_limit,
    lattice_sum,
    series_E,
    series_ENw,
    series_F,
)
from modules.errors import NotAbsolutelyConvergent, NotDegreeZero, PoleEncountered, TrivialCharacter

PREC = 96
CHI_MINUS_3 = DirichletCharacter.from_conrey(3, 2)
CHI_MINUS_4 = DirichletCharacter.from_conrey(4, 3)


def close(x, y, rel):
    return abs(x - y) <= rel * max(abs(x), abs(y), mp.mpf(1e-30))


def test_beta_chi_mod_three():
    beta = beta_chi(CHI_MINUS_3)
    assert beta.values == {(0, 1): Fraction(-1), (0, 2): Fraction(1)}
    assert beta.degree() == 0


def test_beta_chi_complex_character_has_degree_zero():
    chi = DirichletCharacter.from_conrey(5, 2)
    beta = beta_chi(chi)
    assert len(beta.values) == 4
    assert beta.is_degree_zero()
    assert not beta.is_rational()


def test_beta_chi_rejects_trivial_character():
    with pytest.raises(TrivialCharacter):
        beta_chi(DirichletCharacter.trivial(5))


def test_divisor_degree_is_checked():
    with pytest.raises(NotDegreeZero):
        Divisor(3, {(0, 1): 1})
    assert Divisor.point_difference(3, (0, 1), (1, 0)).degree() == 0


def test_lerch_matches_direct_summation():
    sigma, rho = Fraction(1, 3), Fraction(1, 4)
    s, r = mp.mpf(1) / 3, mp.mpf(1) / 4
    direct = mp.nsum(lambda n: mp.expjpi(2 * r * (s + n)) * (s + n) ** -2, [0, mp.inf])
    assert close(lerch(sigma, rho, 2), direct, 1e-12)


@pytest.mark.parametrize(
    "a, b, tau, sigma, rho",
    [
        (3, 3, 1j, (0, 0), (0, 0)),
        (2, 1, 0.5 + 1j, (0, 0), (0, 0)),
        (1, 2, 0.5 + 1j, (0, 0), (0, 0)),
        (4, 1, 2j, (0, Fraction(1, 5)), (0, 0)),
        (1, 4, 2j, (0, 0), (Fraction(1, 5), 0)),
        (3, 1, 1j, (0, 0), (Fraction(1, 4), 0)),
        (2, 2, 0.3 + 0.9j, (0, 0), (Fraction(2, 3), 0)),
        (2, 2, 0.3 + 0.9j, (0, 0), (0, Fraction(1, 3))),
        (3, 2, 0.1 + 1.2j, (Fraction(1, 2), 0), (0, 0)),
        (2, 3, 0.1 + 1.2j, (Fraction(1, 3), Fraction(1, 4)), (Fraction(1, 5), Fraction(2, 5))),
        (1, 3, 1j, (0, 0), (Fraction(3, 4), Fraction(1, 4))),
        (5, 1, 0.25 + 0.8j, (0, Fraction(2, 3)), (0, 0)),
        (1, 5, 0.25 + 0.8j, (0, 0), (0, Fraction(1, 2))),
        (4, 2, 1.5j, (0, 0), (Fraction(1, 3), Fraction(1, 3))),
        (2, 4, 1.5j, (Fraction(2, 5), 0), (0, Fraction(1, 5))),
        (3, 3, 0.5 + 0.866j, (0, 0), (Fraction(1, 2), 0)),
        (6, 1, 1j, (0, 0), (0, 0)),
        (1, 6, 1j, (0, Fraction(1, 7)), (0, 0)),
        (2, 5, -0.4 + 1.1j, (0, 0), (Fraction(4, 7), Fraction(1, 7))),
        (3, 4, 0.2 + 2j, (Fraction(1, 6), Fraction(5, 6)), (0, 0)),
        (2, 1, 1j, (0, 0), (Fraction(1, 4), Fraction(1, 2))),
    ],
)
def test_continued_agrees_with_direct(a, b, tau, sigma, rho):
    lat = TwistedLattice(a, b, tau, sigma, rho)
    direct = lat.direct(PREC)
    continued = lat.continued(PREC)
    assert direct.error < 1e-20 and continued.error < 1e-20
    assert close(direct.value, continued.value, 1e-10)


def test_direct_agrees_with_box_sum():
    lat = TwistedLattice(3, 3, 0.5 + 1j, (0, Fraction(1, 3)), (Fraction(1, 4), 0))
    box = lat.box(radius=150)
    direct = lat.direct(PREC)
    assert abs(box.value - direct.value) <= box.error + 1e-12


def test_continued_needs_twist_at_weight_two():
    with pytest.raises(PoleEncountered):
        TwistedLattice(1, 1, 1j).continued(PREC)
    with pytest.raises(NotAbsolutelyConvergent):
        TwistedLattice(1, 1, 1j, rho=(Fraction(1, 3), 0)).direct(PREC)
    assert TwistedLattice(1, 1, 1j, rho=(Fraction(1, 3), 0)).continued(PREC).error < 1e-20


@pytest.mark.parametrize("gamma", [((1, 1), (0, 1)), ((0, -1), (1, 0)), ((2, 1), (1, 1))])
def test_modular_transformation(gamma):
    lat = TwistedLattice(3, 2, 0.3 + 1.4j, (0, Fraction(1, 5)), (Fraction(2, 5), 0))
    factor, moved = lat.transform(gamma)
    assert close(lat.continued(PREC).value, factor * moved.continued(PREC).value, 1e-15)


def test_lattice_sum_conjugation():
    beta = beta_chi(CHI_MINUS_3)
    pt = EisensteinPoint.nu(0.3 + 1.1j, 1, 3)
    e31 = lattice_sum(3, 1, beta, pt, PREC).value
    e13 = lattice_sum(1, 3, beta, pt, PREC).value
    assert close(mp.conj(e31), e13, 1e-20)
    # odd total weight picks up a sign
    e21 = lattice_sum(2, 1, beta, pt, PREC).value
    e12 = lattice_sum(1, 2, beta, pt, PREC).value
    assert close(mp.conj(e21), -e12, 1e-20)


def test_lattice_sum_periodicity():
    beta = Divisor.point_difference(3, (0, 1), (1, 0))
    identity = ((1, 0), (0, 1))
    here = lattice_sum(2, 2, beta, EisensteinPoint(0.2 + 1.2j, identity, 3), PREC).value
    there = lattice_sum(2, 2, beta, EisensteinPoint(3.2 + 1.2j, identity, 3), PREC).value
    assert close(here, there, 1e-20)


def test_lattice_sum_rejects_weight_two():
    with pytest.raises(NotAbsolutelyConvergent):
        lattice_sum(1, 1, beta_chi(CHI_MINUS_4), EisensteinPoint.nu(1j, 1, 4), PREC)


@pytest.mark.parametrize("series", [series_E, series_F])
def test_translation_invariance(series):
    here = series(2, Fraction(1, 5), 0.3 + 1.1j, 3, PREC).value
    there = series(2, Fraction(1, 5), 1.3 + 1.1j, 3, PREC).value
    assert close(here, there, 1e-20)


def test_functional_equation_point():
    # (k, l, j) = (0, 2, 0): F^(2)_{1/5}(2i, 1) against E^(2)_{1/5}(2i, -2)
    e_side = series_E(2, Fraction(1, 5), 2j, -2, PREC)
    f_side = series_F(2, Fraction(1, 5), 2j, 1, PREC, method="direct")
    assert "functional-equation" in e_side.branch
    assert f_side.branch == "F/direct"
    assert close(e_side.value, f_side.value, 1e-10)


def test_poles():
    with pytest.raises(PoleEncountered):
        series_E(0, 0, 1j, 1, PREC)
    with pytest.raises(PoleEncountered):
        series_F(0, 0, 1j, 0, PREC)
    with pytest.raises(PoleEncountered):
        gamma_E_limit(0, 1, 1j, DirichletCharacter.trivial(), 0, PREC)


def test_series_relation_at_level_four():
    w, s, tau, n = 2, 3, 1j, 4
    omega = DirichletCharacter.trivial(4)
    lhs = sum(
        omega.value(alpha, PREC) * series_E(w, Fraction(alpha, n), tau, s, PREC).value for alpha in (1, 3)
    )
    box = series_ENw(w, n, tau, s, omega, method="box")
    norm = mp.power(-2j * mp.pi, -w) * mp.power(mp.pi, -s) * mp.gamma(s + w) * mp.power(n, w + 2 * s)
    assert close(lhs, norm * box.value, 1e-8)


def test_parity_vanishing():
    value = series_ENw(2, 4, 0.3 + 1j, 3, CHI_MINUS_4, PREC)
    assert abs(value.value) <= value.error + mp.mpf(10) ** -25
    box = series_ENw(2, 4, 0.3 + 1j, 3, CHI_MINUS_4, method="box")
    assert abs(box.value) < 1e-12


def test_classical_eisenstein_value():
    trivial = DirichletCharacter.trivial()
    exact = series_ENw(0, 1, 1j, 3, trivial, PREC).value
    coarse = series_ENw(0, 1, 1j, 3, trivial, method="box")
    assert abs(exact - coarse.value) <= coarse.error + 1e-12
    assert abs(exact.imag) < 1e-25


def test_gamma_limit_product_branch():
    omega = DirichletCharacter.trivial(3)
    limit = gamma_E_limit(3, 3, 0.5 + 1j, omega, 1, PREC)
    plain = series_ENw(3, 3, 0.5 + 1j, 1, omega, PREC)
    assert "product" in limit.branch
    assert close(limit.value, 6 * plain.value, 1e-25)


def test_principal_character_limit_is_finite():
    value = gamma_E_limit(0, 3, 1j, DirichletCharacter.trivial(3), 0, PREC)
    assert mp.isfinite(value.value.real)


def test_bridge_identity_small_case():
    first = bridge_check(1, 1, 0, CHI_MINUS_4, 1j, a=1, precision=PREC)
    other = bridge_check(1, 1, 0, CHI_MINUS_4, 1j, a=3, precision=PREC)
    assert first.rel_error < 1e-8
    assert close(first.lhs, other.lhs, 1e-15)


@pytest.mark.slow
def test_bridge_identity_grid():
    triples = [
        (k, l, j)
        for k in range(5)
        for l in range(5)
        for j in range(min(k, l) + 1)
        if k + l - 2 * j <= 4 and k + l - 2 * j >= 1
    ]
    for n in (3, 4, 5):
        for chi in DirichletCharacter.all_characters(n):
            if chi.is_trivial():
                continue
            for tau in (1j, 0.5 + 1j, 2j):
                for k, l, j in triples:
                    result = bridge_check(k, l, j, chi, tau, precision=PREC)
                    assert result.rel_error < 1e-8, result.to_dict()
