import random
from fractions import Fraction

import pytest

from modules.arith.characters import DirichletCharacter
from modules.arith.bernoulli import periodic_bernoulli
from modules.eisenstein.divisor import Divisor, beta_chi, gl2, mat_vec
from modules.errors import NotDegreeZero, TrivialCharacter
from modules.residue.boundary import BoundaryFunction, horospherical, horospherical_value, residue_of_beta_chi
from modules.residue.cusps import (
    cusp_count_formula,
    cusp_flags,
    cusp_enumeration,
    decompose,
    from_cusp_values,
    relation_sign,
)

IDENTITY = ((1, 0), (0, 1))
CHI_MINUS_4 = DirichletCharacter.from_conrey(4, 3)


def test_point_difference_at_level_three():
    beta = Divisor.point_difference(3, (0, 1), (1, 0))
    assert horospherical_value(beta, 0, IDENTITY) == Fraction(-2, 9)


def test_beta_chi_mod_four():
    assert residue_of_beta_chi(CHI_MINUS_4, 0)(IDENTITY) == 0
    assert residue_of_beta_chi(CHI_MINUS_4, 1)(IDENTITY) == Fraction(-3, 32)


def test_trivial_character_rejected():
    with pytest.raises(TrivialCharacter):
        residue_of_beta_chi(DirichletCharacter.trivial(), 0)


def test_degree_must_vanish():
    beta = Divisor(5, {(0, 1): Fraction(1)}, check=False)
    with pytest.raises(NotDegreeZero):
        horospherical(beta, 1)


def test_linearity():
    rng = random.Random(11)
    for n in (3, 5):
        a, b = Divisor.random(n, rng), Divisor.random(n, rng)
        for k in (0, 2):
            combined = horospherical(a + b.scale(Fraction(-2, 3)), k)
            assert combined == horospherical(a, k) + horospherical(b, k).scale(Fraction(-2, 3))


@pytest.mark.parametrize("n", [3, 4, 5, 7])
@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_image_lies_in_boundary_space(n, k):
    rng = random.Random(100 * n + k)
    for _ in range(50 if n < 7 else 5):
        f = horospherical(Divisor.random(n, rng), k)
        assert f.is_in_F(), f.violations()[:1]


def test_membership_detects_a_bad_function():
    f = BoundaryFunction(5, 0, {IDENTITY: Fraction(1)})
    assert not f.is_in_F()


@pytest.mark.parametrize("n,count", [(3, 4), (4, 6), (5, 12), (6, 12), (7, 24)])
def test_cusp_counts(n, count):
    assert len(cusp_enumeration(n)) == count
    assert cusp_count_formula(n) == count


def test_classes_partition_the_group():
    n = 5
    classes = cusp_enumeration(n)
    assert sum(len(c) for c in classes) == len(list(gl2(n)))


def test_relation_sign():
    n = 5
    minus = ((4, 0), (0, 4))
    assert relation_sign(IDENTITY, ((1, 3), (0, 1)), n, 1) == 1
    assert relation_sign(IDENTITY, minus, n, 1) == -1
    assert relation_sign(IDENTITY, minus, n, 2) == 1
    assert relation_sign(IDENTITY, ((0, 1), (1, 0)), n, 0) is None


@pytest.mark.parametrize("index,k", [(4, 0), (4, 2), (2, 1)])
def test_residue_is_determined_by_cusp_values(index, k):
    n = 5
    classes = cusp_enumeration(n)
    chi = DirichletCharacter.from_conrey(5, index)
    f = residue_of_beta_chi(chi, k)
    assert from_cusp_values(n, k, decompose(f, classes), classes) == f


def test_boundary_function_json(tmp_path):
    beta = Divisor.point_difference(3, (0, 1), (1, 0))
    f = horospherical(beta, 2)
    path = f.save(tmp_path / "omega.json")
    assert BoundaryFunction.load(path) == f


def test_symmetric_difference_vanishes_at_identity():
    beta = Divisor.point_difference(3, (0, 1), (0, 2))
    assert horospherical_value(beta, 0, IDENTITY) == 0


def _by_definition(beta, k, g):
    """sum over all x of beta(g x) B_{k+2}(<x_2 / N>), without inverting g."""
    n = beta.modulus
    total = Fraction(0)
    for x1 in range(n):
        for x2 in range(n):
            weight = beta(mat_vec(g, (x1, x2), n))
            if weight != 0:
                total = weight * periodic_bernoulli(k + 2, Fraction(x2, n)) + total
    return total


@pytest.mark.parametrize("k", [0, 1, 2])
def test_beta_chi_matches_the_defining_sum(k):
    beta = beta_chi(CHI_MINUS_4)
    rng = random.Random(k)
    elements = list(gl2(4))
    for g in [IDENTITY] + rng.sample(elements, 12):
        assert horospherical_value(beta, k, g) == _by_definition(beta, k, g)


@pytest.mark.parametrize("modulus,index", [(3, 2), (4, 3), (5, 2), (5, 4), (7, 3)])
def test_beta_chi_residue_lies_in_boundary_space(modulus, index):
    chi = DirichletCharacter.from_conrey(modulus, index)
    for k in (0, 1, 2):
        assert residue_of_beta_chi(chi, k).is_in_F(samples=40)


def test_cusp_flags():
    f = residue_of_beta_chi(CHI_MINUS_4, 1)
    rows = cusp_flags(f)
    assert len(rows) == 6
    assert any(not row["vanishes"] for row in rows)
    assert all(row["vanishes"] == (row["value"] == "0") for row in rows)
