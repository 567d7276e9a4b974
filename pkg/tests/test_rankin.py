import mpmath as mp
import pytest
from sympy import divisor_count, primerange

from modules.arith.characters import DirichletCharacter
from modules.errors import BadPrime, OutsideConvergence, PoleWarning
from modules.forms.lmfdb_client import fetch_euler_factors, fetch_lmfdb
from modules.forms.newform import Newform
from modules.rankin.automorphic import (
    RankinSpec,
    automorphic_R,
    closed_form_R,
    local_R,
    predicted_nonvanishing,
    vanishing_scan,
)
from modules.rankin.convolution import convolution_D, divisor_bound_constant
from modules.rankin.euler import EulerFactorSet, good_euler_factor, local_euler_factor, series_inverse
from modules.rankin.identity import series_identity_check, tensor_coefficients


@pytest.fixture
def form_39(fixture_cache):
    return fetch_lmfdb("39.8.5a", 10, fixture_cache, offline=True)


def hecke_powers(f, p, depth):
    """a_{p^r} from a_p alone through the Hecke recursion."""
    ap, chi = f.a(p), f.character(p).as_int() * p ** (f.k + 1)
    out = [1, ap]
    while len(out) <= depth:
        out.append(ap * out[-1] - chi * out[-2])
    return out


def test_good_factor_shape(delta, form_11a):
    P = good_euler_factor(delta, form_11a, 2)
    assert P[0] == 1
    assert P[4] == (2 ** (delta.k + 1) * 2 ** (form_11a.k + 1)) ** 2
    assert P[1] == -delta.a(2) * form_11a.a(2)


def test_good_factor_rejects_bad_prime(delta, form_11a):
    with pytest.raises(BadPrime):
        good_euler_factor(delta, form_11a, 11)


def test_inverse_series_matches_hecke_recursion(delta, form_11a):
    for p in primerange(2, 50):
        if p == 11:
            continue
        P = good_euler_factor(delta, form_11a, p)
        inverse = series_inverse(P, 7)
        af, ag = hecke_powers(delta, p, 6), hecke_powers(form_11a, p, 6)
        AB = p ** (delta.k + 1) * p ** (form_11a.k + 1)
        for r in range(7):
            expected = sum(AB ** i * af[r - 2 * i] * ag[r - 2 * i] for i in range(r // 2 + 1))
            assert inverse[r] == expected, (p, r)


def test_divisor_bound_constant_is_a_bound():
    c = divisor_bound_constant(0.25)
    for n in (1, 2, 12, 360, 5040, 720720):
        assert int(divisor_count(n)) <= c * mp.power(n, 0.25)


def test_convolution_doubling(delta):
    coarse = convolution_D(delta, delta, 17, n_max=500, precision=96)
    fine = convolution_D(delta, delta, 17, n_max=1000, precision=96)
    assert abs(coarse.value - fine.value) < 1e-10 * abs(fine.value)
    assert fine.tail_bound < coarse.tail_bound


def test_convolution_single_term(delta, form_11a):
    upto6 = convolution_D(delta, form_11a, 20, n_max=6).value
    upto5 = convolution_D(delta, form_11a, 20, n_max=5).value
    expected = delta.a(6) * form_11a.a(6) * mp.power(6, -20)
    assert abs((upto6 - upto5) - expected) < mp.mpf(10) ** -30


def test_convolution_degenerate_stream(delta):
    coeffs = {n: (1 if n == 1 else 0) for n in range(1, 51)}
    lonely = Newform(12, 1, DirichletCharacter.trivial(), coeffs, label="lonely")
    assert convolution_D(delta, lonely, 14, n_max=50).value == 1


def test_convolution_region(delta):
    with pytest.raises(OutsideConvergence):
        convolution_D(delta, delta, 12, n_max=10)
    with pytest.warns(PoleWarning):
        convolution_D(delta, delta, 12.3, n_max=50)


def test_unramified_rule(delta):
    spec = RankinSpec(delta, delta, 0, level=2)
    local = local_R(spec, 2)
    assert local.rule == "unramified"
    assert local.coefficients == closed_form_R(spec, 2) == [1, 0, -(2 ** 22)]


def test_one_sided_rule_is_derived(form_3_8, delta):
    spec = RankinSpec(form_3_8, delta, 0)
    assert local_R(spec, 3).coefficients == [1]
    derived = local_R(spec, 3, derive=True)
    assert derived.coefficients == [1]
    assert derived.euler_factor[1] == 27 * delta.a(3)


def test_special_pair_factor(form_39, form_3_8):
    spec = RankinSpec(form_39, form_3_8, 6)
    R = automorphic_R(spec)
    assert R.factors[3].rule == "special-pair"
    assert R.factors[3].coefficients == [1, -(3 ** 7)]
    assert R.factors[13].coefficients == [1]
    assert abs(R.evaluate(7)) < mp.mpf(10) ** -30
    assert spec.n == 8


def test_vanishing_scan(form_39, form_3_8):
    rows = vanishing_scan(form_39, form_3_8)
    assert [r["j"] for r in rows if r["vanishes"]] == [6]
    for row in rows:
        if row["predicted_nonzero"]:
            assert not row["vanishes"]
    assert not predicted_nonvanishing(6, 6, 6)
    assert predicted_nonvanishing(6, 6, 0)


def test_supplied_factor_takes_precedence(form_39, form_3_8):
    supplied = EulerFactorSet.from_json({"3": [1, -2916, 3 * 729 * 729]})
    spec = RankinSpec(form_39, form_3_8, 0)
    local = local_R(spec, 3, supplied)
    assert local.rule == "user"
    assert local.coefficients == [1, -(3 ** 7)]


def test_euler_factor_set_round_trip(tmp_path):
    factors = EulerFactorSet.from_json({"3": [1, -2187], "5": {"coefficients": [1, "1/2"], "source": "rule"}})
    back = EulerFactorSet.load(factors.save(tmp_path / "factors.json"))
    assert back.to_json() == factors.to_json()
    assert back.sources[5] == "rule"
    with pytest.raises(ValueError):
        EulerFactorSet.from_json({"2": [1, 1, 1, 1, 1, 1]})


def test_database_factor_fills_bad_prime(fixture_cache):
    f = fetch_lmfdb("13.2.e.a", 100, fixture_cache, offline=True)
    with pytest.raises(BadPrime):
        local_euler_factor(f, f, 13)
    database = fetch_euler_factors("13.2.e.a", "13.2.e.a", fixture_cache, offline=True)
    poly, source = local_euler_factor(f, f, 13, database)
    assert source == "database"
    assert len(poly) == 2 and abs(poly[1] + f.a(13) ** 2) < 1e-30


def test_user_factor_shadows_database(fixture_cache):
    database = fetch_euler_factors("13.2.e.a", "13.2.e.a", fixture_cache, offline=True)
    user = EulerFactorSet.from_json({"13": [1, 7]})
    merged = user.overlay(database)
    assert merged[13] == [1, 7] and merged.sources[13] == "user"
    assert database.overlay(None).sources[13] == "database"
    assert EulerFactorSet().overlay(database)[13] == database[13]


def test_conjugated_factors_keep_sources(fixture_cache):
    database = fetch_euler_factors("13.2.e.a", "13.2.e.a", fixture_cache, offline=True)
    dual = database.conjugate()
    assert dual.sources == database.sources
    assert dual[13][1] == mp.conj(database[13][1])
    assert dual[13][1].imag > 0


def test_no_database_factors_without_cache_or_label(tmp_path):
    assert len(fetch_euler_factors("13.2.e.a", "13.2.e.a", tmp_path, offline=True)) == 0


def test_tensor_coefficients_at_primes(delta, form_11a):
    spec = RankinSpec(delta, form_11a, 0)
    b = tensor_coefficients(spec, 50)
    for p in primerange(2, 50):
        assert b[p] == delta.a(p) * form_11a.a(p)


def test_series_identity_level_one(delta):
    check = series_identity_check(RankinSpec(delta, delta, 0), s=16, n_max=1000, precision=96)
    assert check.formal_ok
    assert check.residual < 1e-9 * abs(check.lhs)


def test_series_identity_with_unramified_prime(delta):
    check = series_identity_check(RankinSpec(delta, delta, 0, level=2), n_max=300)
    assert check.formal_ok


def test_series_identity_one_sided_primes(form_11a, form_7_3):
    check = series_identity_check(RankinSpec(form_11a, form_7_3, 0, level=77), s=7, n_max=300, precision=96)
    assert check.formal_ok
    assert check.residual < 1e-8 * abs(check.lhs)


def test_series_identity_for_level_39_pair(fixture_cache, form_3_8):
    f = fetch_lmfdb("39.8.5a", 1000, fixture_cache, offline=True)
    check = series_identity_check(RankinSpec(f, form_3_8, 0), s=12, n_max=1000)
    assert check.formal_ok
    assert check.residual < 1e-6 * abs(check.lhs)
