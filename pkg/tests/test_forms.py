import mpmath as mp
import pytest
import requests

from modules.arith.characters import DirichletCharacter
from modules.errors import InsufficientCoefficients, NetworkUnavailable, NotHolomorphic, SchemaMismatch
from modules.forms import lmfdb_client
from modules.forms.eta import EtaQuotient, eta_expand, eta_newform
from modules.forms.hecke import hecke_validate
from modules.forms.lmfdb_client import LmfdbClient, fetch_euler_factors, fetch_lmfdb, modern_label
from modules.forms.newform import Newform, dual_form
from modules.forms.registry import load_newform


def test_delta_expansion():
    a = eta_expand(EtaQuotient(((1, 24),)), 3)
    assert a == [1, -24, 252]


def test_level_three_weight_eight_form():
    a = eta_expand(EtaQuotient(((1, 6), (3, 6)), (3,)), 3)
    assert a == [1, 6, -27]


def test_eta_8_8_is_not_holomorphic_at_integral_valuation():
    with pytest.raises(NotHolomorphic):
        eta_expand(EtaQuotient(((1, 8), (3, 8))), 3)


def test_catalogue_forms_are_normalized_and_hecke(delta, form_11a, form_3_8, form_7_3):
    for f in (delta, form_11a, form_3_8, form_7_3):
        assert f.a(1) == 1
        assert hecke_validate(f, 200) == []


def test_known_coefficients(delta, form_11a, form_7_3):
    assert delta.a(6) == delta.a(2) * delta.a(3) == -6048
    assert [form_11a.a(n) for n in range(1, 6)] == [1, -2, -1, 2, 1]
    assert form_7_3.a(2) == -3
    assert form_7_3.character.parity == -1


def test_recurrence_at_two_for_level_three(form_3_8):
    assert hecke_validate(form_3_8, 64) == []
    assert form_3_8.a(64) == form_3_8.a(2) * form_3_8.a(32) - 2 ** 7 * form_3_8.a(16)


def test_corrupted_stream_names_n6(delta):
    coeffs = dict(delta.coeffs)
    coeffs[6] += 1
    broken = Newform(12, 1, DirichletCharacter.trivial(), coeffs, label="broken", source="file")
    violations = hecke_validate(broken, 10)
    assert [v.n for v in violations] == [6]
    assert violations[0].rule == "multiplicativity"


def test_lazy_extension(delta):
    f = eta_newform("delta", 10)
    assert f.dense_bound == 10
    assert f.a(50) == delta.a(50)
    assert f.dense_bound >= 50


def test_dual_of_rational_form_is_itself(form_11a):
    assert dual_form(form_11a) is form_11a


def test_dual_conjugates_coefficients_and_character():
    chi = DirichletCharacter.from_conrey(13, 4)
    coeffs = {1: mp.mpc(1), 2: mp.mpc(-1.5, 0.8660254037844386), 3: mp.mpc(0, 1)}
    f = Newform(2, 13, chi, coeffs, label="toy", source="file")
    g = dual_form(f)
    assert g.character == chi.conj()
    assert g.weight == f.weight and g.level == f.level
    for n in coeffs:
        assert g.a(n) == mp.conj(f.a(n))
    assert g.label == "toy*"


def test_cache_round_trip_is_lossless(tmp_path, delta):
    path = tmp_path / "delta.jsonl"
    delta.save(path)
    back = Newform.load(path)
    assert back.coeffs == delta.coeffs
    assert all(isinstance(c, int) for c in back.coeffs.values())

    chi = DirichletCharacter.from_conrey(13, 4)
    with mp.workprec(128):
        coeffs = {1: mp.mpc(1), 2: mp.mpc(mp.sqrt(2), -mp.pi)}
    toy = Newform(2, 13, chi, coeffs, label="toy", precision=128)
    toy.save(tmp_path / "toy.jsonl")
    again = Newform.load(tmp_path / "toy.jsonl")
    assert again.coeffs[2].real == coeffs[2].real
    assert again.coeffs[2].imag == coeffs[2].imag


def test_offline_cold_cache(tmp_path):
    with pytest.raises(NetworkUnavailable):
        fetch_lmfdb("13.2.e.a", 10, tmp_path, offline=True)


def test_cached_fixture_for_legacy_label(fixture_cache):
    assert modern_label("39.8.5a") == "39.8.c.a"
    f = fetch_lmfdb("39.8.5a", 10, fixture_cache, offline=True)
    assert f.weight == 8 and f.level == 39
    assert f.a(3) == -27
    assert f.character.conductor == 13 and f.character.order == 2
    again = fetch_lmfdb("39.8.c.a", 10, fixture_cache, offline=True)
    assert again.coeffs == f.coeffs and again.header() == f.header()
    assert f.a(2).real == 0 and abs(abs(f.a(2)) ** 2 - mp.mpf("379.727881796792386356245630620328")) < 1e-25
    with pytest.raises(InsufficientCoefficients):
        f.a(f.n_max + 1)


def test_level_39_fixture_passes_checks(fixture_cache):
    f = fetch_lmfdb("39.8.c.a", 1000, fixture_cache, offline=True)
    assert not f.sparse and f.n_max == 1000
    assert hecke_validate(f, 1000) == []
    assert abs(abs(f.a(13)) - mp.power(13, 3.5)) < 1e-20 * abs(f.a(13))


def test_level_13_fixture_passes_checks(fixture_cache):
    f = fetch_lmfdb("13.2.e.a", 6000, fixture_cache, offline=True)
    assert f.character.conductor == 13 and f.character.order == 6
    assert hecke_validate(f, 600) == []
    assert abs(f.a(13) - mp.mpc("-2.5", "-2.598076211353315940291169")) < 1e-20


def test_load_newform_resolves_prefixes(config, tmp_path, delta):
    assert load_newform("eta:delta", config).a(2) == -24
    delta.save(tmp_path / "d.jsonl")
    assert load_newform(f"file:{tmp_path / 'd.jsonl'}", config).a(3) == 252
    assert load_newform("39.8.5a", config, n_max=3).a(3) == -27


class _FakeResponse:
    def __init__(self, status, payload):
        self.status_code = status
        self._payload = payload
        self.text = str(payload)

    def json(self):
        return self._payload


def test_client_parses_dimension_two_forms(monkeypatch):
    newform = {"label": "13.2.e.a", "weight": 2, "level": 13, "dim": 2, "hecke_orbit_code": 99}
    embeddings = [
        {"conrey_index": 10, "embedding_index": 1, "an_normalized": [[1, 0], [0.5, 0.5], [0, 1]]},
        {"conrey_index": 4, "embedding_index": 1, "an_normalized": [[1, 0], [0.5, -0.5], [0, -1]]},
    ]

    def fake_get(url, params=None, timeout=None):
        if "mf_hecke_cc" in url:
            assert params["hecke_orbit_code"] == "i99"
            return _FakeResponse(200, {"data": embeddings})
        return _FakeResponse(200, {"data": [newform]})

    monkeypatch.setattr(lmfdb_client.requests, "get", fake_get)
    f = LmfdbClient("http://example.invalid/api").fetch_newform("13.2.e.a", 3)
    assert f.character == DirichletCharacter.from_conrey(13, 4)
    assert abs(f.a(2) - mp.mpc(0.5, -0.5) * mp.sqrt(2)) < 1e-12



def test_database_factors_are_fetched_and_cached(monkeypatch, tmp_path):
    record = {"label": "4-169-13.3-c1-c1-0-0", "bad_lfactors": [[13, [1, [0.5, -12.99038105676658]]]]}
    calls = []

    def fake_get(url, params=None, timeout=None):
        calls.append(url)
        assert "lfunc_lfunctions" in url
        return _FakeResponse(200, {"data": [record]})

    monkeypatch.setattr(lmfdb_client.requests, "get", fake_get)
    with pytest.raises(NetworkUnavailable):
        fetch_euler_factors("13.2.e.a", "13.2.e.a", tmp_path, offline=True, lfunction=record["label"])
    factors = fetch_euler_factors("13.2.e.a", "13.2.e.a", tmp_path, lfunction=record["label"])
    assert factors.sources[13] == "database"
    again = fetch_euler_factors("13.2.e.a", "13.2.e.a", tmp_path, offline=True)
    assert len(calls) == 1
    assert abs(again[13][1] - mp.mpc(0.5, -12.99038105676658)) < 1e-12


def test_malformed_bad_factors(monkeypatch):
    record = {"label": "x", "bad_lfactors": [[13]]}
    monkeypatch.setattr(
        lmfdb_client.requests, "get", lambda url, params=None, timeout=None: _FakeResponse(200, {"data": [record]})
    )
    with pytest.raises(SchemaMismatch):
        LmfdbClient("http://example.invalid/api").lfunction_bad_factors("x")

def test_client_schema_mismatch(monkeypatch):
    monkeypatch.setattr(
        lmfdb_client.requests, "get", lambda url, params=None, timeout=None: _FakeResponse(200, {"data": [{"label": "x"}]})
    )
    with pytest.raises(SchemaMismatch):
        LmfdbClient("http://example.invalid/api").fetch_newform("x", 3)


def test_client_network_error(monkeypatch):
    def boom(url, params=None, timeout=None):
        raise requests.ConnectionError("down")

    monkeypatch.setattr(lmfdb_client.requests, "get", boom)
    with pytest.raises(NetworkUnavailable):
        LmfdbClient("http://example.invalid/api").newform_record("11.2.a.a")


@pytest.mark.network
def test_eta_matches_database(tmp_path, online, delta, form_3_8):
    for f in (delta, form_3_8):
        fetched = fetch_lmfdb(f.label, 200, tmp_path)
        assert fetched.coefficients(200) == f.coefficients(200)


@pytest.mark.network
def test_database_level_39_form(tmp_path, online):
    f = fetch_lmfdb("39.8.5a", 100, tmp_path)
    assert f.a(3) == -27
    assert f.character.conductor == 13
    assert hecke_validate(f, 100) == []
