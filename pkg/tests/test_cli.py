import json

import mpmath as mp
import pytest

from main import build_parser, main
from modules.eisenstein.divisor import Divisor
from modules.errors import AutomorphicFactorVanishes, NetworkUnavailable, NotDegreeZero, TrivialCharacter


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def json_out(text):
    return json.loads(text[text.index("{"):])


def offline_args(tmp_path, fixture_cache):
    return ["--offline", "--cache-dir", str(fixture_cache), "--out", str(tmp_path / "runs")]


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_horospherical_point_difference(tmp_path, capsys):
    beta = tmp_path / "beta.json"
    beta.write_text(json.dumps(Divisor.point_difference(3, (0, 1), (1, 0)).to_json()))
    code, out = run(capsys, "horospherical", "--beta", str(beta), "--N", "3", "--k", "0", "--at", "1,0,0,1")
    assert code == 0
    assert json_out(out)["value"] == "-2/9"


def test_horospherical_beta_chi(capsys):
    code, out = run(capsys, "horospherical", "--chi", "4.3", "--k", "1", "--at", "1,0,0,1")
    assert code == 0
    assert json_out(out)["value"] == "-3/32"


def test_horospherical_whole_function_to_file(tmp_path, capsys):
    target = tmp_path / "omega.json"
    code, _ = run(capsys, "horospherical", "--chi", "3.2", "--k", "1", "--out-file", str(target))
    assert code == 0
    data = json.loads(target.read_text())
    assert data["level"] == 3 and data["k"] == 1
    assert all("/" in v or v.lstrip("-").isdigit() for v in data["values"].values())


def test_horospherical_rejects_positive_degree(tmp_path, capsys):
    beta = tmp_path / "beta.json"
    beta.write_text(json.dumps({"modulus": 3, "values": [[0, 1, "1"]]}))
    code, out = run(capsys, "horospherical", "--beta", str(beta))
    assert code == NotDegreeZero.exit_code
    assert "NotDegreeZero" in out


def test_gauss(capsys):
    code, out = run(capsys, "gauss", "--chi", "5.2")
    data = json_out(out)
    assert code == 0
    assert data["conductor"] == 5
    assert mp.mpf(data["product_residual"]) < 1e-30


def test_lvalue_zeta(capsys):
    code, out = run(capsys, "lvalue", "--s", "2")
    re, im = (mp.mpf(x) for x in json_out(out)["value"])
    assert code == 0
    assert abs(re - mp.pi ** 2 / 6) < 1e-15 and abs(im) < 1e-15


def test_euler_factors(tmp_path, fixture_cache, capsys):
    code, out = run(
        capsys, "euler-factors", "--f", "39.8.5a", "--g", "eta:3.8.a.a", "--n-max", "3",
        "--primes", "3", *offline_args(tmp_path, fixture_cache),
    )
    factors = json_out(out)["factors"]
    assert code == 0
    assert factors["3"]["source"] == "rule"
    assert len(factors["3"]["coefficients"]) == 3



def test_euler_factors_from_database(tmp_path, fixture_cache, capsys):
    args = ["euler-factors", "--f", "13.2.e.a", "--g", "13.2.e.a", "--n-max", "20", "--primes", "2", "13"]
    code, out = run(capsys, *args, *offline_args(tmp_path, fixture_cache))
    factors = json_out(out)["factors"]
    assert code == 0
    assert factors["13"]["source"] == "database"
    assert factors["2"]["source"] == "good"
    user = tmp_path / "bad.json"
    user.write_text(json.dumps({"13": [1, "1/2"]}))
    code, out = run(capsys, *args, "--bad-factors", str(user), *offline_args(tmp_path, fixture_cache))
    assert json_out(out)["factors"]["13"] == {"coefficients": [1, "1/2"], "source": "user"}

def test_check_series(tmp_path, fixture_cache, capsys):
    code, out = run(
        capsys, "check-series", "--f", "eta:delta", "--g", "eta:11a", "--n-max", "300", "--terms", "200",
        *offline_args(tmp_path, fixture_cache),
    )
    assert code == 0
    assert json_out(out)["formal_ok"] is True


def test_regulator_rejects_trivial_character(tmp_path, fixture_cache, capsys):
    code, out = run(
        capsys, "verify", "regulator", "--f", "eta:delta", "--g", "eta:delta", "--n-max", "50",
        *offline_args(tmp_path, fixture_cache),
    )
    assert code == TrivialCharacter.exit_code
    assert "chi" in out


def test_regulator_vanishing_pair(tmp_path, fixture_cache, capsys):
    code, out = run(
        capsys, "verify", "regulator", "--f", "39.8.5a", "--g", "eta:3.8.a.a", "--j", "6", "--n-max", "3",
        *offline_args(tmp_path, fixture_cache),
    )
    assert code == AutomorphicFactorVanishes.exit_code
    assert "says nothing about L'" in out


def test_missing_coefficients_offline(tmp_path, capsys):
    code, out = run(
        capsys, "verify", "shimura", "--f", "13.2.e.a", "--g", "13.2.e.a", "--s", "5",
        "--offline", "--cache-dir", str(tmp_path / "empty"), "--out", str(tmp_path / "runs"),
    )
    assert code == NetworkUnavailable.exit_code
    assert "offline" in out


def test_cache_info_and_clean(tmp_path, fixture_cache, capsys):
    code, out = run(capsys, "cache", "info", *offline_args(tmp_path, fixture_cache))
    assert code == 0
    assert "Cache" in out
    code, out = run(capsys, "cache", "clean", "--days", "1", *offline_args(tmp_path, fixture_cache))
    assert code == 0
    assert "Deleted 0 runs" in out


@pytest.mark.slow
def test_verify_shimura_and_fault_injection(tmp_path, fixture_cache, capsys):
    args = ["verify", "shimura", "--f", "eta:delta", "--g", "eta:delta", "--s", "14", *offline_args(tmp_path, fixture_cache)]
    code, out = run(capsys, *args)
    assert code == 0
    report_path = out.split("Report saved: ")[1].split()[0]
    report = json.loads(open(report_path).read())
    assert report["passed"] is True
    assert report["config"]["offline"] is True
    assert "build" in report and "runtime" not in report
    first = open(report_path).read()
    run(capsys, *args)
    assert open(report_path).read() == first

    code, out = run(capsys, *args, "--fault-inject", "shimura-rhs")
    assert code == 1
    assert "NOT verified" in out
