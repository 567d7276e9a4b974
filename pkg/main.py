# main.py - Rankin-Selberg and regulator verification: command-line front end

import argparse
import json
import logging
import sys
import time
from math import gcd
from pathlib import Path
from typing import Any, Dict, List, Optional

import mpmath as mp

from modules.arith.characters import DirichletCharacter
from modules.arith.gauss import gauss_product_check, gauss_sum
from modules.config import RunConfig
from modules.eisenstein.divisor import Divisor, beta_chi
from modules.errors import ConfigError, RankinError
from modules.forms.lmfdb_client import fetch_euler_factors, fetch_lmfdb
from modules.forms.newform import Newform
from modules.forms.registry import load_newform
from modules.lfunc.afe import CompletedLFunction
from modules.lfunc.spec import LFunctionSpec, dirichlet_spec, zeta_spec
from modules.quadrature.cosets import FundamentalDomainSpec
from modules.quadrature.shimura import verify_shimura
from modules.rankin.automorphic import RankinSpec
from modules.rankin.euler import EulerFactorSet, encode_number, local_euler_factor
from modules.rankin.identity import series_identity_check
from modules.regulator.formula import RegulatorJob, verify_regulator
from modules.report import VerificationReport, build_stamp
from modules.residue.boundary import horospherical, horospherical_value, residue_of_beta_chi
from modules.residue.cusps import cusp_flags
from modules.storage.data_manager import cache_path, cleanup_old_runs, get_storage_info, run_dir, write_json

LOGGER = logging.getLogger("rankin")

BANNER = "=" * 60


def banner(title: str):
    print("\n" + BANNER)
    print(f"=== {title} ===")
    print(BANNER)


def emit(data: Dict[str, Any], out_file: Optional[str] = None):
    """Machine-readable output: to a file when asked, stdout otherwise."""
    if out_file:
        path = write_json(Path(out_file), data)
        print(f"💾 Written: {path}")
    else:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))


def parse_character(text: str) -> DirichletCharacter:
    """"N.c" as a Conrey label."""
    modulus, number = (int(part) for part in text.split("."))
    return DirichletCharacter.from_conrey(modulus, number)


def make_config(args) -> RunConfig:
    return RunConfig.from_env(
        precision=args.precision,
        effort=args.effort,
        truncation_height=args.truncation,
        workers=args.workers,
        cache_dir=args.cache_dir,
        offline=True if args.offline else None,
        out_dir=args.out,
        fault_inject=args.fault_inject,
    )


def bad_factor_set(args, config: RunConfig, f: Newform, g: Newform) -> Optional[EulerFactorSet]:
    """User factors from --bad-factors over database factors for the pair."""
    user = EulerFactorSet.load(Path(args.bad_factors)) if args.bad_factors else EulerFactorSet()
    database = fetch_euler_factors(
        f.label or "", g.label or "", config.cache_dir,
        offline=config.offline, base_url=config.lmfdb_url, lfunction=args.lfunction,
    )
    merged = user.overlay(database)
    return merged if len(merged) else None


def make_domain(config: RunConfig, level: int) -> FundamentalDomainSpec:
    return FundamentalDomainSpec.from_effort(level, config.effort, config.truncation_height, config.workers)


def write_report(report: VerificationReport, config: RunConfig) -> Path:
    """
    report.json holds the deterministic body; runtime goes to timing.json
    next to it so repeated runs give byte-identical reports.
    """
    body = report.to_dict()
    body["config"] = config.to_dict()
    body["build"] = build_stamp()
    directory = run_dir(config.out_dir, report.identity, {"parameters": report.parameters, "config": body["config"]})
    path = write_json(directory / "report.json", body)
    write_json(directory / "timing.json", {"runtime_seconds": round(report.runtime, 3)})
    return path


def show_report(report: VerificationReport, path: Path) -> int:
    print(f"   lhs:      {mp.nstr(report.lhs, 20)}")
    print(f"   rhs:      {mp.nstr(report.rhs, 20)}")
    print(f"   sign:     {report.sign:+d}")
    print(f"   rel_err:  {mp.nstr(report.rel_err, 6)} (tolerance {report.tolerance})")
    print(f"💾 Report saved: {path}")
    print("\n" + BANNER)
    if report.passed:
        print("✅ Identity verified")
        print(BANNER + "\n")
        return 0
    print("❌ Identity NOT verified within tolerance")
    print(BANNER + "\n")
    return 1


def cmd_verify_shimura(args) -> int:
    config = make_config(args)
    banner("Verify: Rankin-Selberg integral")
    f = load_newform(args.f, config, args.n_max)
    g = load_newform(args.g, config, args.n_max)
    level = args.N or f.level * g.level // gcd(f.level, g.level)
    print(f"📐 {f.label} x {g.label}, N = {level}, s = {args.s}, effort {config.effort}")
    shift = 1 if config.fault_inject == "shimura-rhs" else 0
    if shift:
        print("⚠️  Fault injection: right-hand side evaluated at s + 1")
    report = verify_shimura(
        f, g, args.s, level,
        domain=make_domain(config, level),
        precision=config.precision,
        tolerance=config.tolerance("shimura"),
        rhs_shift=shift,
    )
    return show_report(report, write_report(report, config))


def cmd_verify_regulator(args) -> int:
    config = make_config(args)
    banner("Verify: regulator formula")
    f = load_newform(args.f, config, args.n_max)
    g = load_newform(args.g, config, args.n_max)
    bad = bad_factor_set(args, config, f, g)
    spec = RankinSpec(f, g, args.j, args.N)
    job = RegulatorJob(
        spec,
        precision=config.precision,
        domain=make_domain(config, spec.level),
        conductor=args.conductor,
        bad_factors=bad,
        tolerance=config.tolerance("regulator"),
    )
    print(f"📐 {f.label} x {g.label}, j = {args.j}, N = {spec.level}, chi = {spec.chi.label()}")
    report = verify_regulator(job)
    print(f"🔀 Resolved sign: {report.sign:+d}")
    return show_report(report, write_report(report, config))


def cmd_euler_factors(args) -> int:
    config = make_config(args)
    f = load_newform(args.f, config, args.n_max)
    g = load_newform(args.g, config, args.n_max)
    bad = bad_factor_set(args, config, f, g)
    out = {}
    for p in args.primes:
        poly, source = local_euler_factor(f, g, p, bad)
        out[str(p)] = {"coefficients": [encode_number(c) for c in poly], "source": source}
    emit({"f": f.label, "g": g.label, "factors": out}, args.out_file)
    return 0


def cmd_check_series(args) -> int:
    config = make_config(args)
    f = load_newform(args.f, config, args.n_max)
    g = load_newform(args.g, config, args.n_max)
    bad = bad_factor_set(args, config, f, g)
    check = series_identity_check(RankinSpec(f, g, args.j, args.N), args.s, args.terms, bad, config.precision)
    emit(check.to_dict(), args.out_file)
    if not check.formal_ok:
        print(f"❌ Coefficient mismatch at n = {check.first_mismatch}")
        return 1
    return 0


def cmd_lvalue(args) -> int:
    config = make_config(args)
    if args.spec:
        spec = LFunctionSpec.load(Path(args.spec))
    elif args.chi:
        spec = dirichlet_spec(parse_character(args.chi), precision=config.precision)
    else:
        spec = zeta_spec()
    lfunction = CompletedLFunction(spec, config.precision, config.tolerance("fe_selftest"))
    s = mp.mpmathify(args.s)
    value = lfunction.derivative(s) if args.derivative else lfunction.value(s)
    emit({"name": spec.name, "derivative": args.derivative, **value.to_dict()}, args.out_file)
    return 0


def _parse_matrix(text: str):
    a, b, c, d = (int(x) for x in text.split(","))
    return ((a, b), (c, d))


def cmd_horospherical(args) -> int:
    if args.chi:
        chi = parse_character(args.chi)
        if args.at:
            emit({"value": str(horospherical_value(beta_chi(chi), args.k, _parse_matrix(args.at)))}, args.out_file)
            return 0
        residue = residue_of_beta_chi(chi, args.k)
        emit({**residue.to_json(), "cusp_classes": cusp_flags(residue)}, args.out_file)
        return 0
    beta = Divisor.from_json(json.loads(Path(args.beta).read_text()))
    if args.N and args.N != beta.modulus:
        raise ConfigError(f"divisor has modulus {beta.modulus}, not {args.N}")
    if args.at:
        emit({"value": str(horospherical_value(beta, args.k, _parse_matrix(args.at)))}, args.out_file)
        return 0
    function = horospherical(beta, args.k)
    if not function.is_in_F():
        print("⚠️  Result fails the boundary-space relations")
    emit(function.to_json(), args.out_file)
    return 0


def cmd_gauss(args) -> int:
    config = make_config(args)
    chi = parse_character(args.chi)
    with mp.workprec(config.precision):
        value = gauss_sum(chi, config.precision)
        check = gauss_product_check(chi, config.precision)
        emit({
            "chi": chi.label(),
            "conductor": chi.conductor,
            "gauss_sum": [mp.nstr(value.real, 25), mp.nstr(value.imag, 25)],
            "product_residual": mp.nstr(abs(check), 5),
        }, args.out_file)
    return 0


def cmd_fetch(args) -> int:
    config = make_config(args)
    print(f"🌐 Fetching {args.label} ({args.n_max} coefficients)...")
    form = fetch_lmfdb(args.label, args.n_max, config.cache_dir, offline=config.offline, base_url=config.lmfdb_url)
    print(f"✅ {form.label}: weight {form.weight}, level {form.level}, {form.n_max} coefficients")
    print(f"💾 Cached: {cache_path(config.cache_dir, form.label)}")
    return 0


def cmd_cache_info(args) -> int:
    config = make_config(args)
    info = get_storage_info(config.cache_dir.parent)
    print("\n📊 Storage:")
    print(f"   Cache:  {info['cache_size_mb']:.2f} MB, {info['cached_forms']} forms")
    print(f"   Runs:   {info['runs_size_mb']:.2f} MB, {info['runs_count']} runs")
    print(f"   Total:  {info['total_size_mb']:.2f} MB")
    return 0


def cmd_cache_clean(args) -> int:
    config = make_config(args)
    print(f"🧹 Removing runs older than {args.days} days...")
    stats = cleanup_old_runs(config.out_dir, days_to_keep=args.days)
    print(f"✅ Deleted {stats['runs_deleted']} runs, freed {stats['space_freed_mb']:.2f} MB")
    for error in stats["errors"]:
        print(f"⚠️  {error}")
    return 0


def _pair_arguments(parser: argparse.ArgumentParser, with_j: bool = False):
    parser.add_argument("--f", required=True, help="eta:<name>, file:<path> or an LMFDB label")
    parser.add_argument("--g", required=True)
    parser.add_argument("--N", type=int, help="level, a multiple of lcm(N_f, N_g)")
    parser.add_argument("--n-max", type=int, default=400, help="coefficients to load")
    parser.add_argument("--bad-factors", help="JSON file of local factors {p: [c0..c4]}")
    parser.add_argument("--lfunction", help="LMFDB label of L(f x g) to fetch bad local factors from")
    if with_j:
        parser.add_argument("--j", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="working precision in bits")
    common.add_argument("--effort", type=int, help="quadrature effort level")
    common.add_argument("--truncation", type=float, help="initial cusp truncation height")
    common.add_argument("--workers", type=int, help="threads evaluating quadrature panels")
    common.add_argument("--cache-dir", help="coefficient cache directory")
    common.add_argument("--out", help="run output directory")
    common.add_argument("--offline", action="store_true", help="never contact the LMFDB")
    common.add_argument("--fault-inject", help=argparse.SUPPRESS)
    common.add_argument("--out-file", help="write JSON here instead of stdout")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="rankin", description="Rankin-Selberg and regulator verification")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="verify an identity numerically")
    which = verify.add_subparsers(dest="identity", required=True)
    shimura = which.add_parser("shimura", parents=[common], help="Rankin-Selberg integral identity")
    _pair_arguments(shimura)
    shimura.add_argument("--s", type=int, required=True)
    shimura.set_defaults(handler=cmd_verify_shimura)
    regulator = which.add_parser("regulator", parents=[common], help="regulator formula")
    _pair_arguments(regulator, with_j=True)
    regulator.add_argument("--conductor", type=int, help="conductor of L(f x g)")
    regulator.set_defaults(handler=cmd_verify_regulator)

    euler = sub.add_parser("euler-factors", parents=[common], help="local factors of L(f x g)")
    _pair_arguments(euler)
    euler.add_argument("--primes", type=int, nargs="+", required=True)
    euler.set_defaults(handler=cmd_euler_factors)

    series = sub.add_parser("check-series", parents=[common], help="L(chi) D = R L(f x g) coefficientwise")
    _pair_arguments(series, with_j=True)
    series.add_argument("--s", type=mp.mpmathify, help="also compare both sides at s")
    series.add_argument("--terms", type=int, default=1000)
    series.set_defaults(handler=cmd_check_series)

    lvalue = sub.add_parser("lvalue", parents=[common], help="value or derivative of an L-function")
    source = lvalue.add_mutually_exclusive_group()
    source.add_argument("--spec", help="LFunctionSpec JSON file")
    source.add_argument("--chi", help="Dirichlet character N.c (Conrey)")
    lvalue.add_argument("--s", required=True)
    lvalue.add_argument("--derivative", action="store_true")
    lvalue.set_defaults(handler=cmd_lvalue)

    horo = sub.add_parser("horospherical", parents=[common], help="exact boundary values of a divisor")
    given = horo.add_mutually_exclusive_group(required=True)
    given.add_argument("--beta", help="divisor JSON file")
    given.add_argument("--chi", help="use beta_chi for the character N.c")
    horo.add_argument("--N", type=int)
    horo.add_argument("--k", type=int, default=0)
    horo.add_argument("--at", help="a single matrix a,b,c,d")
    horo.set_defaults(handler=cmd_horospherical)

    gauss = sub.add_parser("gauss", parents=[common], help="Gauss sum of a character")
    gauss.add_argument("--chi", required=True)
    gauss.set_defaults(handler=cmd_gauss)

    fetch = sub.add_parser("fetch", parents=[common], help="download coefficients into the cache")
    fetch.add_argument("--label", required=True)
    fetch.add_argument("--n-max", type=int, default=1000)
    fetch.set_defaults(handler=cmd_fetch)

    cache = sub.add_parser("cache", help="cache and run directory housekeeping")
    action = cache.add_subparsers(dest="action", required=True)
    info = action.add_parser("info", parents=[common])
    info.set_defaults(handler=cmd_cache_info)
    clean = action.add_parser("clean", parents=[common])
    clean.add_argument("--days", type=int, default=7)
    clean.set_defaults(handler=cmd_cache_clean)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit status."""
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    started = time.monotonic()
    try:
        return args.handler(args)
    except RankinError as e:
        print(f"\n❌ {type(e).__name__}: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\n\n⚠️  Interrupted by user")
        return 130
    finally:
        LOGGER.info("%s finished in %.1fs", args.command, time.monotonic() - started)


if __name__ == "__main__":
    sys.exit(main())
