# modules/forms/lmfdb_client.py
"""
LMFDB Client - fetches newform coefficients from the LMFDB API
Supports: modern and legacy labels, offline mode backed by the JSONL cache
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import mpmath as mp
import requests

from modules.arith.characters import DirichletCharacter
from modules.errors import NetworkUnavailable, NotFound, SchemaMismatch
from modules.forms.newform import Newform
from modules.rankin.euler import EulerFactorSet, decode_number, encode_number
from modules.storage.data_manager import cache_path, euler_cache_path, read_jsonl, write_jsonl_atomic

LOGGER = logging.getLogger(__name__)

# Legacy labels cited in older literature. "39.8.c.a" is the level-39
# weight-8 orbit with the even quadratic character of conductor 13 as
# we read the LMFDB ordering; it is checked through a_3 = -27 on fetch.
LEGACY_LABELS = {
    "39.8.5a": "39.8.c.a",
    "3.8.a": "3.8.a.a",
}


def modern_label(label: str) -> str:
    return LEGACY_LABELS.get(label, label)


class LmfdbClient:
    def __init__(self, base_url: str = "https://www.lmfdb.org/api", timeout: float = 30.0):
        """
        Initialize LMFDB client

        Args:
            base_url: API root, e.g. https://www.lmfdb.org/api
            timeout: seconds per request
        """
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def is_available(self) -> bool:
        """Check if the API answers"""
        try:
            response = requests.get(f"{self.base_url}/mf_newforms/", params={"_format": "json", "label": "11.2.a.a"}, timeout=2)
            return response.status_code == 200
        except requests.RequestException:
            return False

    def _query(self, collection: str, params: Dict[str, Any]) -> List[Dict[str, Any]]:
        try:
            response = requests.get(
                f"{self.base_url}/{collection}/",
                params={**params, "_format": "json"},
                timeout=self.timeout,
            )
        except requests.RequestException as e:
            raise NetworkUnavailable(f"LMFDB request failed: {e}")

        if response.status_code == 404:
            raise NotFound(f"{collection}: nothing for {params}")
        if response.status_code != 200:
            raise NetworkUnavailable(f"LMFDB error {response.status_code}: {response.text[:200]}")
        try:
            data = response.json()
        except ValueError:
            raise SchemaMismatch(f"{collection}: response is not JSON")
        if not isinstance(data, dict) or "data" not in data:
            raise SchemaMismatch(f"{collection}: response has no 'data' field")
        return data["data"]

    def newform_record(self, label: str) -> Dict[str, Any]:
        rows = self._query("mf_newforms", {"label": label})
        if not rows:
            raise NotFound(f"no newform with label {label}")
        return rows[0]

    def embedding_records(self, hecke_orbit_code: int) -> List[Dict[str, Any]]:
        # integer query values carry an "i" prefix in the LMFDB API
        rows = self._query("mf_hecke_cc", {"hecke_orbit_code": f"i{hecke_orbit_code}"})
        return sorted(rows, key=lambda r: (_field(r, "conrey_index"), _field(r, "embedding_index")))

    def fetch_newform(self, label: str, n_max: int, embedding: int = 0, precision: int = 128) -> Newform:
        """
        Newform with at least n_max coefficients.

        Dimension-1 forms use the exact traces; higher dimension forms use
        the double precision embedding values of mf_hecke_cc.
        """
        record = self.newform_record(label)
        weight = int(_field(record, "weight"))
        level = int(_field(record, "level"))
        dim = int(_field(record, "dim"))

        if dim == 1:
            traces = _field(record, "traces")
            if len(traces) < n_max:
                raise NotFound(f"{label}: LMFDB stores {len(traces)} coefficients, need {n_max}")
            conrey = min(int(c) for c in _field(record, "conrey_indexes"))
            coeffs = {n: int(traces[n - 1]) for n in range(1, len(traces) + 1)}
            embedding = 0
        else:
            rows = self.embedding_records(int(_field(record, "hecke_orbit_code")))
            if embedding >= len(rows):
                raise NotFound(f"{label} has {len(rows)} embeddings, asked for {embedding}")
            row = rows[embedding]
            conrey = int(_field(row, "conrey_index"))
            values = _field(row, "an_normalized")
            if len(values) < n_max:
                raise NotFound(f"{label}: LMFDB stores {len(values)} coefficients, need {n_max}")
            coeffs = {}
            # mf_hecke_cc holds doubles
            precision = min(precision, 53)
            with mp.workprec(precision):
                # a_n = an_normalized * n^((weight-1)/2)
                for n, (re, im) in enumerate(values, start=1):
                    scale = mp.power(n, mp.mpf(weight - 1) / 2)
                    coeffs[n] = mp.mpc(re, im) * scale

        return Newform(
            weight=weight,
            level=level,
            character=DirichletCharacter.from_conrey(level, conrey),
            coeffs=coeffs,
            label=label,
            source="lmfdb",
            embedding=embedding,
            precision=precision,
        )

    def lfunction_bad_factors(self, lfunction_label: str) -> Dict[int, List[Any]]:
        """
        bad_lfactors of an lfunc_lfunctions record, as {p: [c0, c1, ...]}.

        Args:
            lfunction_label: LMFDB L-function label of L(f x g, s)
        """
        rows = self._query("lfunc_lfunctions", {"label": lfunction_label})
        if not rows:
            raise NotFound(f"no L-function with label {lfunction_label}")
        factors = {}
        for entry in _field(rows[0], "bad_lfactors"):
            if not isinstance(entry, list) or len(entry) != 2:
                raise SchemaMismatch(f"{lfunction_label}: malformed bad_lfactors entry {entry!r}")
            p, coeffs = entry
            factors[int(p)] = list(coeffs)
        return factors


def _field(record: Dict[str, Any], key: str) -> Any:
    if key not in record:
        raise SchemaMismatch(f"LMFDB record is missing '{key}'")
    return record[key]


def fetch_lmfdb(
    label: str,
    n_max: int,
    cache_dir: Path,
    offline: bool = False,
    base_url: str = "https://www.lmfdb.org/api",
    embedding: int = 0,
) -> Newform:
    """
    Fetch a newform, preferring the cache

    Args:
        label: legacy or modern newform label
        n_max: coefficients needed
        cache_dir: cache directory (<label>.jsonl files)
        offline: never touch the network

    Returns:
        Newform (cache hit or freshly fetched and cached)
    """
    label = modern_label(label)
    path = cache_path(cache_dir, label)
    if path.exists():
        cached = Newform.load(path)
        if cached.n_max >= n_max:
            LOGGER.debug("cache hit %s", path)
            return cached
        LOGGER.info("cache for %s has %d coefficients, need %d", label, cached.n_max, n_max)

    if offline:
        raise NetworkUnavailable(
            f"{label} is not cached with {n_max} coefficients in {cache_dir} and offline mode is on"
        )

    client = LmfdbClient(base_url)
    LOGGER.info("fetching %s from %s", label, client.base_url)
    form = client.fetch_newform(label, n_max, embedding=embedding)
    form.save(path)
    return Newform.load(path)


def fetch_euler_factors(
    f_label: str,
    g_label: str,
    cache_dir: Path,
    offline: bool = False,
    base_url: str = "https://www.lmfdb.org/api",
    lfunction: Optional[str] = None,
) -> EulerFactorSet:
    """
    Database local factors of L(f x g, s), preferring the cache

    Args:
        f_label, g_label: the pair, in the order the factors refer to
        cache_dir: cache directory (<f>__<g>.euler.jsonl files)
        offline: never touch the network
        lfunction: LMFDB L-function label to fetch when nothing is cached

    Returns:
        EulerFactorSet tagged "database"; empty when no source is known
    """
    f_label, g_label = modern_label(f_label), modern_label(g_label)
    path = euler_cache_path(cache_dir, f_label, g_label)
    factors = EulerFactorSet()
    if path.exists():
        for row in read_jsonl(path):
            if "header" in row:
                continue
            factors.add(int(row["p"]), [decode_number(c) for c in row["coefficients"]], "database")
        LOGGER.debug("cached local factors of %s x %s at %s", f_label, g_label, sorted(factors.factors))
        return factors

    if lfunction is None:
        return factors
    if offline:
        raise NetworkUnavailable(f"local factors of {f_label} x {g_label} are not cached and offline mode is on")

    client = LmfdbClient(base_url)
    LOGGER.info("fetching local factors of %s from %s", lfunction, client.base_url)
    for p, coeffs in client.lfunction_bad_factors(lfunction).items():
        factors.add(p, [decode_number(c) for c in coeffs], "database")
    header = {"f": f_label, "g": g_label, "lfunction": lfunction, "source": "lmfdb"}
    write_jsonl_atomic(path, [{"header": header}, *(
        {"p": p, "coefficients": [encode_number(c) for c in poly], "source": "database"}
        for p, poly in sorted(factors.factors.items())
    )])
    return factors
