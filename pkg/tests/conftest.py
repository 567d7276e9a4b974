import os
import shutil
import sys
from pathlib import Path

import mpmath as mp
import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from modules.config import RunConfig  # noqa: E402
from modules.forms.eta import eta_newform  # noqa: E402

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(autouse=True)
def default_precision():
    with mp.workprec(128):
        yield


@pytest.fixture(scope="session")
def delta():
    return eta_newform("1.12.a.a", 300)


@pytest.fixture(scope="session")
def form_11a():
    return eta_newform("11.2.a.a", 300)


@pytest.fixture(scope="session")
def form_3_8():
    return eta_newform("3.8.a.a", 300)


@pytest.fixture(scope="session")
def form_7_3():
    return eta_newform("7.3.b.a", 300)


@pytest.fixture
def fixture_cache(tmp_path):
    """Cache directory seeded with the stored database fixtures."""
    cache = tmp_path / "cache"
    cache.mkdir()
    for path in FIXTURES.glob("*.jsonl"):
        shutil.copy(path, cache / path.name)
    return cache


@pytest.fixture
def config(tmp_path, fixture_cache):
    return RunConfig(cache_dir=fixture_cache, out_dir=tmp_path / "runs", offline=True)


@pytest.fixture
def online():
    if os.environ.get("RANKIN_OFFLINE"):
        pytest.skip("RANKIN_OFFLINE is set")
