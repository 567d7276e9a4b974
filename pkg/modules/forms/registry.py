# modules/forms/registry.py
"""
Resolve a form argument ("eta:<name>", "file:<path>" or an LMFDB label)
"""

import logging
from pathlib import Path

from modules.config import RunConfig
from modules.forms.eta import eta_newform
from modules.forms.hecke import hecke_validate
from modules.forms.lmfdb_client import fetch_lmfdb
from modules.forms.newform import Newform

LOGGER = logging.getLogger(__name__)


def load_newform(spec: str, config: RunConfig, n_max: int = 200, validate: bool = True) -> Newform:
    """
    Load a newform and run the Hecke checks on what was loaded

    Args:
        spec: "eta:delta", "file:tests/fixtures/x.jsonl" or "13.2.e.a"
        config: run configuration (cache, offline, base URL)
        n_max: coefficients to make available

    Returns:
        Newform
    """
    if spec.startswith("eta:"):
        form = eta_newform(spec[4:], n_max)
    elif spec.startswith("file:"):
        form = Newform.load(Path(spec[5:]))
    else:
        form = fetch_lmfdb(spec, n_max, config.cache_dir, offline=config.offline, base_url=config.lmfdb_url)

    if validate:
        bad = hecke_validate(form, min(n_max, form.n_max))
        for v in bad:
            LOGGER.warning("%s: %s", form.label, v)
        if bad:
            LOGGER.warning("%s fails %d Hecke checks", form.label, len(bad))
    return form
