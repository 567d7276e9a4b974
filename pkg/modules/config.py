# modules/config.py
"""
Run configuration: precision, effort, cache and output locations.
"""

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from modules.errors import ConfigError

DEFAULT_LMFDB_URL = "https://www.lmfdb.org/api"

# Acceptance tolerances, keyed by identity name
DEFAULT_TOLERANCES = {
    "shimura": 1e-6,
    "regulator": 1e-3,
    "fe_selftest": 1e-8,
    "bridge": 1e-8,
    "continuation": 1e-10,
    "series_identity": 1e-8,
}


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


@dataclass
class RunConfig:
    precision: int = 128
    effort: int = 1
    truncation_height: Optional[float] = None
    workers: int = 1
    cache_dir: Path = Path("data/cache")
    offline: bool = False
    lmfdb_url: str = DEFAULT_LMFDB_URL
    out_dir: Path = Path("data/runs")
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    fault_inject: Optional[str] = None

    def __post_init__(self):
        self.cache_dir = Path(self.cache_dir)
        self.out_dir = Path(self.out_dir)
        if self.precision < 64:
            raise ConfigError(f"precision must be >= 64 bits, got {self.precision}")
        if self.effort < 1:
            raise ConfigError(f"effort must be >= 1, got {self.effort}")
        if self.truncation_height is not None and self.truncation_height <= 1:
            raise ConfigError("truncation height must exceed 1")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_env(cls, **overrides: Any) -> "RunConfig":
        """
        Build a config from RANKIN_* environment variables, then overrides.

        Overrides whose value is None are ignored so argparse namespaces can
        be passed straight through.
        """
        values: Dict[str, Any] = {}
        if os.environ.get("RANKIN_LMFDB_URL"):
            values["lmfdb_url"] = os.environ["RANKIN_LMFDB_URL"]
        if _env_flag("RANKIN_OFFLINE"):
            values["offline"] = True
        if os.environ.get("RANKIN_CACHE_DIR"):
            values["cache_dir"] = Path(os.environ["RANKIN_CACHE_DIR"])
        if os.environ.get("RANKIN_WORKERS"):
            values["workers"] = int(os.environ["RANKIN_WORKERS"])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def tolerance(self, name: str) -> float:
        try:
            return self.tolerances[name]
        except KeyError:
            raise ConfigError(f"no tolerance configured for '{name}'")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["cache_dir"] = str(self.cache_dir)
        data["out_dir"] = str(self.out_dir)
        data["tolerances"] = {k: self.tolerances[k] for k in sorted(self.tolerances)}
        return data
