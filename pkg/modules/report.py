# modules/report.py
"""
Verification reports shared by the Shimura and regulator checks.
"""

import logging
import subprocess
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import mpmath as mp

LOGGER = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def resolve_sign(lhs, rhs, signs: Sequence[int] = (1, -1)) -> int:
    """The sign minimising |lhs - sign * rhs|; ties go to +1."""
    return min(signs, key=lambda e: (abs(mp.mpc(lhs) - e * mp.mpc(rhs)), -e))


def build_stamp() -> str:
    """git describe of the working tree, or 'unversioned'."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"], capture_output=True, text=True, timeout=5, check=False
        )
    except (OSError, subprocess.SubprocessError) as e:
        LOGGER.debug("git describe unavailable: %s", e)
        return "unversioned"
    return out.stdout.strip() or "unversioned"


def _num(z) -> Any:
    z = mp.mpc(z)
    return [mp.nstr(z.real, 20), mp.nstr(z.imag, 20)]


@dataclass
class VerificationReport:
    identity: str
    lhs: Any
    rhs: Any
    sign: int = 1
    tolerance: Optional[float] = None
    parameters: Dict[str, Any] = field(default_factory=dict)
    runtime: float = 0.0
    precision: int = 53
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def abs_err(self) -> mp.mpf:
        return abs(mp.mpc(self.lhs) - self.sign * mp.mpc(self.rhs))

    @property
    def rel_err(self) -> mp.mpf:
        scale = max(abs(mp.mpc(self.lhs)), abs(mp.mpc(self.rhs)))
        if scale == 0:
            return mp.mpf(0)
        return self.abs_err / scale

    @property
    def passed(self) -> bool:
        return self.tolerance is not None and self.rel_err < self.tolerance

    @classmethod
    def resolved(cls, identity: str, lhs, rhs, **kwargs) -> "VerificationReport":
        """Report with the sign chosen by resolve_sign."""
        return cls(identity, lhs, rhs, sign=resolve_sign(lhs, rhs), **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "identity": self.identity,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "sign": self.sign,
            "abs_err": mp.nstr(self.abs_err, 6),
            "rel_err": mp.nstr(self.rel_err, 6),
            "tolerance": self.tolerance,
            "passed": self.passed,
            "parameters": self.parameters,
            # runtime stays out of the deterministic body; see timing sidecar
            "precision": self.precision,
            "details": self.details,
        }
