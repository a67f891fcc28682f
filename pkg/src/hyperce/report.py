"""Pass/fail report value objects shared by every verifier."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

AUTOMATIC = "automatic (finite discrete)"


@dataclass(frozen=True)
class Check:
    passed: bool
    witness: Any = None
    note: str = ""

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"passed": self.passed}
        if self.witness is not None:
            out["witness"] = _jsonable(self.witness)
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class Report:
    """Ordered collection of named checks plus free-form metadata (seeds, counts)."""

    name: str
    checks: dict[str, Check] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __getitem__(self, key: str) -> Check:
        return self.checks[key]

    def failures(self) -> dict[str, Check]:
        return {k: c for k, c in self.checks.items() if not c.passed}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checks": {k: c.to_dict() for k, c in self.checks.items()},
            **({"meta": _jsonable(self.meta)} if self.meta else {}),
        }


def automatic() -> Check:
    return Check(True, note=AUTOMATIC)


def _jsonable(x):
    from fractions import Fraction

    import numpy as np

    from ._exact import frac_str

    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Fraction):
        return frac_str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
