"""JSON-friendly pass/fail records shared by the verifier suites."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class CheckRecord:
    check: str
    model: str
    params: dict = field(default_factory=dict)
    value: float = 0.0
    tolerance: float = 0.0
    passed: bool = False

    @classmethod
    def below(cls, check: str, model: str, params: dict, value: float, tolerance: float) -> CheckRecord:
        ok = math.isfinite(value) and value < tolerance
        return cls(check, model, dict(params), float(value), float(tolerance), ok)

    def to_json(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["value"] = float(f"{self.value:.6e}")
        return d


def all_passed(records) -> bool:
    return all(r.passed for r in records)
