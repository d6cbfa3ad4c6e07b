"""Inequality-check records shared by the verification routines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    """One verified inequality ``lhs <= rhs + slack``."""

    name: str
    lhs: float
    rhs: float
    slack: float = 0.0
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.lhs) and self.lhs <= self.rhs + self.slack

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)
