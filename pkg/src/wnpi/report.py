"""Machine-readable verification reports.

Reports serialize to JSON with stable key order and shortest round-trip
float encoding, so a fixed seed yields byte-identical output.  Wall-clock
timings are recorded but excluded from serialization unless explicitly
requested, keeping the default reports deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

STATUSES = ("pass", "fail", "skipped")


@dataclass(frozen=True)
class CheckRecord:
    """One verification check: identity, measured deviation and verdict."""

    check_id: str
    status: str
    deviation: Optional[float] = None
    tolerance: Optional[float] = None
    runtime_ms: Optional[float] = None
    note: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    def to_obj(self, include_timings: bool = False) -> dict:
        out = {
            "id": self.check_id,
            "status": self.status,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "note": self.note,
        }
        if include_timings:
            out["runtime_ms"] = self.runtime_ms
        return out

    @classmethod
    def from_obj(cls, obj: dict) -> "CheckRecord":
        return cls(
            check_id=obj["id"],
            status=obj["status"],
            deviation=obj.get("deviation"),
            tolerance=obj.get("tolerance"),
            runtime_ms=obj.get("runtime_ms"),
            note=obj.get("note", ""),
        )


@dataclass(frozen=True)
class RunReport:
    """Outcome of one verification suite run."""

    suite: str
    seed: int
    tool_version: str
    grid_params: dict = field(default_factory=dict)
    checks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "checks", tuple(self.checks))
        ids = [c.check_id for c in self.checks]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate check ids: {dupes}")

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def counts(self) -> dict:
        return {s: sum(1 for c in self.checks if c.status == s) for s in STATUSES}

    def to_obj(self, include_timings: bool = False) -> dict:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "tool_version": self.tool_version,
            "grid_params": dict(sorted(self.grid_params.items())),
            "passed": self.passed,
            "checks": [c.to_obj(include_timings) for c in self.checks],
        }

    def to_json(self, include_timings: bool = False) -> str:
        return json.dumps(self.to_obj(include_timings), indent=2) + "\n"

    @classmethod
    def from_obj(cls, obj: dict) -> "RunReport":
        return cls(
            suite=obj["suite"],
            seed=obj["seed"],
            tool_version=obj["tool_version"],
            grid_params=obj.get("grid_params", {}),
            checks=tuple(CheckRecord.from_obj(c) for c in obj.get("checks", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_obj(json.loads(text))
