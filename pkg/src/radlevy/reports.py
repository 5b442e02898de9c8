"""Structured pass/fail records shared by the verification and simulation code."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = "1"


def _clean(obj):
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item"):
        return _clean(obj.item())
    return obj


@dataclass
class VerificationReport:
    identity: str
    passed: bool
    max_error: float
    tolerance: float
    grid: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _clean({"schema": SCHEMA_VERSION, "kind": "verification", **asdict(self)})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __bool__(self):
        return bool(self.passed)


@dataclass
class SimulationReport:
    model: str
    k: int
    t: float
    n: int
    seed: int
    statistic: str
    observed: float
    predicted: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _clean({"schema": SCHEMA_VERSION, "kind": "simulation", **asdict(self)})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def __bool__(self):
        return bool(self.passed)
