"""Structured pass/fail reports."""

from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any


def _clean(value: Any) -> Any:
    """Make ``value`` JSON-safe; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, complex):
        return [_clean(value.real), _clean(value.imag)]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    return str(value)


@dataclass
class Check:
    name: str
    passed: bool
    metric: float
    tol: float
    seconds: float | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "pass": bool(self.passed),
            "metric": _clean(float(self.metric)),
            "tol": _clean(float(self.tol)),
            "seconds": self.seconds if timings else None,
        }
        if self.detail:
            out["detail"] = _clean(self.detail)
        return out


@dataclass
class CheckReport:
    checks: list[Check] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, metric: float, tol: float,
            seconds: float | None = None, **detail) -> Check:
        check = Check(name, bool(passed), float(metric), float(tol), seconds, detail)
        self.checks.append(check)
        return check

    @contextmanager
    def timed(self, name: str, tol: float):
        """Time a block that fills a dict with ``passed``, ``metric`` and optional detail."""
        slot: dict = {}
        t0 = time.perf_counter()
        yield slot
        seconds = time.perf_counter() - t0
        detail = {k: v for k, v in slot.items() if k not in ("passed", "metric")}
        self.add(name, slot.get("passed", False), slot.get("metric", math.nan), tol, seconds, **detail)

    def extend(self, other: "CheckReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.metric, c.tol, c.seconds, c.detail))

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self, timings: bool = False) -> dict:
        return {
            "meta": _clean(self.meta),
            "checks": {c.name: c.to_dict(timings) for c in self.checks},
            "passed": self.passed,
            "n_pass": sum(c.passed for c in self.checks),
            "n_checks": len(self.checks),
        }

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), indent=2, sort_keys=True) + "\n"

    def summary_lines(self) -> list[str]:
        return [
            f"{'PASS' if c.passed else 'FAIL'}  {c.name}  metric={c.metric:.3g}  tol={c.tol:.3g}"
            for c in self.checks
        ]
