"""Check results and the machine-readable report format."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .series import PowerSeries, SeriesError, format_scalar, to_json

SCHEMA = "mirrorforge-report-v1"


@dataclass
class Check:
    """Outcome of one exact identity check.

    ``first_failure`` is ``(order, residual)`` for the lowest failing coefficient.
    """

    name: str
    passed: bool
    first_failure: tuple[int, Any] | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.passed and self.first_failure is not None:
            raise ValueError("a passing check cannot carry a failure")

    def __bool__(self):
        return self.passed


def residual_check(name: str, residual: PowerSeries, **detail) -> Check:
    k = residual.valuation()
    if k is None:
        return Check(name, True, None, {"order": residual.order, **detail})
    return Check(name, False, (k, residual[k]), {"order": residual.order, **detail})


def equality_check(name: str, lhs: PowerSeries, rhs: PowerSeries, **detail) -> Check:
    return residual_check(name, lhs - rhs, **detail)


@dataclass
class VerificationReport:
    suite: str
    checks: list[Check]
    timing: float = 0.0
    config: dict = field(default_factory=dict)
    skipped: str | None = None

    @property
    def passed(self) -> bool:
        return self.skipped is None and all(c.passed for c in self.checks)

    @property
    def first_failure(self):
        for c in self.checks:
            if not c.passed:
                return {"check": c.name, "order": c.first_failure[0] if c.first_failure else None,
                        "residual": jsonable(c.first_failure[1]) if c.first_failure else None}
        return None

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "skipped": self.skipped,
            "first_failure": self.first_failure,
            "checks": [
                {"name": c.name, "pass": c.passed,
                 "first_failure": None if c.first_failure is None
                 else [c.first_failure[0], jsonable(c.first_failure[1])],
                 "detail": jsonable(c.detail)}
                for c in self.checks
            ],
            "timing": round(self.timing, 3),
            "config": jsonable(self.config),
        }


def jsonable(obj):
    """Exact-string rendering of nested results; no floats except timing."""
    if isinstance(obj, PowerSeries):
        return {"var": obj.var, "order": obj.order, "coeffs": to_json(obj)}
    if isinstance(obj, (Fraction,)):
        return format_scalar(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    try:
        return format_scalar(obj)
    except (TypeError, ValueError, SeriesError):
        return str(obj)


def emit(payload: dict | list, fmt: str = "json") -> str:
    """Serialize a report (or list of reports) as json, csv, or a pretty table."""
    if isinstance(payload, list):
        doc = {"schema": SCHEMA, "reports": [jsonable(p) for p in payload]}
    else:
        doc = {"schema": SCHEMA, **jsonable(payload)}
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=False)
    if fmt == "csv":
        return _to_csv(doc)
    if fmt == "pretty":
        return _to_pretty(doc)
    raise ValueError(f"unknown format {fmt!r}")


def _flatten(prefix: str, obj, rows: list):
    if isinstance(obj, dict):
        if set(obj) >= {"var", "coeffs"}:
            for k, c in enumerate(obj["coeffs"]):
                rows.append((f"{prefix}[{k}]", c))
            return
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, rows)
    else:
        rows.append((prefix, obj))


def _to_csv(doc: dict) -> str:
    rows: list = []
    _flatten("", doc, rows)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["key", "value"])
    w.writerows(rows)
    return buf.getvalue()


def _to_pretty(doc: dict) -> str:
    reports = doc.get("reports", [doc])
    lines = []
    for r in reports:
        if "checks" not in r:
            rows: list = []
            _flatten("", r, rows)
            width = max((len(k) for k, _ in rows), default=0)
            lines.extend(f"{k.ljust(width)}  {v}" for k, v in rows)
            continue
        status = "SKIP" if r.get("skipped") else ("PASS" if r["pass"] else "FAIL")
        lines.append(f"[{status}] {r['suite']}  ({r['timing']}s)")
        width = max((len(c["name"]) for c in r["checks"]), default=0)
        for c in r["checks"]:
            mark = "ok" if c["pass"] else f"FAIL at {c['first_failure']}"
            lines.append(f"    {c['name'].ljust(width)}  {mark}")
        if r.get("skipped"):
            lines.append(f"    skipped: {r['skipped']}")
    return "\n".join(lines)
