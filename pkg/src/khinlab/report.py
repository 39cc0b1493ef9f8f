"""Verification reports: one record per check, JSON and CSV serialisable."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

SCHEMA_VERSION = 1
CSV_COLUMNS = ("check", "param_p", "param_n", "worst_margin", "status")
STATUSES = ("pass", "fail", "indeterminate")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item") and callable(v.item):  # numpy scalars
        return v.item()
    return v


@dataclass
class VerificationReport:
    """Outcome of one numerical check.

    ``worst_margin`` is the smallest slack seen over the grid, oriented so
    that a nonnegative value means the checked inequality held.
    """

    check_name: str
    params: dict = field(default_factory=dict)
    grid_spec: str = ""
    worst_margin: float = 0.0
    status: str = "pass"
    runtime_ms: int = 0
    seed: int | None = None

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")
        self.params = _jsonable(dict(self.params))
        self.worst_margin = float(self.worst_margin)
        self.runtime_ms = int(self.runtime_ms)

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self, deterministic=False):
        d = {"schema": SCHEMA_VERSION, **asdict(self)}
        if not math.isfinite(d["worst_margin"]):
            d["worst_margin"] = repr(d["worst_margin"])
        if deterministic:
            d["runtime_ms"] = 0
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        schema = d.pop("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {schema!r}")
        if isinstance(d.get("worst_margin"), str):
            d["worst_margin"] = float(d["worst_margin"])
        return cls(**d)

    def to_json(self, deterministic=False):
        return json.dumps(self.to_dict(deterministic), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def csv_row(self):
        p = self.params.get("p", "")
        n = self.params.get("n", "")
        return [self.check_name, p, n, repr(self.worst_margin), self.status]


def reports_to_csv(reports):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


def status_from(ok, indeterminate=False):
    if indeterminate:
        return "indeterminate"
    return "pass" if ok else "fail"
