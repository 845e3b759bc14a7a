"""Rectangular result tables with CSV and JSON emitters.

CSV files start with ``# key=value`` metadata lines (gnuplot skips them),
followed by an RFC 4180 header and rows.  Floats use ``repr``, the shortest
string that round-trips.  JSON files hold ``{"meta": ..., "columns": ...,
"rows": [{column: value}, ...]}``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(s):
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = list(self.columns)
        for row in self.rows:
            self._check(row)

    def _check(self, row):
        if len(row) != len(self.columns):
            raise ValueError(f"row {row!r} has {len(row)} cells, expected {len(self.columns)}")

    def append(self, row):
        row = tuple(row)
        self._check(row)
        self.rows.append(row)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for k in sorted(self.meta):
            buf.write(f"# {k}={self.meta[k]}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "meta": {k: self.meta[k] for k in sorted(self.meta)},
            "columns": self.columns,
            "rows": [{c: _json_value(v) for c, v in zip(self.columns, r)} for r in self.rows],
        }
        return json.dumps(doc, indent=1) + "\n"

    def dumps(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        lines = text.splitlines(keepends=True)
        meta = {}
        while lines and lines[0].startswith("# "):
            k, _, v = lines.pop(0)[2:].rstrip("\r\n").partition("=")
            meta[k] = _parse(v)
        reader = csv.reader(io.StringIO("".join(lines)))
        header = next(reader)
        rows = [tuple(_parse(c) for c in r) for r in reader]
        return cls(header, rows, meta)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        cols = doc["columns"]
        rows = [tuple(_parse(r[c]) if isinstance(r[c], str) else r[c] for c in cols) for r in doc["rows"]]
        return cls(cols, rows, doc["meta"])
