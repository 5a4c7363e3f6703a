"""Flat output records and their text formats (delimited text, JSON lines)."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, fields

from .noise import OunParams, RtnParams, UnitaryParams

FORMATS = ("csv", "jsonl")


def fmt_float(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def _parse_opt_float(s):
    return None if s == "" else float(s)


@dataclass(frozen=True)
class OutputRecord:
    channel: str
    a: float | None
    gamma: float | None
    Gamma: float | None
    Omega: float | None
    regime: str
    time_unit: str
    dt: float
    theta: float
    phi: float
    C01: float
    C12: float
    C02: float
    K3: float
    K3prime: float
    tag: str = "grid"

    @classmethod
    def from_result(cls, channel, result, time_unit="t", tag="grid"):
        p = channel.params
        a = gamma = Gamma = Omega = None
        if isinstance(p, RtnParams):
            a, gamma = p.a, p.gamma
        elif isinstance(p, OunParams):
            Gamma, gamma = p.Gamma, p.gamma
        elif isinstance(p, UnitaryParams):
            Omega = p.Omega
        dt = result.dt * gamma if time_unit == "nu" else result.dt
        tr = result.triple
        return cls(
            channel.kind, a, gamma, Gamma, Omega, result.regime.value, time_unit,
            dt, result.theta, result.phi, tr.C01, tr.C12, tr.C02,
            result.K3, result.K3prime, tag,
        )


@dataclass(frozen=True)
class RootRecord:
    dt: float
    nu: float
    family: str
    residual: float
    K3: float
    dK3_ddt: float
    stationary: bool

    @classmethod
    def from_root(cls, r):
        return cls(r.dt, r.nu, r.family, r.residual, r.k3, r.dk3_ddt, r.stationary)


_STR_FIELDS = {"channel", "regime", "time_unit", "tag", "family"}
_OPT_FIELDS = {"a", "gamma", "Gamma", "Omega"}


def header(record_type):
    return [f.name for f in fields(record_type)]


def _to_text(name, value):
    if name in _STR_FIELDS:
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    return fmt_float(value)


def _from_text(name, text, record_type):
    if name in _STR_FIELDS:
        return text
    if name == "stationary":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r}")
        return text == "true"
    if name in _OPT_FIELDS:
        return _parse_opt_float(text)
    return float(text)


def serialize(records, record_type=OutputRecord, fmt="csv"):
    """Render records as text with LF line endings and a header line."""
    names = header(record_type)
    buf = io.StringIO()
    if fmt == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for r in records:
            w.writerow([_to_text(n, getattr(r, n)) for n in names])
    elif fmt == "jsonl":
        buf.write(json.dumps({"fields": names}) + "\n")
        for r in records:
            row = {n: _to_text(n, getattr(r, n)) for n in names}
            buf.write(json.dumps(row) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def parse(text, record_type=OutputRecord, fmt="csv"):
    names = header(record_type)
    out = []
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != names:
            raise ValueError("missing or mismatched header")
        for row in rows[1:]:
            out.append(record_type(**{n: _from_text(n, v, record_type) for n, v in zip(names, row)}))
    elif fmt == "jsonl":
        lines = text.splitlines()
        if not lines or json.loads(lines[0]).get("fields") != names:
            raise ValueError("missing or mismatched header")
        for line in lines[1:]:
            d = json.loads(line)
            out.append(record_type(**{n: _from_text(n, d[n], record_type) for n in names}))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return out
