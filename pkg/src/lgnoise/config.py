"""Run configuration: ``key = value`` files merged with command-line flags."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields, replace

from .noise import NoiseChannel


class ConfigError(ValueError):
    """Invalid run configuration; ``where`` names the offending field or line."""

    def __init__(self, message, where=None):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


_ANGLE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?:(?P<num>\d+(?:\.\d*)?|\.\d+)\s*\*?\s*)?pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$"
)


def parse_number(text, where=None):
    """Float, or a multiple of pi such as ``pi/2``, ``-3pi/4``, ``2*pi``."""
    s = str(text).strip()
    m = _ANGLE.match(s)
    if m:
        v = math.pi * float(m.group("num") or 1.0) / float(m.group("den") or 1.0)
        return -v if m.group("sign") == "-" else v
    try:
        v = float(s)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}", where) from None
    if not math.isfinite(v):
        raise ConfigError(f"not finite: {text!r}", where)
    return v


def parse_range(text, where=None):
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"range must be 'lo,hi', got {text!r}", where)
    lo, hi = (parse_number(p, where) for p in parts)
    if hi < lo:
        raise ConfigError(f"empty range {text!r}", where)
    return lo, hi


@dataclass(frozen=True)
class RunConfig:
    channel: str | None = None
    a: float | None = None
    tau: float | None = None
    gamma_rtn: float | None = None
    Gamma: float | None = None
    gamma: float | None = None
    Omega: float | None = None
    theta: float | None = None
    phi: float | None = None
    theta_range: tuple | None = None
    phi_range: tuple | None = None
    theta_steps: int = 181
    phi_steps: int = 181
    dt: float | None = None
    dt_range: tuple | None = None
    steps: int | None = None
    time_unit: str = "t"
    out: str | None = None
    format: str = "csv"
    seed: int = 0
    samples: int = 200

    def build_channel(self):
        c = self.channel
        if c is None:
            raise ConfigError("channel is required", "channel")
        try:
            if c == "rtn":
                if self.a is None:
                    raise ConfigError("RTN needs a", "a")
                if (self.tau is None) == (self.gamma_rtn is None):
                    raise ConfigError("RTN needs exactly one of tau or gamma-rtn", "tau")
                return NoiseChannel.rtn(self.a, gamma=self.gamma_rtn, tau=self.tau)
            if c == "oun":
                if self.Gamma is None or self.gamma is None:
                    raise ConfigError("OUN needs Gamma and gamma", "Gamma" if self.Gamma is None else "gamma")
                return NoiseChannel.oun(self.Gamma, self.gamma)
            if c == "unitary":
                if self.Omega is None:
                    raise ConfigError("unitary channel needs Omega", "Omega")
                return NoiseChannel.unitary(self.Omega)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(str(e), "channel") from None
        raise ConfigError(f"unknown channel {c!r}", "channel")

    def time_scale(self, channel):
        """Multiplier taking config times to raw channel time."""
        if self.time_unit == "nu":
            if channel.kind != "rtn":
                raise ConfigError("time-unit nu is only defined for RTN", "time_unit")
            return 1.0 / channel.params.gamma
        return 1.0

    def validate(self, need_dt_range=False, need_angle_ranges=False):
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"unknown format {self.format!r}", "format")
        if self.time_unit not in ("t", "nu"):
            raise ConfigError(f"unknown time unit {self.time_unit!r}", "time_unit")
        if need_dt_range and self.dt_range is None and self.dt is None:
            raise ConfigError("dt-range is required", "dt_range")
        if self.dt_range is not None and self.steps is not None and self.steps < 2:
            raise ConfigError("steps must be at least 2", "steps")
        if need_angle_ranges:
            if self.theta_range is None and self.theta is None:
                raise ConfigError("theta-range is required", "theta_range")
            if self.phi_range is None and self.phi is None:
                raise ConfigError("phi-range is required", "phi_range")
        for name in ("theta_steps", "phi_steps"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be at least 2", name)
        if self.samples < 0:
            raise ConfigError("samples must be non-negative", "samples")
        return self


_CONVERTERS = {
    "channel": str,
    "time_unit": str,
    "out": str,
    "format": str,
    "theta_range": parse_range,
    "phi_range": parse_range,
    "dt_range": parse_range,
    "theta_steps": int,
    "phi_steps": int,
    "steps": int,
    "seed": int,
    "samples": int,
}
FIELD_NAMES = {f.name for f in fields(RunConfig)}


def convert(name, raw, where=None):
    conv = _CONVERTERS.get(name)
    try:
        if conv is None:
            return parse_number(raw, where)
        if conv in (parse_range,):
            return conv(raw, where)
        return conv(raw)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {name}", where) from None


def normalise_key(key):
    k = key.strip().lstrip("-").replace("-", "_")
    return k


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines. ``#`` starts a comment. Unknown keys are errors."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        where = f"{source}:{lineno}"
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {line.strip()!r}", where)
        key, raw = stripped.split("=", 1)
        name = normalise_key(key)
        if name not in FIELD_NAMES:
            raise ConfigError(f"unknown key {key.strip()!r}", where)
        values[name] = convert(name, raw.strip(), where)
    return values


def merge(file_values, flag_values):
    """Flags win over file values; ``None`` flags mean 'not given'."""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return replace(RunConfig(), **merged)
