"""Extrema of K3 in the measurement spacing, grid maximisation, violation counts.

With equal spacing and theta = pi/2, K3 = 2 D(dt) - D(2 dt). Setting its
derivative to zero gives

* RTN, ``mu = i mu0``:  ``2 e^{-nu} cosh(mu0 nu) = 1``
* RTN, ``mu`` real:     ``2 e^{-nu} cos(mu nu) = 1``  or  ``sin(mu nu) = 0``
* OUN:                  ``F(dt) = (1 + e^{-gamma dt}) q(2 dt) / q(dt) = 1``

The ``sin(mu nu) = 0`` family comes from the factor ``sin(mu nu)`` shared by
``Lambda'(nu)`` and ``Lambda'(2 nu)``; those roots are returned with
``family="sin"``. For general theta, K3 = cos^2 + sin^2 B(dt) has the same
stationary points in dt (unless sin theta = 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .correlators import LGResult, k3, k3_values
from .noise import NoiseChannel, OunParams, RtnParams, mu

RESIDUAL_TOL = 1e-9
STATIONARY_TOL = 1e-6
DEFAULT_SCAN = 10_000
MAX_SCAN = 5_000_000
POLISH_XTOL = 1e-10


class ConditionKind(str, enum.Enum):
    RTN_MARKOV = "rtn-markov"
    RTN_NON_MARKOV = "rtn-non-markov"
    OUN = "oun"


@dataclass(frozen=True)
class ExtremumCondition:
    kind: ConditionKind
    channel: NoiseChannel

    @classmethod
    def for_channel(cls, channel):
        p = channel.params
        if isinstance(p, RtnParams):
            m = mu(p)
            kind = ConditionKind.RTN_NON_MARKOV if m.real > 0 else ConditionKind.RTN_MARKOV
            return cls(kind, channel)
        if isinstance(p, OunParams):
            return cls(ConditionKind.OUN, channel)
        raise ValueError("extremum conditions exist only for RTN and OUN channels")

    @property
    def rate(self):
        """Factor converting raw time to the condition's natural variable."""
        p = self.channel.params
        return p.gamma if isinstance(p, RtnParams) else 1.0

    def lhs(self, dt):
        """Left-hand side of the condition (target value 1), vectorised over dt."""
        dt = np.asarray(dt, dtype=float)
        p = self.channel.params
        if self.kind is ConditionKind.OUN:
            val = np.exp(self.log_f(dt))
        else:
            nu = p.gamma * dt
            m = mu(p)
            if self.kind is ConditionKind.RTN_NON_MARKOV:
                val = 2.0 * np.exp(-nu) * np.cos(m.real * nu)
            else:
                m0 = abs(m.imag)
                val = np.exp(-(1.0 - m0) * nu) + np.exp(-(1.0 + m0) * nu)
        return val if val.ndim else float(val)

    def log_f(self, dt):
        """``log F`` for OUN, written so large ``gamma dt`` cannot overflow."""
        p = self.channel.params
        dt = np.asarray(dt, dtype=float)
        x = p.gamma * dt
        e1 = np.exp(-x)
        return np.log1p(e1) - 0.5 * p.Gamma * (dt + (e1 * e1 - e1) / p.gamma)

    def residual(self, dt):
        if self.kind is ConditionKind.OUN:
            return float(abs(np.expm1(self.log_f(dt))))
        return abs(self.lhs(dt) - 1.0)


@dataclass(frozen=True)
class Root:
    dt: float
    nu: float
    family: str
    residual: float
    k3: float
    dk3_ddt: float

    @property
    def stationary(self):
        return abs(self.dk3_ddt) < STATIONARY_TOL


def k3_pi2(channel, dt):
    return k3_values(channel, math.pi / 2, dt)[0]


def dk3_ddt_fd(channel, dt):
    """Centred finite difference of K3(dt) at theta = pi/2."""
    p = channel.params
    if isinstance(p, RtnParams):
        # step in the dimensionless variable, resolved against the oscillation
        h_nu = 1e-5 / max(1.0, abs(mu(p)))
        h = h_nu / p.gamma
    else:
        h = 1e-5 * max(dt, 1e-8)
    h = min(h, 0.5 * dt) if dt > 0 else h
    return float((k3_pi2(channel, dt + h) - k3_pi2(channel, dt - h)) / (2.0 * h))


def _make_root(cond, dt, family, residual):
    ch = cond.channel
    return Root(
        dt=float(dt),
        nu=float(dt * cond.rate),
        family=family,
        residual=float(residual),
        k3=float(k3_pi2(ch, dt)),
        dk3_ddt=dk3_ddt_fd(ch, dt),
    )


def _scan_size(cond, lo, hi, scan_points):
    n = scan_points
    if cond.kind is ConditionKind.RTN_NON_MARKOV:
        m = mu(cond.channel.params).real
        periods = m * cond.rate * (hi - lo) / (2.0 * math.pi)
        n = max(n, int(math.ceil(64 * periods)) + 1)
    return min(n, MAX_SCAN)


def solve_extremum(cond, bracket, scan_points=DEFAULT_SCAN):
    """All roots of the extremum condition inside ``bracket`` (raw time units).

    Sign changes of ``lhs - 1`` are located on a uniform scan and refined with
    Brent's bracketing method. Tangential touches without a sign change are
    not reported. For non-Markovian RTN the ``sin(mu nu) = 0`` family is
    appended. Sorted by ``dt``.
    """
    lo, hi = map(float, bracket)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or hi <= lo:
        return []
    n = _scan_size(cond, lo, hi, scan_points)
    grid = np.linspace(lo, hi, n)
    if cond.kind is ConditionKind.OUN:
        vals = cond.log_f(grid)  # same sign as F - 1
        fn = lambda x: float(cond.log_f(x))
    else:
        vals = cond.lhs(grid) - 1.0
        fn = lambda x: cond.lhs(x) - 1.0

    roots = []
    for i in range(n - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            if grid[i] > 0:
                roots.append(grid[i])
            continue
        if a * b < 0:
            x = brentq(fn, grid[i], grid[i + 1], xtol=1e-15 * max(1.0, grid[i + 1]), rtol=4 * np.finfo(float).eps)
            roots.append(x)
    if vals[-1] == 0.0 and grid[-1] > 0:
        roots.append(grid[-1])

    out = [_make_root(cond, x, "condition", cond.residual(x)) for x in roots]

    if cond.kind is ConditionKind.RTN_NON_MARKOV:
        m = mu(cond.channel.params).real
        nu_lo, nu_hi = lo * cond.rate, hi * cond.rate
        k_lo = max(1, math.ceil(nu_lo * m / math.pi))
        k_hi = math.floor(nu_hi * m / math.pi)
        for k in range(k_lo, k_hi + 1):
            dt = k * math.pi / m / cond.rate
            out.append(_make_root(cond, dt, "sin", abs(math.sin(m * dt * cond.rate))))
    out.sort(key=lambda r: r.dt)
    return out


# ---------------------------------------------------------------- grid search


@dataclass(frozen=True)
class Maximum:
    dt: float
    theta: float
    phi: float
    k3: float
    condition_residual: float | None = None


@dataclass
class SweepReport:
    grid: dict
    records: list = field(default_factory=list)
    maxima: list = field(default_factory=list)
    violation_count: int = 0
    best: Maximum | None = None


def _axis(rng, n, open_at_zero=False):
    lo, hi = map(float, rng)
    if n < 1:
        raise ValueError("grid counts must be positive")
    if n == 1 or lo == hi:
        return np.array([lo])
    if open_at_zero and lo == 0.0:
        return hi * np.arange(1, n + 1) / n
    return np.linspace(lo, hi, n)


def _polish(channel, theta, grid, vals, i):
    """Golden-section refinement of a grid maximum at index ``i``."""
    if i == 0 or i == len(grid) - 1:
        return float(grid[i]), float(vals[i])
    a, b, c = grid[i - 1], grid[i], grid[i + 1]
    if not (vals[i] > vals[i - 1] and vals[i] > vals[i + 1]):
        return float(b), float(vals[i])
    f = lambda x: -float(k3_values(channel, theta, x)[0])
    res = minimize_scalar(f, bracket=(a, b, c), method="golden", options={"xtol": POLISH_XTOL / (2 * abs(b))})
    x = float(res.x)
    if not a <= x <= c:
        return float(b), float(vals[i])
    return x, -float(res.fun)


def _condition_residual(channel, theta, dt):
    if isinstance(channel.params, (RtnParams, OunParams)) and abs(math.sin(theta)) > 1e-12:
        return ExtremumCondition.for_channel(channel).residual(dt)
    return None


def max_k3(channel, dt_range, theta_range=(math.pi / 2, math.pi / 2), phi_range=(0.0, 0.0), grid=(1000, 1, 1), keep_records=True):
    """Grid maximum of K3 over (dt, theta, phi), polished in dt.

    ``grid`` holds the point counts for the dt, theta and phi axes. A dt
    range starting at 0 excludes the origin (K3 is only defined for dt > 0).
    ``maxima`` lists every local maximum along dt at the maximising theta,
    each polished by golden-section search; ``best`` is the largest of them.
    """
    n_dt, n_th, n_ph = grid
    dts = _axis(dt_range, n_dt, open_at_zero=True)
    if np.any(dts <= 0):
        raise ValueError("dt values must be positive")
    thetas = _axis(theta_range, n_th)
    phis = _axis(phi_range, n_ph)

    vals, vals_p = k3_values(channel, thetas[:, None], dts[None, :])
    # K3 does not depend on phi; broadcast the (theta, dt) table across phi
    report = SweepReport(
        grid={
            "dt": (float(dts[0]), float(dts[-1]), len(dts)),
            "theta": (float(thetas[0]), float(thetas[-1]), len(thetas)),
            "phi": (float(phis[0]), float(phis[-1]), len(phis)),
        }
    )
    report.violation_count = int(np.count_nonzero(vals > 1.0)) * len(phis)

    if keep_records:
        regime = channel.regime
        for it, th in enumerate(thetas):
            for ph in phis:
                for idt, d in enumerate(dts):
                    report.records.append(_record(channel, d, th, ph, regime))

    it, idt = np.unravel_index(np.argmax(vals), vals.shape)
    th_best = float(thetas[it])
    row = vals[it]
    local = [
        i
        for i in range(len(dts))
        if (i == 0 or row[i] > row[i - 1]) and (i == len(dts) - 1 or row[i] >= row[i + 1])
    ]
    for i in local:
        x, v = _polish(channel, th_best, dts, row, i)
        report.maxima.append(Maximum(x, th_best, float(phis[0]), v, _condition_residual(channel, th_best, x)))
    report.best = max(report.maxima, key=lambda m: m.k3)
    return report


def _record(channel, dt, theta, phi, regime):
    r = k3(channel, float(theta), float(phi), float(dt))
    return r if r.regime is regime else LGResult(r.dt, r.theta, r.phi, r.triple, r.K3, r.K3prime, regime)


# ---------------------------------------------------------------- census


def violation_intervals(dts, mask):
    """Contiguous runs of ``mask`` as ``(dt_first, dt_last)`` pairs."""
    mask = np.asarray(mask, dtype=bool)
    out = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j + 1 < n and mask[j + 1]:
                j += 1
            out.append((float(dts[i]), float(dts[j])))
            i = j + 1
        else:
            i += 1
    return out


@dataclass(frozen=True)
class Census:
    count_k3: int
    count_k3prime: int
    overlap: bool
    k3_intervals: tuple
    k3prime_intervals: tuple


def violation_census(channel, dt_range, grid=10_000):
    """Count dt intervals with K3 > 1 and with K3' > 1 at theta = pi/2.

    ``overlap`` is True if some grid point violates both at once.
    """
    dts = _axis(dt_range, grid, open_at_zero=True)
    kk, kp = k3_values(channel, math.pi / 2, dts)
    a = kk > 1.0
    b = kp > 1.0
    ia = violation_intervals(dts, a)
    ib = violation_intervals(dts, b)
    return Census(len(ia), len(ib), bool(np.any(a & b)), tuple(ia), tuple(ib))


def max_k3_vs_mu(mus, nu_max, gamma=1.0, grid=20_000):
    """``(mu, max K3, argmax nu)`` rows for RTN at theta = pi/2."""
    rows = []
    for m in mus:
        ch = NoiseChannel(RtnParams.from_mu(m, gamma))
        rep = max_k3(ch, (0.0, nu_max / gamma), grid=(grid, 1, 1), keep_records=False)
        rows.append((float(m), rep.best.k3, rep.best.dt * gamma))
    return rows
