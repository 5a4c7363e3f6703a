"""Dephasing channels: random telegraph noise, Ornstein-Uhlenbeck noise, and a
noiseless unitary reference.

Every channel is characterised by a real coherence factor ``D(t)`` that
multiplies the off-diagonal of the density matrix in the sigma_z basis:
``Lambda(gamma t)`` for RTN, ``q(t)`` for OUN, ``cos(Omega t)`` (as the
Bloch-vector projection) for the unitary channel.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .qubit import I2, KET0, KET1, SIGMA_Z, KrausSet, ket_bra

# OUN regime thresholds on the bandwidth ratio gamma / Gamma
OUN_NON_MARKOVIAN_BELOW = 1.0
OUN_MARKOVIAN_FROM = 100.0


class Regime(str, enum.Enum):
    MARKOVIAN = "markovian"
    NON_MARKOVIAN = "non-markovian"
    INTERMEDIATE = "intermediate"
    UNITARY = "unitary"


@dataclass(frozen=True)
class RtnParams:
    """Random telegraph noise: coupling ``a`` and switching rate ``gamma = 1/(2 tau)``."""

    a: float
    gamma: float

    def __post_init__(self):
        if not (self.a > 0 and self.gamma > 0):
            raise ValueError("RTN parameters a and gamma must be positive")

    @classmethod
    def from_tau(cls, a, tau):
        if not tau > 0:
            raise ValueError("tau must be positive")
        return cls(a, 1.0 / (2.0 * tau))

    @classmethod
    def from_mu(cls, mu, gamma=1.0):
        """Parameters giving a real ``mu`` (non-Markovian) at the chosen rate."""
        return cls(0.5 * gamma * math.sqrt(1.0 + mu * mu), gamma)

    @property
    def tau(self):
        return 1.0 / (2.0 * self.gamma)

    @property
    def coupling_ratio(self):
        """``4 a tau`` (equivalently ``2a/gamma``)."""
        return 2.0 * self.a / self.gamma


@dataclass(frozen=True)
class OunParams:
    """Ornstein-Uhlenbeck noise: relaxation rate ``Gamma`` and bandwidth ``gamma``."""

    Gamma: float
    gamma: float

    def __post_init__(self):
        if not (self.Gamma > 0 and self.gamma > 0):
            raise ValueError("OUN parameters Gamma and gamma must be positive")


@dataclass(frozen=True)
class UnitaryParams:
    """Noiseless precession under H = Omega sigma_z / 2."""

    Omega: float


def mu(p):
    """``sqrt((4 a tau)^2 - 1)``: real above the boundary, ``i mu0`` below it."""
    s = p.coupling_ratio ** 2 - 1.0
    if s >= 0:
        return complex(math.sqrt(s), 0.0)
    return complex(0.0, math.sqrt(-s))


def lambda_nu(nu, mu_value):
    """RTN coherence factor as a function of the dimensionless time ``nu``.

    Real ``mu``: ``e^{-nu} [cos(mu nu) + sin(mu nu)/mu]``.
    Imaginary ``mu = i mu0``: ``e^{-nu} [cosh(mu0 nu) + sinh(mu0 nu)/mu0]``,
    evaluated as ``e^{-(1-mu0) nu} [(1 + e^{-2 mu0 nu})/2 - expm1(-2 mu0 nu)/(2 mu0)]``
    so nothing overflows at large ``nu`` and ``mu0 -> 0`` has no cancellation.
    Accepts scalars or arrays for ``nu``.
    """
    nu = np.asarray(nu, dtype=float)
    m = complex(mu_value)
    if m.imag == 0.0:
        x = m.real
        # sin(x nu)/x == nu * sinc(x nu / pi), finite at x == 0
        val = np.exp(-nu) * (np.cos(x * nu) + nu * np.sinc(x * nu / math.pi))
    else:
        m0 = abs(m.imag)
        e2 = np.exp(-2.0 * m0 * nu)
        if m0 == 0.0:
            shc = nu
        else:
            shc = -np.expm1(-2.0 * m0 * nu) / (2.0 * m0)
        val = np.exp(-(1.0 - m0) * nu) * (0.5 * (1.0 + e2) + shc)
    return val if val.ndim else float(val)


def lambda_nu_complex(nu, mu_value):
    """Direct complex evaluation of the oscillatory form; reference for the
    hyperbolic branch (mu must be non-zero)."""
    m = complex(mu_value)
    return (cmath.exp(-nu) * (cmath.cos(m * nu) + cmath.sin(m * nu) / m)).real


def dlambda_dnu(nu, mu_value):
    """``-(1 + mu^2) e^{-nu} sin(mu nu)/mu``, written to stay finite at mu = 0."""
    nu = np.asarray(nu, dtype=float)
    m = complex(mu_value)
    if m.imag == 0.0:
        x = m.real
        val = -(1.0 + x * x) * np.exp(-nu) * nu * np.sinc(x * nu / math.pi)
    else:
        m0 = abs(m.imag)
        if m0 == 0.0:
            shc = nu
        else:
            shc = -np.expm1(-2.0 * m0 * nu) / (2.0 * m0)
        val = -(1.0 - m0 * m0) * np.exp(-(1.0 - m0) * nu) * shc
    return val if val.ndim else float(val)


def lambda_rtn(p, t):
    return lambda_nu(p.gamma * np.asarray(t, dtype=float), mu(p))


def q_oun(p, t):
    """``exp[-(Gamma/2)(t + (e^{-gamma t} - 1)/gamma)]``."""
    t = np.asarray(t, dtype=float)
    val = np.exp(-0.5 * p.Gamma * (t + np.expm1(-p.gamma * t) / p.gamma))
    return val if val.ndim else float(val)


def _check_time(t):
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")


def kraus_rtn(p, t):
    _check_time(t)
    lam = lambda_rtn(p, t)
    kp = math.sqrt(max(0.0, 0.5 * (1.0 + lam)))
    km = math.sqrt(max(0.0, 0.5 * (1.0 - lam)))
    return KrausSet((kp * I2, km * SIGMA_Z))


def kraus_oun(p, t):
    _check_time(t)
    q = q_oun(p, t)
    p11 = ket_bra(KET1, KET1)
    return KrausSet((ket_bra(KET0, KET0) + q * p11, math.sqrt(max(0.0, 1.0 - q * q)) * p11))


def kraus_unitary(p, t):
    _check_time(t)
    h = 0.5 * p.Omega * t
    return KrausSet((np.diag([cmath.exp(-1j * h), cmath.exp(1j * h)]),))


def classify_regime(channel):
    """Markovian / non-Markovian tag for a channel.

    RTN: non-Markovian exactly when ``mu`` is real and non-zero (Lambda then
    has intervals with positive slope). The boundary ``4 a tau = 1`` is
    Markovian. OUN has no sharp boundary; the bandwidth ratio gamma/Gamma is
    binned with ``OUN_NON_MARKOVIAN_BELOW`` and ``OUN_MARKOVIAN_FROM`` and the
    gap between them is reported as intermediate.
    """
    p = channel.params
    if isinstance(p, RtnParams):
        return Regime.NON_MARKOVIAN if p.coupling_ratio > 1.0 else Regime.MARKOVIAN
    if isinstance(p, OunParams):
        ratio = p.gamma / p.Gamma
        if ratio < OUN_NON_MARKOVIAN_BELOW:
            return Regime.NON_MARKOVIAN
        if ratio >= OUN_MARKOVIAN_FROM:
            return Regime.MARKOVIAN
        return Regime.INTERMEDIATE
    return Regime.UNITARY


@dataclass(frozen=True)
class NoiseChannel:
    """A channel kind together with its parameters."""

    params: RtnParams | OunParams | UnitaryParams

    @classmethod
    def rtn(cls, a, gamma=None, tau=None):
        if (gamma is None) == (tau is None):
            raise ValueError("give exactly one of gamma or tau for RTN")
        return cls(RtnParams(a, gamma) if tau is None else RtnParams.from_tau(a, tau))

    @classmethod
    def oun(cls, Gamma, gamma):
        return cls(OunParams(Gamma, gamma))

    @classmethod
    def unitary(cls, Omega):
        return cls(UnitaryParams(Omega))

    @property
    def kind(self):
        return {RtnParams: "rtn", OunParams: "oun", UnitaryParams: "unitary"}[
            type(self.params)
        ]

    def coherence(self, t):
        """Real coherence factor ``D(t)``; vectorised over ``t``."""
        p = self.params
        if isinstance(p, RtnParams):
            return lambda_rtn(p, t)
        if isinstance(p, OunParams):
            return q_oun(p, t)
        val = np.cos(p.Omega * np.asarray(t, dtype=float))
        return val if val.ndim else float(val)

    def kraus(self, t):
        p = self.params
        if isinstance(p, RtnParams):
            return kraus_rtn(p, t)
        if isinstance(p, OunParams):
            return kraus_oun(p, t)
        return kraus_unitary(p, t)

    @property
    def regime(self):
        return classify_regime(self)

    def describe(self):
        p = self.params
        if isinstance(p, RtnParams):
            m = mu(p)
            m_txt = f"{m.real:g}" if m.imag == 0 else f"{m.imag:g}i"
            return f"RTN(a={p.a:g}, gamma={p.gamma:g}, tau={p.tau:g}, mu={m_txt})"
        if isinstance(p, OunParams):
            return f"OUN(Gamma={p.Gamma:g}, gamma={p.gamma:g})"
        return f"Unitary(Omega={p.Omega:g})"
