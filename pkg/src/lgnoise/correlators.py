"""Two-time correlators and Leggett-Garg parameters.

Three routes to a correlator ``C_ij``:

``correlator_chain``
    explicit evolve -> project -> renormalise -> evolve -> project, the
    reference everything else is checked against;
``correlator_joint``
    ``1 - 2 p(+, t_i) - 2 p(+, t_j) + 4 Re g`` from the joint (+, +)
    probability;
``correlator_closed``
    ``cos^2 theta + sin^2 theta D(t_j - t_i)`` with ``D`` the channel's
    coherence factor.

As in the measurement scheme this models, the channel restarts at each
measurement: the state measured at ``t_i`` is propagated with the Kraus set
for the elapsed time ``t_j - t_i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .noise import Regime
from .qubit import DensityMatrix, apply_channel, measure, observable


@dataclass(frozen=True)
class MeasurementSetting:
    theta: float
    phi: float = 0.0

    @property
    def observable(self):
        return observable(self.theta, self.phi)

    @property
    def projectors(self):
        _, pp, pm = observable(self.theta, self.phi)
        return pp, pm


@dataclass(frozen=True)
class CorrelatorTriple:
    C01: float
    C12: float
    C02: float
    t0: float
    t1: float
    t2: float

    def __post_init__(self):
        if not self.t0 <= self.t1 <= self.t2:
            raise ValueError("times must satisfy t0 <= t1 <= t2")

    @property
    def k3(self):
        return self.C01 + self.C12 - self.C02

    @property
    def k3_prime(self):
        return -self.C01 - self.C12 - self.C02


@dataclass(frozen=True)
class LGResult:
    dt: float
    theta: float
    phi: float
    triple: CorrelatorTriple
    K3: float
    K3prime: float
    regime: Regime

    @property
    def violates(self):
        return self.K3 > 1.0

    @property
    def violates_prime(self):
        return self.K3prime > 1.0


def _check_times(ti, tj):
    if not 0 <= ti <= tj:
        raise ValueError(f"need 0 <= ti <= tj, got ti={ti}, tj={tj}")


def correlator_chain(channel, setting, rho0, ti, tj):
    """Correlator from the full sequential-measurement chain.

    Outcomes with zero probability at ``ti`` are skipped: their weight
    ``p(a) q(b|a)`` vanishes as ``p(a) -> 0``.
    """
    _check_times(ti, tj)
    pp, pm = setting.projectors
    rho_i = apply_channel(rho0, channel.kraus(ti))
    kb = channel.kraus(tj - ti)
    c = 0.0
    for a, pa in ((1, pp), (-1, pm)):
        prob, post = measure(rho_i, pa)
        if post is None:
            continue
        rho_j = apply_channel(post, kb)
        for b, pb in ((1, pp), (-1, pm)):
            q, _ = measure(rho_j, pb)
            c += a * b * prob * q
    return c


def correlator_joint(channel, setting, rho0, ti, tj):
    """``1 - 2 p(+, t_i) - 2 p(+, t_j) + 4 Re g``.

    ``g = Tr[P+ Phi(P+ rho(t_i) P+)]`` is the unnormalised (+, +) weight and
    ``p(+, t_j)`` is taken after a non-selective measurement at ``t_i``.
    """
    _check_times(ti, tj)
    pp, pm = setting.projectors
    r = apply_channel(rho0, channel.kraus(ti)).mat
    kb = channel.kraus(tj - ti)
    p_i = float(np.trace(pp.mat @ r).real)

    def evolve_unnormalised(m):
        return sum(k @ m @ k.conj().T for k in kb)

    proj_plus = pp.mat @ r @ pp.mat
    proj_minus = pm.mat @ r @ pm.mat
    g = np.trace(pp.mat @ evolve_unnormalised(proj_plus))
    p_j = float(np.trace(pp.mat @ evolve_unnormalised(proj_plus + proj_minus)).real)
    return 1.0 - 2.0 * p_i - 2.0 * p_j + 4.0 * g.real


def correlator_closed(channel, theta, ti, tj):
    """``cos^2 theta + sin^2 theta D(tj - ti)``; vectorised over the times."""
    ti = np.asarray(ti, dtype=float)
    tj = np.asarray(tj, dtype=float)
    if np.any(ti < 0) or np.any(tj < ti):
        raise ValueError("need 0 <= ti <= tj")
    c = math.cos(theta) ** 2
    val = c + (1.0 - c) * channel.coherence(tj - ti)
    return val if np.ndim(val) else float(val)


def chain_batch(channel, rhos, thetas, phis, tis, tjs):
    """Chain and joint-probability form correlators for many samples at once.

    ``rhos`` is an ``(N, 2, 2)`` array or a sequence of ``DensityMatrix``;
    the other arguments broadcast to length ``N``.
    """
    if isinstance(rhos, (list, tuple)):
        rhos = np.array([r.mat if isinstance(r, DensityMatrix) else r for r in rhos])
    rhos = np.asarray(rhos, dtype=np.complex128)
    n = rhos.shape[0]
    thetas, phis, tis, tjs = (np.broadcast_to(np.asarray(x, dtype=float), (n,)) for x in (thetas, phis, tis, tjs))
    if np.any(tis < 0) or np.any(tjs < tis):
        raise ValueError("need 0 <= ti <= tj")
    ka = _kraus_stacks(channel, tis)
    kb = _kraus_stacks(channel, tjs - tis)
    pp = plus_projectors(thetas, phis)
    return kernels.chain_correlators(rhos, ka, kb, pp)


def plus_projectors(thetas, phis):
    """``(I + O)/2`` for arrays of angles, shape ``(N, 2, 2)``."""
    c, sn = np.cos(thetas), np.sin(thetas)
    e = np.exp(1j * np.asarray(phis))
    out = np.empty((len(c), 2, 2), dtype=np.complex128)
    out[:, 0, 0] = 0.5 * (1.0 + c)
    out[:, 1, 1] = 0.5 * (1.0 - c)
    out[:, 0, 1] = 0.5 * e * sn
    out[:, 1, 0] = 0.5 * np.conj(e) * sn
    return out


def _kraus_stacks(channel, times):
    uniq, inv = np.unique(times, return_inverse=True)
    table = np.array([channel.kraus(float(t)).as_array(2) for t in uniq])
    return table[inv.ravel()]


def triple_closed(channel, theta, t0, t1, t2):
    return CorrelatorTriple(
        correlator_closed(channel, theta, t0, t1),
        correlator_closed(channel, theta, t1, t2),
        correlator_closed(channel, theta, t0, t2),
        t0,
        t1,
        t2,
    )


def triple_chain(channel, setting, rho0, t0, t1, t2):
    """Correlator triple with each pair run through its own two-measurement chain."""
    return CorrelatorTriple(
        correlator_chain(channel, setting, rho0, t0, t1),
        correlator_chain(channel, setting, rho0, t1, t2),
        correlator_chain(channel, setting, rho0, t0, t2),
        t0,
        t1,
        t2,
    )


def k3(channel, theta, phi, dt):
    """Leggett-Garg parameters for equally spaced measurements at 0, dt, 2 dt.

    ``phi`` does not enter the closed form; it is carried into the result so
    sweeps over measurement settings keep their coordinates.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    tr = triple_closed(channel, theta, 0.0, dt, 2.0 * dt)
    return LGResult(dt, theta, phi, tr, tr.k3, tr.k3_prime, channel.regime)


def k3_values(channel, theta, dt):
    """Vectorised ``(K3, K3')`` for equal spacing ``dt``.

    ``theta`` and ``dt`` broadcast against each other.
    """
    dt = np.asarray(dt, dtype=float)
    c2 = np.cos(np.asarray(theta, dtype=float)) ** 2
    d1 = channel.coherence(dt)
    d2 = channel.coherence(2.0 * dt)
    c01 = c2 + (1.0 - c2) * d1
    c02 = c2 + (1.0 - c2) * d2
    return 2.0 * c01 - c02, -2.0 * c01 - c02


def k3_unitary(Omega, dt):
    """``2 cos(Omega dt) - cos(2 Omega dt)`` for the noiseless qubit."""
    if np.any(np.asarray(dt) < 0):
        raise ValueError("dt must be non-negative")
    x = np.asarray(Omega * np.asarray(dt, dtype=float))
    val = 2.0 * np.cos(x) - np.cos(2.0 * x)
    return val if val.ndim else float(val)
