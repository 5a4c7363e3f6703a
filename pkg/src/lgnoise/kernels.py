"""Batched measurement-chain kernels.

For each sample ``s`` the chain is: evolve ``rho[s]`` with Kraus set ``ka[s]``,
measure ``{P+, P-}``, renormalise, evolve with ``kb[s]``, measure again.
Two results come back per sample:

* ``chain``: ``sum_ab a b p(a) q(b|a)`` from the renormalised branches;
* ``joint``: ``1 - 2 p(+, t_i) - 2 p(+, t_j) + 4 g`` where ``g`` is the joint
  probability of (+, +) built from the *unnormalised* projected state and
  ``p(+, t_j)`` the marginal after a non-selective first measurement.

Branches with ``p(a) <= ZERO_PROB`` contribute nothing.

Shapes: ``rho (N,2,2)``, ``ka, kb (N,M,2,2)`` (zero-padded Kraus stacks),
``pp (N,2,2)`` the +1 projectors. Both a numba loop and a numpy
(einsum) implementation exist; ``chain_correlators`` picks one according to
``lgnoise._accel.NUMBA_ENABLED``.
"""

import numpy as np

from . import _accel
from ._accel import njit

ZERO_PROB = 1e-300


@njit(cache=True)
def _mm(a, b):
    out = np.empty((2, 2), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            out[i, j] = a[i, 0] * b[0, j] + a[i, 1] * b[1, j]
    return out


@njit(cache=True)
def _evolve(r, ks):
    out = np.zeros((2, 2), dtype=np.complex128)
    for n in range(ks.shape[0]):
        k = ks[n]
        kr = _mm(k, r)
        for i in range(2):
            for j in range(2):
                out[i, j] += kr[i, 0] * np.conj(k[j, 0]) + kr[i, 1] * np.conj(k[j, 1])
    return out


@njit(cache=True)
def _tr_prod(a, b):
    # Tr(a b).real
    s = a[0, 0] * b[0, 0] + a[0, 1] * b[1, 0] + a[1, 0] * b[0, 1] + a[1, 1] * b[1, 1]
    return s.real


@njit(cache=True)
def _chain_loop(rho, ka, kb, pp):
    n = rho.shape[0]
    chain = np.empty(n)
    joint = np.empty(n)
    eye = np.eye(2, dtype=np.complex128)
    for s in range(n):
        r = _evolve(rho[s], ka[s])
        p_plus = pp[s]
        p_minus = eye - p_plus
        c = 0.0
        for ia in range(2):
            pa = p_plus if ia == 0 else p_minus
            sa = 1.0 if ia == 0 else -1.0
            prob = _tr_prod(pa, r)
            if prob <= ZERO_PROB:
                continue
            post = _mm(_mm(pa, r), pa)
            for i in range(2):
                for j in range(2):
                    post[i, j] /= prob
            ev = _evolve(post, kb[s])
            q_plus = _tr_prod(p_plus, ev)
            q_minus = _tr_prod(p_minus, ev)
            c += sa * prob * (q_plus - q_minus)
        chain[s] = c

        pi_plus = _tr_prod(p_plus, r)
        proj_plus = _mm(_mm(p_plus, r), p_plus)
        proj_minus = _mm(_mm(p_minus, r), p_minus)
        g = _tr_prod(p_plus, _evolve(proj_plus, kb[s]))
        mixed = proj_plus + proj_minus
        pj_plus = _tr_prod(p_plus, _evolve(mixed, kb[s]))
        joint[s] = 1.0 - 2.0 * pi_plus - 2.0 * pj_plus + 4.0 * g
    return chain, joint


def _evolve_np(r, ks):
    return np.einsum("smij,sjk,smlk->sil", ks, r, ks.conj())


def _tr_np(a, b):
    return np.einsum("sij,sji->s", a, b).real


def _chain_numpy(rho, ka, kb, pp):
    eye = np.eye(2, dtype=np.complex128)
    r = _evolve_np(rho, ka)
    pm = eye - pp
    chain = np.zeros(rho.shape[0])
    for pa, sa in ((pp, 1.0), (pm, -1.0)):
        prob = _tr_np(pa, r)
        ok = prob > ZERO_PROB
        safe = np.where(ok, prob, 1.0)
        post = pa @ r @ pa / safe[:, None, None]
        ev = _evolve_np(post, kb)
        term = sa * prob * (_tr_np(pp, ev) - _tr_np(pm, ev))
        chain += np.where(ok, term, 0.0)

    pi_plus = _tr_np(pp, r)
    proj_plus = pp @ r @ pp
    proj_minus = pm @ r @ pm
    g = _tr_np(pp, _evolve_np(proj_plus, kb))
    pj_plus = _tr_np(pp, _evolve_np(proj_plus + proj_minus, kb))
    joint = 1.0 - 2.0 * pi_plus - 2.0 * pj_plus + 4.0 * g
    return chain, joint


def _prepare(rho, ka, kb, pp):
    arrs = [np.ascontiguousarray(x, dtype=np.complex128) for x in (rho, ka, kb, pp)]
    rho, ka, kb, pp = arrs
    n = rho.shape[0]
    if rho.shape != (n, 2, 2) or pp.shape != (n, 2, 2):
        raise ValueError("rho and pp must have shape (N, 2, 2)")
    if ka.ndim != 4 or ka.shape[0] != n or ka.shape[2:] != (2, 2):
        raise ValueError("ka must have shape (N, M, 2, 2)")
    if kb.ndim != 4 or kb.shape[0] != n or kb.shape[2:] != (2, 2):
        raise ValueError("kb must have shape (N, M, 2, 2)")
    return rho, ka, kb, pp


def chain_correlators_numba(rho, ka, kb, pp):
    if not _accel.HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    return _chain_loop(*_prepare(rho, ka, kb, pp))


def chain_correlators_numpy(rho, ka, kb, pp):
    return _chain_numpy(*_prepare(rho, ka, kb, pp))


def chain_correlators(rho, ka, kb, pp):
    """Return ``(chain, joint)`` arrays of shape ``(N,)``."""
    if _accel.NUMBA_ENABLED:
        return chain_correlators_numba(rho, ka, kb, pp)
    return chain_correlators_numpy(rho, ka, kb, pp)
