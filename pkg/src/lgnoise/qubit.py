"""Single-qubit linear algebra: states, Kraus sets, projective measurements.

Matrices are 2x2 ``complex128`` numpy arrays. The wrapper types below freeze
their array (``writeable=False``) so they behave as values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

VALIDITY_TOL = 1e-12
REJECT_TOL = 1e-9

I2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
KET0 = np.array([1, 0], dtype=np.complex128)
KET1 = np.array([0, 1], dtype=np.complex128)

for _m in (I2, SIGMA_X, SIGMA_Y, SIGMA_Z, KET0, KET1):
    _m.setflags(write=False)


class IncompleteKrausError(ValueError):
    """Kraus operators do not satisfy sum K^dag K = I."""


class InvalidStateError(ValueError):
    """Matrix is not a valid density matrix."""


def _frozen(m):
    a = np.array(m, dtype=np.complex128)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    a.setflags(write=False)
    return a


def dag(m):
    return np.conj(np.transpose(m))


def ket_bra(u, v):
    return np.outer(u, np.conj(v))


def eigvalsh_2x2(m):
    """Eigenvalues of a Hermitian 2x2 matrix from trace and determinant, ascending."""
    a = m[0, 0].real
    d = m[1, 1].real
    b = m[0, 1]
    half_tr = 0.5 * (a + d)
    r = math.hypot(0.5 * (a - d), abs(b))
    return half_tr - r, half_tr + r


def hermiticity_residual(m):
    return float(np.max(np.abs(m - dag(m))))


@dataclass(frozen=True)
class DensityMatrix:
    """Qubit state. Validated on construction: trace 1, Hermitian, PSD."""

    mat: np.ndarray
    tol: float = field(default=VALIDITY_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.mat)
        object.__setattr__(self, "mat", m)
        tr = np.trace(m)
        if abs(tr - 1.0) > self.tol:
            raise InvalidStateError(f"trace is {tr}, not 1")
        if hermiticity_residual(m) > self.tol:
            raise InvalidStateError("matrix is not Hermitian")
        lo, _ = eigvalsh_2x2(m)
        if lo < -self.tol:
            raise InvalidStateError(f"negative eigenvalue {lo}")

    @classmethod
    def from_amplitudes(cls, alpha, beta):
        """Pure state alpha|0> + beta|1>; amplitudes are normalised."""
        v = np.array([alpha, beta], dtype=np.complex128)
        v = v / np.linalg.norm(v)
        return cls(ket_bra(v, v))

    @classmethod
    def from_bloch(cls, x, y, z):
        r = math.sqrt(x * x + y * y + z * z)
        if r > 1.0 + VALIDITY_TOL:
            raise InvalidStateError(f"Bloch vector length {r} exceeds 1")
        return cls(0.5 * (I2 + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z))

    @classmethod
    def random(cls, rng):
        """Uniform over the Bloch ball (mixed states included)."""
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        r = rng.random() ** (1.0 / 3.0)
        return cls.from_bloch(*(r * v))

    @property
    def bloch(self):
        m = self.mat
        return np.array(
            [2.0 * m[0, 1].real, -2.0 * m[0, 1].imag, (m[0, 0] - m[1, 1]).real]
        )

    def expectation(self, op):
        return float(np.trace(op @ self.mat).real)


@dataclass(frozen=True)
class Projector:
    mat: np.ndarray

    def __post_init__(self):
        m = _frozen(self.mat)
        object.__setattr__(self, "mat", m)
        if np.max(np.abs(m @ m - m)) > VALIDITY_TOL:
            raise ValueError("projector is not idempotent")
        if hermiticity_residual(m) > VALIDITY_TOL:
            raise ValueError("projector is not Hermitian")
        tr = np.trace(m).real
        if min(abs(tr - k) for k in (0, 1, 2)) > VALIDITY_TOL:
            raise ValueError(f"projector trace {tr} is not an integer rank")

    @property
    def complement(self):
        return Projector(I2 - self.mat)


@dataclass(frozen=True)
class KrausSet:
    """Kraus operators of a channel rho -> sum K rho K^dag.

    Completeness is *not* enforced here so that broken sets can be
    represented; ``apply_channel`` rejects them.
    """

    operators: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "operators", tuple(_frozen(k) for k in self.operators)
        )

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def completeness_residual(self):
        s = sum(dag(k) @ k for k in self.operators)
        return float(np.max(np.abs(s - I2)))

    def as_array(self, size=None):
        """Stack as ``(size, 2, 2)``, zero-padding to ``size`` operators."""
        n = len(self.operators) if size is None else size
        out = np.zeros((n, 2, 2), dtype=np.complex128)
        for i, k in enumerate(self.operators):
            out[i] = k
        return out


def apply_channel(rho, ks):
    """Evolve ``rho`` by the Kraus set, ``sum_n K_n rho K_n^dag``."""
    res = ks.completeness_residual()
    if res > REJECT_TOL:
        raise IncompleteKrausError(f"completeness residual {res:.3e}")
    m = rho.mat
    out = np.zeros((2, 2), dtype=np.complex128)
    for k in ks:
        out += k @ m @ dag(k)
    # restore exact Hermiticity lost to rounding
    out = 0.5 * (out + dag(out))
    # an accepted residual may shift the trace by up to ~2x itself
    return DensityMatrix(out, tol=VALIDITY_TOL + 2.0 * res)


def measure(rho, proj):
    """Projective (von Neumann) measurement outcome.

    Returns ``(probability, post_state)``. ``post_state`` is ``None`` when the
    outcome has zero probability, since the post-measurement state is then
    undefined.
    """
    m = rho.mat
    p = float(np.trace(proj.mat @ m).real)
    p = min(max(p, 0.0), 1.0)
    if p <= VALIDITY_TOL:
        return p, None
    post = proj.mat @ m @ proj.mat / p
    post = 0.5 * (post + dag(post))
    post = post / np.trace(post).real
    return p, DensityMatrix(post)


def wrap_angles(theta, phi):
    """Map (theta, phi) into [-pi, pi) x [-pi/2, pi/2] without changing O.

    Shifting phi by pi flips the sign of the off-diagonal of O, which is the
    same as negating theta, so each half-turn of phi is paid for by a sign
    change of theta.
    """
    k = math.floor((phi + math.pi / 2) / math.pi)
    phi = phi - k * math.pi
    if phi > math.pi / 2:
        phi -= math.pi
        k += 1
    if k % 2:
        theta = -theta
    theta = (theta + math.pi) % (2 * math.pi) - math.pi
    return theta, phi


def observable_matrix(theta, phi):
    c = math.cos(theta)
    s = math.sin(theta)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, e * s], [e.conjugate() * s, -c]], dtype=np.complex128)


def observable(theta, phi):
    """Dichotomic observable R^dag sigma_z R and its outcome projectors.

    Returns ``(O, P_plus, P_minus)`` with ``O = P_plus - P_minus``.
    The projectors are built as ``(I +- O)/2``, which stays well defined at
    theta = 0 where the normalised eigenvector formula degenerates.
    """
    theta, phi = wrap_angles(theta, phi)
    o = observable_matrix(theta, phi)
    o.setflags(write=False)
    return o, Projector(0.5 * (I2 + o)), Projector(0.5 * (I2 - o))


def eigenvectors(theta, phi):
    """Eigenvectors of the observable for outcomes +1 and -1.

    Components are proportional to ``((cos theta +- 1) e^{i phi}, sin theta)``;
    after cancelling the common factor this is
    ``(cos(theta/2) e^{i phi}, sin(theta/2))`` and
    ``(-sin(theta/2) e^{i phi}, cos(theta/2))``, which avoids the cancellation
    in ``cos theta - 1`` near theta = 0. Overall signs follow the unreduced
    form, with sign +1 where it vanishes.
    """
    theta, phi = wrap_angles(theta, phi)
    ch, sh = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    sp = -1.0 if ch < 0 else 1.0
    sm = -1.0 if sh < 0 else 1.0
    vp = sp * np.array([ch * e, sh], dtype=np.complex128)
    vm = sm * np.array([-sh * e, ch], dtype=np.complex128)
    return vp, vm
