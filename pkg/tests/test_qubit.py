import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgnoise.noise import NoiseChannel
from lgnoise.qubit import (
    I2,
    SIGMA_X,
    SIGMA_Z,
    DensityMatrix,
    IncompleteKrausError,
    InvalidStateError,
    KrausSet,
    Projector,
    apply_channel,
    dag,
    eigenvectors,
    eigvalsh_2x2,
    measure,
    observable,
    wrap_angles,
)

PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
MINUS = np.array([1, -1], dtype=complex) / math.sqrt(2)

angles = st.floats(-10, 10, allow_nan=False)
bloch = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).map(lambda v: np.array(v) / max(1.0, np.linalg.norm(v) * 1.000001))


def state_from(v):
    return DensityMatrix.from_bloch(*v)


def test_matrix_algebra_against_hand_expansion(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    prod = a @ b
    for i in range(2):
        for j in range(2):
            assert prod[i, j] == pytest.approx(a[i, 0] * b[0, j] + a[i, 1] * b[1, j])
    assert np.array_equal(dag(dag(a)), a)
    assert np.allclose(a + b, b + a)


class TestDensityMatrix:
    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.diag([1.0, 0.5]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix(np.array([[0.5, 0.6], [0.6, 0.5]]))

    def test_rejects_long_bloch_vector(self):
        with pytest.raises(InvalidStateError):
            DensityMatrix.from_bloch(1.0, 1.0, 0.0)

    def test_immutable(self):
        rho = DensityMatrix.from_amplitudes(1, 0)
        with pytest.raises(ValueError):
            rho.mat[0, 0] = 0.0

    def test_amplitudes(self):
        rho = DensityMatrix.from_amplitudes(0.6, 0.8j)
        assert rho.mat[0, 1] == pytest.approx(0.6 * np.conj(0.8j))
        assert rho.mat[1, 1] == pytest.approx(0.64)

    @given(bloch)
    def test_bloch_round_trip(self, v):
        assert np.allclose(state_from(v).bloch, v, atol=1e-12)

    def test_closed_form_eigenvalues(self, rng):
        for _ in range(50):
            rho = DensityMatrix.random(rng)
            lo, hi = eigvalsh_2x2(rho.mat)
            assert np.allclose([lo, hi], np.linalg.eigvalsh(rho.mat), atol=1e-14)


class TestApplyChannel:
    def test_dephasing_fixes_basis_state(self):
        rho = DensityMatrix.from_amplitudes(1, 0)
        for t in (0.0, 10.0, 777.0, 5000.0):
            out = apply_channel(rho, NoiseChannel.rtn(0.05, gamma=0.001).kraus(t))
            assert np.allclose(out.mat, rho.mat, atol=1e-15)

    def test_oun_with_q_zero_by_hand(self):
        # q = 0: K1 = |0><0|, K2 = |1><1|
        ks = KrausSet((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
        rho = DensityMatrix(np.outer(PLUS, PLUS.conj()))
        out = apply_channel(rho, ks)
        by_hand = np.zeros((2, 2), dtype=complex)
        for k in ks:
            for i in range(2):
                for j in range(2):
                    by_hand[i, j] += sum(
                        k[i, m] * rho.mat[m, n] * np.conj(k[j, n]) for m in range(2) for n in range(2)
                    )
        assert np.allclose(out.mat, by_hand)
        assert np.allclose(out.mat, np.diag([0.5, 0.5]))

    def test_rejects_incomplete_set(self):
        rho = DensityMatrix.from_amplitudes(1, 1)
        with pytest.raises(IncompleteKrausError):
            apply_channel(rho, KrausSet((0.9 * I2,)))

    def test_accepts_tiny_residual(self):
        rho = DensityMatrix.from_amplitudes(1, 1)
        apply_channel(rho, KrausSet(((1 + 1e-12) * I2,)))

    @settings(max_examples=300)
    @given(bloch, st.floats(0, 5000), st.sampled_from(["rtn-nm", "rtn-m", "oun-nm", "oun-m", "unitary"]))
    def test_preserves_trace_and_positivity(self, v, t, name):
        from conftest import CHANNELS

        rho = state_from(v)
        out = apply_channel(rho, CHANNELS[name].kraus(t))
        assert abs(np.trace(out.mat) - 1) < 1e-12
        assert eigvalsh_2x2(out.mat)[0] >= -1e-10


class TestMeasure:
    def test_eigenstate(self):
        rho = DensityMatrix(np.outer(PLUS, PLUS.conj()))
        p, post = measure(rho, Projector(np.outer(PLUS, PLUS.conj())))
        assert p == pytest.approx(1.0)
        assert np.allclose(post.mat, rho.mat)

    def test_basis_state_on_plus(self):
        rho = DensityMatrix.from_amplitudes(1, 0)
        p, post = measure(rho, Projector(np.outer(PLUS, PLUS.conj())))
        assert p == pytest.approx(0.5)
        assert np.allclose(post.mat, np.outer(PLUS, PLUS.conj()))

    def test_zero_probability_has_no_post_state(self):
        rho = DensityMatrix(np.outer(PLUS, PLUS.conj()))
        p, post = measure(rho, Projector(np.outer(MINUS, MINUS.conj())))
        assert p == pytest.approx(0.0, abs=1e-15)
        assert post is None

    def test_probability_against_elementwise_trace(self, rng):
        for _ in range(100):
            rho = DensityMatrix.random(rng)
            theta, phi = rng.uniform(-math.pi, math.pi), rng.uniform(-math.pi / 2, math.pi / 2)
            _, pp, _ = observable(theta, phi)
            expected = sum(pp.mat[i, j] * rho.mat[j, i] for i in range(2) for j in range(2)).real
            p, _ = measure(rho, pp)
            assert p == pytest.approx(expected, abs=1e-14)

    @given(bloch, angles, angles)
    def test_outcome_probabilities_sum_to_one(self, v, theta, phi):
        rho = state_from(v)
        _, pp, pm = observable(theta, phi)
        assert measure(rho, pp)[0] + measure(rho, pm)[0] == pytest.approx(1.0, abs=1e-12)


class TestObservable:
    def test_sigma_x(self):
        o, pp, pm = observable(math.pi / 2, 0.0)
        assert np.allclose(o, SIGMA_X, atol=1e-15)
        assert np.allclose(pp.mat, np.outer(PLUS, PLUS.conj()))
        assert np.allclose(pm.mat, np.outer(MINUS, MINUS.conj()))

    @pytest.mark.parametrize("phi", [-1.2, 0.0, 0.4, math.pi / 2])
    def test_sigma_z_at_theta_zero(self, phi):
        o, _, _ = observable(0.0, phi)
        assert np.allclose(o, SIGMA_Z)

    def test_matches_rotated_sigma_z(self):
        # independent route: build R and conjugate sigma_z
        theta, phi = math.pi / 4, math.pi / 4
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        r = np.array([[c, np.exp(1j * phi) * s], [-np.exp(-1j * phi) * s, c]])
        expected = dag(r) @ SIGMA_Z @ r
        o, _, _ = observable(theta, phi)
        assert np.allclose(o, expected, atol=1e-15)

    @given(angles, angles)
    def test_involution_and_spectral_decomposition(self, theta, phi):
        o, pp, pm = observable(theta, phi)
        assert np.max(np.abs(o @ o - I2)) < 1e-12
        assert np.max(np.abs(pp.mat - pm.mat - o)) < 1e-12
        assert np.max(np.abs(pp.mat + pm.mat - I2)) < 1e-12
        assert np.allclose(np.linalg.eigvalsh(o), [-1, 1])

    @given(angles, angles)
    def test_wrapping_preserves_operator(self, theta, phi):
        t2, p2 = wrap_angles(theta, phi)
        assert -math.pi <= t2 < math.pi
        assert -math.pi / 2 <= p2 <= math.pi / 2
        c, s = math.cos(theta), math.sin(theta)
        e = np.exp(1j * phi)
        raw = np.array([[c, e * s], [np.conj(e) * s, -c]])
        assert np.allclose(observable(theta, phi)[0], raw, atol=1e-12)

    @given(st.floats(-math.pi, math.pi, exclude_max=True), st.floats(-math.pi / 2, math.pi / 2))
    def test_eigenvector_formula(self, theta, phi):
        o, pp, pm = observable(theta, phi)
        vp, vm = eigenvectors(theta, phi)
        assert np.allclose(o @ vp, vp, atol=1e-12)
        assert np.allclose(o @ vm, -vm, atol=1e-12)
        assert np.allclose(np.outer(vp, vp.conj()), pp.mat, atol=1e-12)
        assert np.allclose(np.outer(vm, vm.conj()), pm.mat, atol=1e-12)


def test_projector_validation():
    with pytest.raises(ValueError):
        Projector(np.array([[1.0, 1.0], [0.0, 0.0]]))
    assert Projector(I2).complement.mat.sum() == 0


@pytest.mark.parametrize("theta,phi", [(1.0, 0.3), (-2.0, -1.1), (2.9, 1.5)])
def test_eigenvectors_equal_unreduced_formula(theta, phi):
    c, s = math.cos(theta), math.sin(theta)
    e = np.exp(1j * phi)
    for sign, v in zip((1, -1), eigenvectors(theta, phi)):
        n = math.sqrt(s * s + (c + sign) ** 2)
        assert np.allclose(v, [(c + sign) * e / n, s / n], atol=1e-14)
