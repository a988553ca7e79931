from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgvqd import qsim
from wgvqd.decomp import SimpleObservable

X = np.array([[0.0, 1.0], [1.0, 0.0]])
P0 = np.diag([1.0, 0.0])


def dense(factors):
    """Kronecker product with qubit 0 least significant."""
    return reduce(np.kron, factors[::-1])


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def test_zero_and_basis_states():
    np.testing.assert_array_equal(qsim.zero_state(2), [1, 0, 0, 0])
    np.testing.assert_array_equal(qsim.basis_state(2, 2), [0, 0, 1, 0])
    assert qsim.zero_state(3, batch=(4,)).shape == (4, 8)


def test_num_qubits_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        qsim.num_qubits(np.zeros(6))


def test_ry_matches_dense_matrix():
    rng = np.random.default_rng(1)
    psi = rng.normal(size=8)
    for q in range(3):
        factors = [np.eye(2)] * 3
        factors[q] = ry(0.7)
        np.testing.assert_allclose(qsim.apply_ry(psi, q, 0.7), dense(factors) @ psi, atol=1e-14)


def test_ry_batched_angles():
    thetas = np.array([0.0, np.pi])
    out = qsim.apply_ry(qsim.zero_state(1, batch=(2,)), 0, thetas)
    np.testing.assert_allclose(out, [[1, 0], [0, 1]], atol=1e-15)


def test_ry_rejects_bad_qubit():
    with pytest.raises(IndexError):
        qsim.apply_ry(qsim.zero_state(2), 2, 0.1)


def test_cnot_control_direction():
    # n=2, L=1, theta=(pi, 0): Ry(pi) puts q0 in |1>, CNOT(q0 -> q1) gives |11>
    psi = qsim.run_ansatz(2, [[np.pi, 0.0]])
    np.testing.assert_allclose(np.abs(psi), [0, 0, 0, 1], atol=1e-15)


def test_cnot_matches_dense():
    # CNOT(0 -> 1) = P0 (x) I + P1 (x) X with the control on qubit 0
    want = dense([P0, np.eye(2)]) + dense([np.diag([0.0, 1.0]), X])
    np.testing.assert_array_equal(qsim.apply_cnot(np.eye(4), 0, 1).T, want)


def test_mcx_rejects_target_in_controls():
    with pytest.raises(ValueError):
        qsim.mcx_permutation(3, (0, 1), 1)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), layers=st.integers(1, 4), seed=st.integers(0, 2 ** 31))
def test_ansatz_is_real_and_normalised(n, layers, seed):
    theta = np.random.default_rng(seed).uniform(-np.pi, np.pi, (layers, n))
    psi = qsim.run_ansatz(n, theta)
    assert qsim.norm_squared(psi) == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.imag(psi) == 0.0)


def test_ansatz_batch_matches_single_runs():
    rng = np.random.default_rng(2)
    thetas = rng.uniform(-np.pi, np.pi, (5, 3, 3))
    batch = qsim.run_ansatz(3, thetas)
    for b in range(5):
        np.testing.assert_allclose(batch[b], qsim.run_ansatz(3, thetas[b]), atol=1e-15)


def test_ansatz_circuit_layout():
    c = qsim.AnsatzCircuit(3, 2, np.arange(6.0))
    assert c.theta.shape == (2, 3) and c.num_parameters == 6
    assert c.theta[1, 0] == 3.0  # layer-major flattening
    with pytest.raises(ValueError):
        qsim.AnsatzCircuit(3, 2, np.zeros(5))


def test_ansatz_inverse_returns_to_zero():
    rng = np.random.default_rng(3)
    c = qsim.AnsatzCircuit(4, 3, rng.uniform(-np.pi, np.pi, 12))
    back = qsim.apply_ansatz_inverse(qsim.prepare_ansatz(c), c)
    np.testing.assert_allclose(back, qsim.zero_state(4), atol=1e-14)


def test_derivative_state_is_twice_the_derivative():
    rng = np.random.default_rng(4)
    c = qsim.AnsatzCircuit(3, 2, rng.uniform(-np.pi, np.pi, 6))
    eps = 1e-5
    for j in range(6):
        e = np.zeros(6)
        e[j] = eps
        fd = (qsim.prepare_ansatz(c.with_theta(c.theta.ravel() + e))
              - qsim.prepare_ansatz(c.with_theta(c.theta.ravel() - e))) / (2 * eps)
        half = 0.5 * qsim.derivative_state(c, j)
        assert np.max(np.abs(fd - half)) < 1e-6 * np.max(np.abs(half))
    np.testing.assert_allclose(qsim.derivative_states(c)[2], qsim.derivative_state(c, 2))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_shift_gates_equal_permutation(k):
    for start in range(5 - k + 1):
        for inverse in (False, True):
            np.testing.assert_array_equal(
                qsim.shift_matrix(5, start, k, inverse),
                qsim.shift_matrix(5, start, k, inverse, method="gates"))


def test_shift_k3_all_basis_states():
    for i in range(8):
        out = qsim.apply_shift(qsim.basis_state(3, i), 0, 3, method="gates")
        assert np.argmax(np.abs(out)) == (i + 1) % 8


def test_shift_acts_only_on_register():
    # x register = qubits 0,1; y register = qubit 2
    psi = qsim.basis_state(3, 0b111)
    out = qsim.apply_cyclic_shift(psi, 2, 1, "XRegister")
    assert np.argmax(np.abs(out)) == 0b100
    out = qsim.apply_cyclic_shift(psi, 2, 1, "YRegister")
    assert np.argmax(np.abs(out)) == 0b011


def test_shift_gate_sequence_order():
    assert qsim.shift_gate_sequence(0, 3) == [((0, 1), 2), ((0,), 1), ((), 0)]
    assert qsim.shift_gate_sequence(2, 2, inverse=True) == [((), 2), ((2,), 3)]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 31), target=st.sampled_from(["x", "y"]),
       method=st.sampled_from(["permutation", "gates"]))
def test_shift_inverse_roundtrip(seed, target, method):
    psi = np.random.default_rng(seed).normal(size=32)
    fwd = qsim.apply_cyclic_shift(psi, 3, 2, target, method=method)
    np.testing.assert_array_equal(
        qsim.apply_cyclic_shift(fwd, 3, 2, target, inverse=True, method=method), psi)


def test_shift_rejects_bad_register():
    with pytest.raises(ValueError):
        qsim.apply_shift(qsim.zero_state(3), 2, 2)
    with pytest.raises(ValueError):
        qsim.apply_cyclic_shift(qsim.zero_state(3), 2, 1, "z")


def test_overlap_matches_vdot():
    rng = np.random.default_rng(5)
    a = qsim.run_ansatz(3, rng.uniform(-np.pi, np.pi, (3, 3)))
    b = qsim.run_ansatz(3, rng.uniform(-np.pi, np.pi, (3, 3)))
    assert qsim.overlap(a, b) == pytest.approx(np.conj(a) @ b, abs=1e-12)
    with pytest.raises(ValueError):
        qsim.overlap(a, np.zeros(4))


def test_observables_match_dense():
    rng = np.random.default_rng(6)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    cases = [
        (SimpleObservable.identity(2.0), 2.0 * np.eye(8)),
        (SimpleObservable.x_on(1, -1.0), -dense([np.eye(2), X, np.eye(2)])),
        (SimpleObservable.projector_x((1, 2), 0, 0.5), 0.5 * dense([X, P0, P0])),
        (SimpleObservable.projector((0, 2), 3.0), 3.0 * dense([P0, np.eye(2), P0])),
    ]
    for obs, m in cases:
        assert qsim.expectation(psi, obs) == pytest.approx(np.real(np.vdot(psi, m @ psi)),
                                                           abs=1e-10)
        np.testing.assert_allclose(qsim.observable_matrix(obs, 3), m, atol=1e-15)


def test_observable_rejects_overlap_of_x_and_projector():
    with pytest.raises(ValueError):
        qsim.apply_observable(qsim.zero_state(2), SimpleObservable.projector_x((0,), 0))


def test_expectation_batched():
    psi = np.stack([qsim.basis_state(2, 0), qsim.basis_state(2, 1)])
    obs = SimpleObservable.projector((0,))
    np.testing.assert_allclose(qsim.expectation(psi, obs), [1.0, 0.0])
