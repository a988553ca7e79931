"""Exact statevector simulation of the real hardware-efficient ansatz.

States are plain numpy arrays whose last axis holds the ``2**n`` amplitudes;
any leading axes are treated as a batch, which lets the gradient evaluate all
shifted circuits in one pass. Qubit ``q`` is bit ``q`` of the basis index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

MAX_DENSE_QUBITS = 12


def zero_state(n, dtype=complex, batch=()):
    state = np.zeros(tuple(batch) + (2 ** n,), dtype=dtype)
    state[..., 0] = 1.0
    return state


def basis_state(n, index, dtype=complex):
    state = np.zeros(2 ** n, dtype=dtype)
    state[index] = 1.0
    return state


def num_qubits(state):
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim != 2 ** n:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def _check_qubit(q, n):
    if not 0 <= q < n:
        raise IndexError(f"qubit {q} out of range for {n} qubits")


def apply_ry(state, qubit, theta):
    """Apply ``Ry(theta) = exp(-i theta Y / 2)`` on ``qubit``.

    ``theta`` may be a scalar or an array matching the batch shape of
    ``state``. Returns a new array.
    """
    n = num_qubits(state)
    _check_qubit(qubit, n)
    batch = state.shape[:-1]
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta / 2).reshape(theta.shape + (1, 1))
    s = np.sin(theta / 2).reshape(theta.shape + (1, 1))
    view = state.reshape(batch + (2 ** (n - qubit - 1), 2, 2 ** qubit))
    lo = view[..., 0, :]
    hi = view[..., 1, :]
    out = np.empty_like(view)
    out[..., 0, :] = c * lo - s * hi
    out[..., 1, :] = s * lo + c * hi
    return out.reshape(state.shape)


def mcx_permutation(n, controls, target):
    """Index map of a multi-controlled X: ``new[i] = old[perm[i]]``."""
    _check_qubit(target, n)
    mask = 0
    for q in controls:
        _check_qubit(q, n)
        if q == target:
            raise ValueError("target cannot also be a control")
        mask |= 1 << q
    idx = np.arange(2 ** n)
    fire = (idx & mask) == mask
    return np.where(fire, idx ^ (1 << target), idx)


def apply_mcx(state, controls, target):
    """Multi-controlled X, applied as a direct controlled permutation."""
    perm = mcx_permutation(num_qubits(state), tuple(controls), target)
    return state[..., perm]


def apply_cnot(state, control, target):
    return apply_mcx(state, (control,), target)


@lru_cache(maxsize=None)
def _entangler_permutation(n):
    perm = np.arange(2 ** n)
    for q in range(n - 1):
        perm = perm[mcx_permutation(n, (q,), q + 1)]
    return perm


@lru_cache(maxsize=None)
def _entangler_inverse(n):
    return np.argsort(_entangler_permutation(n))


def apply_cnot_chain(state):
    """CNOT(q -> q+1) for q = 0 .. n-2, in that order."""
    return state[..., _entangler_permutation(num_qubits(state))]


# ---------------------------------------------------------------------------
# Ansatz


@dataclass
class AnsatzCircuit:
    """Layered Ry column + linear CNOT chain, starting from ``|0...0>``.

    ``theta`` has shape ``(layers, n)``; flat parameter ``j`` is
    ``theta.flat[j]``, i.e. layer-major.
    """

    n: int
    layers: int
    theta: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n < 1 or self.layers < 1:
            raise ValueError("ansatz needs n >= 1 and layers >= 1")
        if self.theta is None:
            self.theta = np.zeros((self.layers, self.n))
        theta = np.asarray(self.theta, dtype=float)
        if theta.size != self.layers * self.n:
            raise ValueError(
                f"expected {self.layers * self.n} angles, got {theta.size}")
        self.theta = theta.reshape(self.layers, self.n)

    @property
    def num_parameters(self):
        return self.layers * self.n

    def with_theta(self, theta):
        return AnsatzCircuit(self.n, self.layers, np.array(theta, dtype=float))


def run_ansatz(n, thetas, dtype=complex):
    """Prepare a batch of ansatz states.

    Parameters
    ----------
    n : int
        Qubit count.
    thetas : array_like, shape (..., layers, n)
        Angles; leading axes form the batch.

    Returns
    -------
    numpy.ndarray, shape (..., 2**n)
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim < 2 or thetas.shape[-1] != n:
        raise ValueError("thetas must have shape (..., layers, n)")
    batch = thetas.shape[:-2]
    state = zero_state(n, dtype=dtype, batch=batch)
    for layer in range(thetas.shape[-2]):
        for q in range(n):
            state = apply_ry(state, q, thetas[..., layer, q])
        state = apply_cnot_chain(state)
    return state


def prepare_ansatz(circuit, dtype=complex):
    return run_ansatz(circuit.n, circuit.theta, dtype=dtype)


def apply_ansatz_inverse(state, circuit):
    """Apply ``U(theta)^dagger`` to ``state`` (reverse order, negated angles)."""
    n = circuit.n
    inv = _entangler_inverse(n)
    for layer in reversed(range(circuit.layers)):
        state = state[..., inv]
        for q in reversed(range(n)):
            state = apply_ry(state, q, -circuit.theta[layer, q])
    return state


def shifted_thetas(theta, shift=np.pi):
    """All single-parameter shifts of ``theta`` stacked on a new leading axis."""
    theta = np.asarray(theta, dtype=float)
    flat = theta.reshape(-1)
    batch = np.repeat(flat[None, :], flat.size, axis=0)
    batch[np.arange(flat.size), np.arange(flat.size)] += shift
    return batch.reshape((flat.size,) + theta.shape)


def derivative_state(circuit, j, dtype=complex):
    """State with parameter ``j`` shifted by pi.

    For an Ry-only ansatz this equals ``2 d|psi>/d theta_j``; it is normalised,
    so callers divide by 2 to get the plain derivative.
    """
    if not 0 <= j < circuit.num_parameters:
        raise IndexError(f"parameter index {j} out of range")
    theta = circuit.theta.copy()
    theta.flat[j] += np.pi
    return run_ansatz(circuit.n, theta, dtype=dtype)


def derivative_states(circuit, dtype=complex):
    """Every :func:`derivative_state` at once, shape ``(L*n, 2**n)``."""
    return run_ansatz(circuit.n, shifted_thetas(circuit.theta), dtype=dtype)


# ---------------------------------------------------------------------------
# Cyclic shifts


def _register(n_x, n_y, target):
    if target in ("x", "XRegister"):
        return 0, n_x
    if target in ("y", "YRegister"):
        return n_x, n_y
    raise ValueError(f"unknown register {target!r}")


def shift_permutation(n, start, k, inverse=False):
    """Index map for ``|i> -> |i + 1 mod 2**k>`` on qubits ``start .. start+k-1``.

    Used as ``new = old[perm]``.
    """
    idx = np.arange(2 ** n)
    size = 2 ** k
    field_ = (idx >> start) & (size - 1)
    # new[i] = old[P^-1 i] for the forward shift
    step = 1 if inverse else -1
    src = (field_ + step) % size
    return idx - (field_ << start) + (src << start)


def shift_gate_sequence(start, k, inverse=False):
    """Multi-controlled X gates realising the register increment.

    The forward shift flips the top bit first, controlled on every lower bit,
    then works down to an uncontrolled X on the lowest bit. The inverse runs
    the same gates in reverse order.
    """
    gates = []
    for t in reversed(range(k)):
        gates.append((tuple(start + c for c in range(t)), start + t))
    if inverse:
        gates.reverse()
    return gates


def apply_shift(state, start, k, inverse=False, method="permutation"):
    n = num_qubits(state)
    if start < 0 or k < 1 or start + k > n:
        raise ValueError(f"register [{start}, {start + k}) outside {n} qubits")
    if method == "permutation":
        return state[..., shift_permutation(n, start, k, inverse)]
    if method == "gates":
        for controls, target in shift_gate_sequence(start, k, inverse):
            state = apply_mcx(state, controls, target)
        return state
    raise ValueError(f"unknown method {method!r}")


def apply_cyclic_shift(state, n_x, n_y, target, inverse=False, method="permutation"):
    """Cyclic shift on the x register (low ``n_x`` qubits) or the y register."""
    start, k = _register(n_x, n_y, target)
    return apply_shift(state, start, k, inverse=inverse, method=method)


def shift_matrix(n, start, k, inverse=False, method="permutation"):
    """Dense matrix of :func:`apply_shift`, column ``i`` is the image of ``|i>``."""
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrices capped at {MAX_DENSE_QUBITS} qubits")
    eye = np.eye(2 ** n)
    # rows of eye are basis states; transpose to make them columns
    return apply_shift(eye, start, k, inverse, method).T


# ---------------------------------------------------------------------------
# Measurements


def overlap(s1, s2):
    """``<s1|s2>``."""
    if s1.shape[-1] != s2.shape[-1]:
        raise ValueError("state size mismatch")
    return np.vdot(s1, s2)


def norm_squared(state):
    return float(np.real(np.vdot(state, state)))


def _observable_parts(obs, n):
    kind = str(getattr(obs.kind, "value", obs.kind))
    for q in obs.zero_qubits:
        _check_qubit(q, n)
    idx = np.arange(2 ** n)
    mask = 0
    for q in obs.zero_qubits:
        mask |= 1 << q
    select = (idx & mask) == 0
    if kind in ("x", "projector_x"):
        _check_qubit(obs.x_qubit, n)
        if obs.x_qubit in obs.zero_qubits:
            raise ValueError("X qubit overlaps the projector block")
        source = idx ^ (1 << obs.x_qubit)
    elif kind in ("identity", "projector"):
        source = idx
    else:
        raise ValueError(f"unknown observable kind {kind!r}")
    return source, select


def apply_observable(state, obs):
    """``H |state>`` for a simple observable, without forming ``H``."""
    source, select = _observable_parts(obs, num_qubits(state))
    return obs.coefficient * np.where(select, state[..., source], 0.0)


def expectation(state, obs):
    """Exact ``<state|H|state>``; batched over leading axes."""
    value = np.sum(np.conj(state) * apply_observable(state, obs), axis=-1)
    scale = max(1.0, abs(obs.coefficient))
    if np.any(np.abs(np.imag(value)) > 1e-12 * scale):
        raise ArithmeticError("observable expectation has an imaginary part")
    value = np.real(value)
    return float(value) if value.ndim == 0 else value


def observable_matrix(obs, n):
    """Dense matrix of a simple observable (test oracle)."""
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense matrices capped at {MAX_DENSE_QUBITS} qubits")
    return apply_observable(np.eye(2 ** n), obs).T
