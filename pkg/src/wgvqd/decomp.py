"""Constant-size decomposition of the waveguide operator.

Each 1D operator splits as ``P^T [I(x)(I-X) + |0><0|^(n-1) (x) (X + a I)] P
+ I(x)(I-X)`` with ``P`` the cyclic shift and ``a = +1`` (Dirichlet) or ``-1``
(Neumann). Summing both axes gives a constant plus eight simple observables,
two measured on ``psi``, three on ``V psi`` and three on ``W psi`` where
``V``/``W`` shift the x/y registers. The term count does not depend on the
qubit count, unlike the Pauli expansion kept here as an oracle.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from functools import reduce

import numpy as np

from . import qsim
from .fdm import Boundary

PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1j], [1j, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


class ObservableKind(str, enum.Enum):
    IDENTITY = "identity"
    X = "x"
    PROJECTOR_X = "projector_x"
    PROJECTOR = "projector"


class Conjugation(str, enum.Enum):
    NONE = "none"
    V = "V"
    W = "W"


@dataclass(frozen=True)
class SimpleObservable:
    """``coefficient * |0..0><0..0|_{zero_qubits} (x) X_{x_qubit}``.

    The projector block and the X factor are both optional, giving the four
    kinds. Everything else acts as identity.
    """

    kind: ObservableKind
    coefficient: float = 1.0
    x_qubit: int | None = None
    zero_qubits: tuple = ()

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise ValueError("observable coefficient must be finite")

    @classmethod
    def identity(cls, coefficient=1.0):
        return cls(ObservableKind.IDENTITY, coefficient)

    @classmethod
    def x_on(cls, qubit, coefficient=1.0):
        return cls(ObservableKind.X, coefficient, x_qubit=qubit)

    @classmethod
    def projector_x(cls, zero_qubits, x_qubit, coefficient=1.0):
        return cls(ObservableKind.PROJECTOR_X, coefficient, x_qubit, tuple(zero_qubits))

    @classmethod
    def projector(cls, zero_qubits, coefficient=1.0):
        return cls(ObservableKind.PROJECTOR, coefficient, zero_qubits=tuple(zero_qubits))


@dataclass(frozen=True)
class Term:
    name: str
    observable: SimpleObservable
    scale: float


@dataclass(frozen=True)
class Group:
    conjugation: Conjugation
    terms: tuple


@dataclass(frozen=True)
class DecomposedHamiltonian:
    n_x: int
    n_y: int
    constant: float
    groups: tuple = field(default_factory=tuple)

    @property
    def n_qubits(self):
        return self.n_x + self.n_y

    @property
    def num_terms(self):
        return sum(len(g.terms) for g in self.groups)

    def terms(self):
        for g in self.groups:
            for t in g.terms:
                yield g.conjugation, t


def _sign(spec):
    # a_D = b_TM = +1, a_N = b_TE = -1
    return 1.0 if spec.boundary is Boundary.DIRICHLET else -1.0


def decompose(spec):
    """Split the operator of ``spec`` into its constant and eight terms."""
    nx, ny = spec.n_x, spec.n_y
    sx, sy = spec.scale_x, spec.scale_y
    b = _sign(spec)
    x_block = tuple(range(1, nx))
    y_block = tuple(range(nx + 1, nx + ny))
    O = SimpleObservable
    plain = Group(Conjugation.NONE, (
        Term("H1", O.x_on(0, -1.0), sx),
        Term("H2", O.x_on(nx, -1.0), sy),
    ))
    v_group = Group(Conjugation.V, (
        Term("H3", O.x_on(0, -1.0), sx),
        Term("H4", O.projector_x(x_block, 0), sx),
        Term("H5", O.projector(x_block, b), sx),
    ))
    w_group = Group(Conjugation.W, (
        Term("H6", O.x_on(nx, -1.0), sy),
        Term("H7", O.projector_x(y_block, nx), sy),
        Term("H8", O.projector(y_block, b), sy),
    ))
    return DecomposedHamiltonian(nx, ny, 2.0 * sx + 2.0 * sy, (plain, v_group, w_group))


def perturb_term(d, name, delta):
    """Copy of ``d`` with term ``name``'s coefficient shifted by ``delta``."""
    groups = []
    for g in d.groups:
        terms = tuple(
            replace(t, observable=replace(t.observable,
                                          coefficient=t.observable.coefficient + delta))
            if t.name == name else t
            for t in g.terms)
        groups.append(replace(g, terms=terms))
    return replace(d, groups=tuple(groups))


def conjugate(state, d, conjugation, inverse=False):
    """``V|state>`` / ``W|state>`` (or their adjoints); identity for NONE."""
    conjugation = Conjugation(conjugation)
    if conjugation is Conjugation.NONE:
        return state
    register = "x" if conjugation is Conjugation.V else "y"
    return qsim.apply_cyclic_shift(state, d.n_x, d.n_y, register, inverse=inverse)


def apply_decomposed(d, state):
    """``M |state>`` evaluated term by term."""
    out = d.constant * state
    for g in d.groups:
        phi = conjugate(state, d, g.conjugation)
        acc = np.zeros_like(phi)
        for t in g.terms:
            acc = acc + t.scale * qsim.apply_observable(phi, t.observable)
        out = out + conjugate(acc, d, g.conjugation, inverse=True)
    return out


def expectation_terms(d, state):
    """Per-term expectations ``<phi_i|H_i|phi_i>`` (scale included), by name."""
    values = {}
    for g in d.groups:
        phi = conjugate(state, d, g.conjugation)
        for t in g.terms:
            values[t.name] = t.scale * qsim.expectation(phi, t.observable)
    return values


def expectation_value(d, state):
    """``<state|M|state>`` as the constant plus the eight measured terms."""
    norm = np.sum(np.abs(state) ** 2, axis=-1)
    total = d.constant * norm
    for v in expectation_terms(d, state).values():
        total = total + v
    return total


def reconstruct_dense(d):
    """Explicit matrix ``c I + sum scale * U^T H U`` (test oracle)."""
    n = d.n_qubits
    if n > qsim.MAX_DENSE_QUBITS:
        raise ValueError(f"dense reconstruction capped at {qsim.MAX_DENSE_QUBITS} qubits")
    dim = 2 ** n
    m = d.constant * np.eye(dim)
    for g in d.groups:
        if g.conjugation is Conjugation.NONE:
            u = np.eye(dim)
        elif g.conjugation is Conjugation.V:
            u = qsim.shift_matrix(n, 0, d.n_x)
        else:
            u = qsim.shift_matrix(n, d.n_x, d.n_y)
        h = sum(t.scale * qsim.observable_matrix(t.observable, n) for t in g.terms)
        m = m + u.T @ h @ u
    return m


# ---------------------------------------------------------------------------
# Pauli baseline

MAX_PAULI_QUBITS = 6


def pauli_matrix(label):
    """Kronecker product of the string, leftmost letter on the highest qubit."""
    return reduce(np.kron, (PAULI[c] for c in label))


def pauli_decompose(m, tol=1e-12):
    """Coefficients ``tr(P M) / 2**n`` over all Pauli strings.

    Returns
    -------
    list of (str, complex or float)
        Only strings with ``|c| > tol``. Coefficients are returned as floats
        when their imaginary part vanishes.
    """
    m = np.asarray(m)
    dim = m.shape[0]
    if m.ndim != 2 or m.shape[1] != dim:
        raise ValueError("matrix must be square")
    n = dim.bit_length() - 1
    if dim != 2 ** n or n < 1:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > MAX_PAULI_QUBITS:
        raise ValueError(f"Pauli oracle capped at {MAX_PAULI_QUBITS} qubits")
    out = []
    for letters in itertools.product("IXYZ", repeat=n):
        label = "".join(letters)
        # tr(P M) = sum_ij P_ji M_ij
        c = np.sum(pauli_matrix(label).T * m) / dim
        if abs(c) > tol:
            out.append((label, float(c.real) if abs(c.imag) <= tol else complex(c)))
    return out


def pauli_reconstruct(terms):
    return sum(c * pauli_matrix(label) for label, c in terms)
