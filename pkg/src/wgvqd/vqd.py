"""Variational quantum deflation for the waveguide operator.

Mode ``k`` minimises ``<psi|M|psi> + beta * sum_i |<psi|psi_i>|^2`` over the
ansatz parameters, where ``psi_i`` are the states accepted for modes
``0 .. k-1``. ``<psi|M|psi>`` is evaluated from the eight-term decomposition,
and the gradient uses the pi-shifted ansatz states:
``dF/dtheta_j = <psi(theta + pi e_j)| A |psi(theta)>`` with
``A = M + beta * sum_i |psi_i><psi_i|``.

Internally the optimiser sees the cost divided by ``4 (s_x + s_y)``, an upper
bound on the spectrum of ``M``, so tolerances are scale free; everything
reported is in physical units (1/m**2 and Hz).
"""
from __future__ import annotations

import enum
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import decomp, eigoracle, fdm, qsim
from .optim import OptimizationTrace, OptimizerConfig, minimize

logger = logging.getLogger(__name__)

FIDELITY_THRESHOLD = 0.95
SELF_CHECK_RTOL = 1e-4


class GradientMode(str, enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "fd"


class Classification(str, enum.Enum):
    CORRECT = "Correct"
    HIGHER_MODE = "ConvergedHigherMode"
    INCORRECT = "IncorrectMinimum"


def spectral_bound(spec):
    """``4 s_x + 4 s_y`` >= the largest eigenvalue of the assembled operator."""
    return 4.0 * (spec.scale_x + spec.scale_y)


def default_beta(spec):
    return 1.25 * spectral_bound(spec)


@dataclass(frozen=True)
class VqdConfig:
    spec: fdm.WaveguideSpec
    layers: int | None = None
    modes: int = 1
    beta: float | None = None
    trials: int = 5
    seed: int = 0
    gradient_mode: GradientMode = GradientMode.ANALYTIC
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    workers: int = 1
    self_check: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gradient_mode", GradientMode(self.gradient_mode))
        if self.layers is None:
            object.__setattr__(self, "layers", self.spec.n_qubits)
        if self.beta is None:
            object.__setattr__(self, "beta", default_beta(self.spec))
        if self.layers < 1:
            raise ValueError("need at least one ansatz layer")
        if self.trials < 1:
            raise ValueError("need at least one trial per mode")
        if not 1 <= self.modes <= self.spec.dim:
            raise ValueError(f"modes must lie in [1, {self.spec.dim}]")
        if not self.beta > spectral_bound(self.spec):
            raise ValueError(
                f"beta={self.beta:g} must exceed the spectral bound "
                f"{spectral_bound(self.spec):g} so every deflation gap is covered")

    @property
    def n_qubits(self):
        return self.spec.n_qubits

    @property
    def num_parameters(self):
        return self.layers * self.spec.n_qubits


# ---------------------------------------------------------------------------
# Cost and gradient


def _as_states(deflation_states, dim):
    if deflation_states is None or len(deflation_states) == 0:
        return np.zeros((0, dim))
    return np.asarray(deflation_states).reshape(-1, dim)


def penalty(state, deflation_states, beta):
    """``beta * sum_i |<psi_i|state>|^2``; batched over leading axes of state."""
    defl = _as_states(deflation_states, state.shape[-1])
    if len(defl) == 0:
        return np.zeros(state.shape[:-1]) if state.ndim > 1 else 0.0
    ov = state @ defl.conj().T
    return beta * np.sum(np.abs(ov) ** 2, axis=-1)


def cost(theta, k, deflation_states, d, beta, layers=None, state=None):
    """Deflated cost ``F_k(theta)`` in 1/m**2.

    ``theta`` has ``layers * n`` entries (``layers`` defaults to ``n``).
    Only the first ``k`` deflation states are used.
    """
    n = d.n_qubits
    theta = np.asarray(theta, dtype=float)
    layers = layers or theta.size // n
    if state is None:
        state = qsim.run_ansatz(n, theta.reshape(layers, n), dtype=float)
    defl = _as_states(deflation_states, state.shape[-1])[:k]
    return decomp.expectation_value(d, state) + penalty(state, defl, beta)


def apply_deflated(d, state, deflation_states, beta):
    """``A |state>`` with ``A = M + beta * sum_i |psi_i><psi_i|``."""
    out = decomp.apply_decomposed(d, state)
    defl = _as_states(deflation_states, state.shape[-1])
    if len(defl):
        out = out + beta * (defl.T @ (defl.conj() @ state))
    return out


def gradient(theta, k, deflation_states, d, beta, layers=None):
    """Analytic gradient of :func:`cost` from the pi-shifted ansatz states."""
    n = d.n_qubits
    theta = np.asarray(theta, dtype=float)
    layers = layers or theta.size // n
    circuit = qsim.AnsatzCircuit(n, layers, theta)
    psi = qsim.prepare_ansatz(circuit, dtype=float)
    defl = _as_states(deflation_states, psi.shape[-1])[:k]
    a_psi = apply_deflated(d, psi, defl, beta)
    shifted = qsim.derivative_states(circuit, dtype=float)
    return np.real(shifted.conj() @ a_psi)


def gradient_finite_difference(theta, k, deflation_states, d, beta, layers=None, eps=1e-5):
    """Central differences of :func:`cost`, all parameters in one batch."""
    n = d.n_qubits
    theta = np.asarray(theta, dtype=float).ravel()
    layers = layers or theta.size // n
    plus = qsim.shifted_thetas(theta, eps)
    minus = qsim.shifted_thetas(theta, -eps)
    batch = np.concatenate([plus, minus]).reshape(-1, layers, n)
    states = qsim.run_ansatz(n, batch, dtype=float)
    values = cost(theta, k, deflation_states, d, beta, layers, state=states)
    return (values[: theta.size] - values[theta.size:]) / (2 * eps)


def gradient_extended_register(theta, deflation_thetas, d, beta, layers=None):
    """Gradient assembled from ancilla-register expectation values.

    Each component is ``<X (x) M>`` on ``(|0>|d_j psi> + |1>|psi>)/sqrt 2``
    plus, per deflated mode ``i``, ``beta <X (x) |0..0><0..0|>`` on that state
    after un-preparing ``psi_i`` on the system register. This is the form a
    device would measure; it must agree with :func:`gradient`.
    """
    n = d.n_qubits
    theta = np.asarray(theta, dtype=float)
    layers = layers or theta.size // n
    circuit = qsim.AnsatzCircuit(n, layers, theta)
    psi = qsim.prepare_ansatz(circuit)
    dpsi = qsim.derivative_states(circuit)
    dim = psi.size
    ancilla_x_zero = decomp.SimpleObservable.projector_x(range(n), n)
    previous = [qsim.AnsatzCircuit(n, layers, t) for t in deflation_thetas]
    grad = np.empty(circuit.num_parameters)
    for j in range(circuit.num_parameters):
        ext = np.concatenate([dpsi[j], psi]) / np.sqrt(2.0)
        # (X (x) M) acting on the ancilla-extended state
        m_ext = np.concatenate([decomp.apply_decomposed(d, ext[dim:]),
                                decomp.apply_decomposed(d, ext[:dim])])
        value = np.real(np.vdot(ext, m_ext))
        for prev in previous:
            phi = np.concatenate([qsim.apply_ansatz_inverse(ext[:dim], prev),
                                  qsim.apply_ansatz_inverse(ext[dim:], prev)])
            value += beta * qsim.expectation(phi, ancilla_x_zero)
        grad[j] = value
    return grad


class DeflatedObjective:
    """Normalised cost/gradient pair for the optimiser, sharing one cache."""

    def __init__(self, d, layers, deflation_states, beta, scale,
                 gradient_mode=GradientMode.ANALYTIC):
        self.d = d
        self.layers = layers
        self.defl = _as_states(deflation_states, 2 ** d.n_qubits)
        self.k = len(self.defl)
        self.beta = beta
        self.scale = scale
        self.gradient_mode = GradientMode(gradient_mode)
        self._key = None
        self._value = None

    def value(self, theta):
        key = theta.tobytes()
        if key != self._key:
            self._value = cost(theta, self.k, self.defl, self.d, self.beta, self.layers)
            self._key = key
        return self._value / self.scale

    def grad(self, theta):
        if self.gradient_mode is GradientMode.ANALYTIC:
            g = gradient(theta, self.k, self.defl, self.d, self.beta, self.layers)
        else:
            g = gradient_finite_difference(theta, self.k, self.defl, self.d,
                                           self.beta, self.layers)
        return g / self.scale


# ---------------------------------------------------------------------------
# Results


@dataclass
class TrialResult:
    trial: int
    theta: np.ndarray
    cost: float          # F_k, 1/m**2
    energy: float        # <psi|M|psi>, 1/m**2
    state: np.ndarray
    trace: OptimizationTrace
    fidelity: float = float("nan")
    classification: Classification | None = None


@dataclass
class ModeResult:
    """Accepted (lowest-cost) trial for deflation index ``k`` plus all trials."""

    k: int
    best: TrialResult
    trials: list
    label: tuple = ()

    @property
    def theta(self):
        return self.best.theta

    @property
    def energy(self):
        return self.best.energy

    @property
    def state(self):
        return self.best.state

    @property
    def fidelity(self):
        return self.best.fidelity

    @property
    def classification(self):
        return self.best.classification

    @property
    def trace(self):
        return self.best.trace

    @property
    def cutoff_hz(self):
        return fdm.eigenvalue_to_cutoff(self.energy, abs(self.energy) + 1.0)

    def success_rate(self):
        return sum(t.classification is Classification.CORRECT
                   for t in self.trials) / len(self.trials)


@dataclass
class VqdResult:
    config: VqdConfig
    modes: list
    reference: eigoracle.EigenDecomposition | None = None

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)

    def __getitem__(self, k):
        return self.modes[k]

    def physical_modes(self):
        """Modes excluding the constant TE solution, which does not propagate."""
        return [m for m in self.modes if m.label != ((0, 0),)]


# ---------------------------------------------------------------------------
# Reference and classification


def reference_eigensystem(spec):
    if spec.n_qubits > qsim.MAX_DENSE_QUBITS:
        return None
    return eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec))


def classify(state, k, eig):
    """Fidelity with the k-th eigenspace and the three-way classification."""
    if eig is None:
        return float("nan"), None
    fid = eigoracle.eigenspace_fidelity(state, eig, k)
    if fid >= FIDELITY_THRESHOLD:
        return fid, Classification.CORRECT
    own = set(int(i) for i in eig.eigenspace_indices(k))
    for level in eig.distinct_levels():
        if min(level) <= k or own.intersection(level):
            continue
        if eigoracle.fidelity(state, eig.vectors[:, level]) >= FIDELITY_THRESHOLD:
            return fid, Classification.HIGHER_MODE
    return fid, Classification.INCORRECT


def mode_label(spec, energy, rtol=eigoracle.DEGENERACY_RTOL):
    """Physical (m, n) indices whose discrete eigenvalue matches ``energy``.

    Returns a tuple of index pairs: one pair normally, several when the
    discrete spectrum is degenerate at that value.
    """
    indices = fdm.mode_indices(spec)
    values = np.array([fdm.discrete_eigenvalue(spec, m, n) for m, n in indices])
    tol = rtol * values.max()
    nearest = values[np.argmin(np.abs(values - energy))]
    return tuple(sorted(ix for ix, v in zip(indices, values) if abs(v - nearest) <= tol))


def format_label(spec, label):
    return "+".join(f"{spec.family.value}{m}{n}" for m, n in label)


# ---------------------------------------------------------------------------
# Driver


def trial_seed(seed, k, trial):
    return np.random.SeedSequence([int(seed), int(k), int(trial)])


def initial_theta(seed, k, trial, size):
    rng = np.random.default_rng(trial_seed(seed, k, trial))
    return rng.uniform(-np.pi, np.pi, size)


def _run_trial(job):
    d, layers, defl, beta, scale, mode, opt_cfg, theta0, trial = job
    obj = DeflatedObjective(d, layers, defl, beta, scale, mode)
    theta, _, trace = minimize(obj.value, obj.grad, theta0, opt_cfg)
    n = d.n_qubits
    state = qsim.run_ansatz(n, theta.reshape(layers, n), dtype=float)
    energy = float(decomp.expectation_value(d, state))
    f_k = float(cost(theta, len(defl), defl, d, beta, layers, state=state))
    return TrialResult(trial, theta.reshape(layers, n), f_k, energy, state, trace)


def check_gradient(d, layers, deflation_states, beta, rng, eps=1e-5):
    """Relative discrepancy between analytic and finite-difference gradients."""
    theta = rng.uniform(-np.pi, np.pi, layers * d.n_qubits)
    k = len(deflation_states)
    ga = gradient(theta, k, deflation_states, d, beta, layers)
    gf = gradient_finite_difference(theta, k, deflation_states, d, beta, layers, eps)
    return float(np.max(np.abs(ga - gf)) / max(np.max(np.abs(gf)), 1e-300))


def _map(jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_trial, jobs))
    return [_run_trial(j) for j in jobs]


def solve(cfg, reference="auto", progress=None):
    """Run the deflation loop for ``cfg.modes`` modes.

    Parameters
    ----------
    cfg : VqdConfig
    reference : EigenDecomposition, None or "auto"
        Classical eigensystem for fidelities; ``"auto"`` computes it when the
        register is small enough for a dense solve.
    progress : callable, optional
        Called as ``progress(k, ModeResult)`` after each mode.

    Returns
    -------
    VqdResult
    """
    spec = cfg.spec
    d = decomp.decompose(spec)
    n = spec.n_qubits
    scale = spectral_bound(spec)
    if isinstance(reference, str):
        reference = reference_eigensystem(spec)
    if cfg.self_check and cfg.gradient_mode is GradientMode.ANALYTIC:
        err = check_gradient(d, cfg.layers, np.zeros((0, spec.dim)), cfg.beta,
                             np.random.default_rng([int(cfg.seed), 2 ** 32 - 1]))
        if err > SELF_CHECK_RTOL:
            raise RuntimeError(f"analytic gradient self-check failed (rel err {err:.2e})")

    accepted = []
    modes = []
    for k in range(cfg.modes):
        defl = np.array(accepted).reshape(k, spec.dim)
        jobs = [(d, cfg.layers, defl, cfg.beta, scale, cfg.gradient_mode, cfg.optimizer,
                 initial_theta(cfg.seed, k, t, cfg.num_parameters), t)
                for t in range(cfg.trials)]
        trials = _map(jobs, cfg.workers)
        for tr in trials:
            tr.fidelity, tr.classification = classify(tr.state, k, reference)
        best = min(trials, key=lambda tr: (tr.cost, tr.trial))
        mode = ModeResult(k, best, trials, mode_label(spec, best.energy))
        logger.info("mode %d: E=%.6e (%s), fidelity %.6f", k, best.energy,
                    format_label(spec, mode.label), best.fidelity)
        modes.append(mode)
        accepted.append(best.state)
        if progress is not None:
            progress(k, mode)
    return VqdResult(cfg, modes, reference)


def default_workers():
    env = os.environ.get("WGVQD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
