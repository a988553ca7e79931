"""Cross-module oracle checks, all at six qubits or fewer.

Every check compares a production code path with an independent reference
(closed forms, explicit Kronecker products, finite differences, brute-force
basis sweeps) and reports a residual against a tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import decomp, eigoracle, fdm, optim, qsim, vqd
from .fdm import Boundary, Family


@dataclass(frozen=True)
class CheckResult:
    module: str
    name: str
    residual: float
    tolerance: float

    @property
    def passed(self):
        return bool(np.isfinite(self.residual) and self.residual <= self.tolerance)

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return (f"{flag} {self.module}.{self.name} residual={self.residual:.3e} "
                f"tol={self.tolerance:.1e}")


_CHECKS = []


def check(module, name, tolerance):
    def wrap(fn):
        _CHECKS.append((module, name, tolerance, fn))
        return fn
    return wrap


def _rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def _kron_oracle(factors):
    """Dense operator from per-qubit 2x2 factors, qubit 0 least significant."""
    return reduce(np.kron, factors[::-1])


# ---------------------------------------------------------------------------
# fdm


@check("fdm", "1d_closed_form_spectrum", 1e-10)
def _(ctx):
    worst = 0.0
    for n_t in range(1, 6):
        for bc in Boundary:
            eig = eigoracle.eigensolve_symmetric(fdm.build_1d_operator(n_t, bc))
            worst = max(worst, np.max(np.abs(eig.values - fdm.closed_form_1d_eigenvalues(n_t, bc))))
    return worst


@check("fdm", "kronecker_sum_spectrum", 1e-10)
def _(ctx):
    worst = 0.0
    for n_x, n_y, fam in ((2, 2, Family.TM), (3, 2, Family.TE), (1, 3, Family.TM)):
        spec = fdm.unit_spec(n_x, n_y, fam)
        got = eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec)).values
        lx = fdm.closed_form_1d_eigenvalues(n_x, spec.boundary)
        ly = fdm.closed_form_1d_eigenvalues(n_y, spec.boundary)
        want = np.sort(np.add.outer(ly, lx).ravel())
        worst = max(worst, np.max(np.abs(got - want)))
    return worst


@check("fdm", "te10_scaled_eigenvalue", 1e-12)
def _(ctx):
    # 15 x 10 mm guide at n_x = 4, n_y = 2 (six qubits)
    spec = fdm.WaveguideSpec(0.015, 0.010, 4, 2, Family.TE)
    eig = eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec))
    want = (2.0 * np.sin(np.pi / 32) / spec.dx) ** 2
    return abs(eig.values[1] - want) / want


# ---------------------------------------------------------------------------
# decomp


@check("decomp", "reconstruction_equivalence", 1e-12)
def _(ctx):
    worst = 0.0
    for n_x in (1, 2, 3):
        for n_y in (1, 2, 3):
            for fam in Family:
                spec = fdm.unit_spec(n_x, n_y, fam)
                d = decomp.decompose(spec)
                if ctx.get("inject_fault"):
                    d = decomp.perturb_term(d, "H4", 1e-6)
                diff = decomp.reconstruct_dense(d) - fdm.assemble_2d(spec)
                worst = max(worst, np.max(np.abs(diff)))
    return worst


@check("decomp", "tm_1x1_explicit_matrix", 1e-12)
def _(ctx):
    # Kronecker sum of two [[3, -1], [-1, 3]] blocks, written out by hand
    want = np.array([[6, -1, -1, 0], [-1, 6, 0, -1], [-1, 0, 6, -1], [0, -1, -1, 6]], float)
    d = decomp.decompose(fdm.unit_spec(1, 1, Family.TM))
    return float(np.max(np.abs(decomp.reconstruct_dense(d) - want)))


@check("decomp", "pauli_reconstruction", 1e-10)
def _(ctx):
    worst = 0.0
    for n_x, n_y in ((1, 1), (2, 1), (1, 2), (2, 2), (3, 1)):
        for fam in Family:
            m = fdm.assemble_2d(fdm.unit_spec(n_x, n_y, fam))
            terms = decomp.pauli_decompose(m)
            worst = max(worst, np.max(np.abs(decomp.pauli_reconstruct(terms) - m)))
    return worst


@check("decomp", "expectation_vs_dense", 1e-10)
def _(ctx):
    rng = ctx["rng"]
    worst = 0.0
    for n_x, n_y, fam in ((1, 1, Family.TM), (2, 3, Family.TE), (3, 3, Family.TM)):
        spec = fdm.WaveguideSpec(0.015, 0.010, n_x, n_y, fam)
        m = fdm.assemble_2d(spec)
        d = decomp.decompose(spec)
        psi = rng.normal(size=(4, spec.dim))
        psi /= np.linalg.norm(psi, axis=1, keepdims=True)
        want = np.einsum("bi,ij,bj->b", psi, m, psi)
        worst = max(worst, _rel(decomp.expectation_value(d, psi), want))
        worst = max(worst, _rel(decomp.apply_decomposed(d, psi[0]), m @ psi[0]))
    return worst


# ---------------------------------------------------------------------------
# qsim


def _random_ansatz_state(rng, n, layers, dtype=complex):
    theta = rng.uniform(-np.pi, np.pi, (layers, n))
    return qsim.run_ansatz(n, theta, dtype=dtype)


@check("qsim", "norm_preservation", 1e-12)
def _(ctx):
    rng = ctx["rng"]
    return max(abs(qsim.norm_squared(_random_ansatz_state(rng, n, n)) - 1.0)
               for n in range(1, 7))


@check("qsim", "real_amplitudes", 0.0)
def _(ctx):
    rng = ctx["rng"]
    return max(float(np.max(np.abs(np.imag(_random_ansatz_state(rng, n, n)))))
               for n in range(1, 7))


@check("qsim", "ansatz_control_direction", 1e-12)
def _(ctx):
    psi = qsim.run_ansatz(2, np.array([[np.pi, 0.0]]))
    return float(np.max(np.abs(psi - qsim.basis_state(2, 3))))


@check("qsim", "shift_permutation_vs_mcx", 0.0)
def _(ctx):
    worst = 0.0
    for n in range(1, 7):
        for k in range(1, min(n, 4) + 1):
            for start in range(n - k + 1):
                for inverse in (False, True):
                    direct = qsim.shift_matrix(n, start, k, inverse)
                    gates = qsim.shift_matrix(n, start, k, inverse, method="gates")
                    worst = max(worst, np.max(np.abs(direct - gates)))
    return worst


@check("qsim", "shift_increments_register", 0.0)
def _(ctx):
    # brute force over basis inputs: |i> -> |i + 1 mod 2**k> on the register
    worst = 0
    n, start, k = 5, 1, 3
    for i in range(2 ** n):
        out = qsim.apply_shift(qsim.basis_state(n, i), start, k, method="gates")
        field_ = (i >> start) & (2 ** k - 1)
        j = i - (field_ << start) + (((field_ + 1) % 2 ** k) << start)
        worst = max(worst, int(np.argmax(np.abs(out)) != j))
    return float(worst)


@check("qsim", "shift_inverse_roundtrip", 0.0)
def _(ctx):
    rng = ctx["rng"]
    psi = rng.normal(size=64)
    worst = 0.0
    for target in ("x", "y"):
        out = qsim.apply_cyclic_shift(
            qsim.apply_cyclic_shift(psi, 3, 3, target), 3, 3, target, inverse=True)
        worst = max(worst, np.max(np.abs(out - psi)))
    return worst


@check("qsim", "observable_vs_kron_oracle", 1e-10)
def _(ctx):
    rng = ctx["rng"]
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    p0 = np.diag([1.0, 0.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    # H4-type: |00><00| on qubits 1, 2 and X on qubit 0
    obs = decomp.SimpleObservable.projector_x((1, 2), 0, 0.7)
    dense = 0.7 * _kron_oracle([x, p0, p0])
    return abs(qsim.expectation(psi, obs) - np.real(np.vdot(psi, dense @ psi)))


@check("qsim", "derivative_state_vs_fd", 1e-6)
def _(ctx):
    rng = ctx["rng"]
    n, layers, eps = 3, 2, 1e-5
    circuit = qsim.AnsatzCircuit(n, layers, rng.uniform(-np.pi, np.pi, n * layers))
    worst = 0.0
    for j in range(circuit.num_parameters):
        e = np.zeros(circuit.num_parameters)
        e[j] = eps
        plus = qsim.prepare_ansatz(circuit.with_theta(circuit.theta.ravel() + e))
        minus = qsim.prepare_ansatz(circuit.with_theta(circuit.theta.ravel() - e))
        fd = (plus - minus) / (2 * eps)
        worst = max(worst, _rel(fd, 0.5 * qsim.derivative_state(circuit, j)))
    return worst


# ---------------------------------------------------------------------------
# eigoracle


@check("eigoracle", "two_by_two", 1e-14)
def _(ctx):
    eig = eigoracle.eigensolve_symmetric([[3.0, -1.0], [-1.0, 3.0]])
    v = eig.vectors * np.sign(eig.vectors[0])
    want = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2)
    return max(float(np.max(np.abs(eig.values - [2.0, 4.0]))), float(np.max(np.abs(v - want))))


@check("eigoracle", "reconstruction_and_orthonormality", 1e-11)
def _(ctx):
    rng = ctx["rng"]
    a = rng.normal(size=(64, 64))
    a = a + a.T
    eig = eigoracle.eigensolve_symmetric(a)
    v = eig.vectors
    recon = _rel(v @ np.diag(eig.values) @ v.T, a)
    ortho = float(np.max(np.abs(v.T @ v - np.eye(64))))
    return max(recon, ortho)


@check("eigoracle", "degenerate_eigenspace_fidelity", 1e-10)
def _(ctx):
    # square guide: TE10 and TE01 share an eigenvalue
    spec = fdm.WaveguideSpec(0.01, 0.01, 2, 2, Family.TE)
    eig = eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec))
    idx = eig.eigenspace_indices(1)
    if len(idx) != 2:
        return float("inf")
    rng = ctx["rng"]
    psi = eig.vectors[:, idx] @ rng.normal(size=2) + 0.3 * eig.vectors[:, 0]
    psi /= np.linalg.norm(psi)
    # explicit projection onto the two-dimensional span
    q, _ = np.linalg.qr(eig.vectors[:, idx])
    want = float(np.linalg.norm(q.T @ psi) ** 2)
    return abs(eigoracle.eigenspace_fidelity(psi, eig, 1) - want)


# ---------------------------------------------------------------------------
# optim and vqd


@check("optim", "one_minus_sin", 1e-6)
def _(ctx):
    x, fx, _ = optim.minimize(lambda t: 1.0 - np.sin(t[0]), lambda t: np.array([-np.cos(t[0])]),
                              [0.1])
    return max(abs(x[0] - np.pi / 2), abs(fx))


@check("vqd", "single_qubit_cost_and_gradient", 1e-12)
def _(ctx):
    # M = I - X on one qubit: cost 1 - sin(theta), gradient -cos(theta)
    obs = decomp.SimpleObservable.x_on(0, -1.0)
    worst = 0.0
    for theta in np.linspace(-3.0, 3.0, 7):
        circuit = qsim.AnsatzCircuit(1, 1, np.array([theta]))
        psi = qsim.prepare_ansatz(circuit)
        value = 1.0 + qsim.expectation(psi, obs)
        dpsi = qsim.derivative_state(circuit, 0)
        grad = np.real(np.vdot(dpsi, psi + qsim.apply_observable(psi, obs)))
        worst = max(worst, abs(value - (1 - np.sin(theta))), abs(grad + np.cos(theta)))
    return worst


@check("vqd", "cost_vs_dense", 1e-10)
def _(ctx):
    rng = ctx["rng"]
    worst = 0.0
    for fam in Family:
        spec = fdm.unit_spec(1, 1, fam)
        d = decomp.decompose(spec)
        m = fdm.assemble_2d(spec)
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, 4)
            psi = qsim.run_ansatz(2, theta.reshape(2, 2), dtype=float)
            worst = max(worst, abs(vqd.cost(theta, 0, None, d, 10.0) - psi @ m @ psi))
    return worst


def gradient_residuals(rng, n_thetas=20, ks=(0, 1, 2), n_x=2, n_y=2, family=Family.TM):
    """Worst analytic-vs-FD and analytic-vs-ancilla gradient discrepancies.

    The FD discrepancy is ``max_j |g_j - g_fd_j| / max_j |g_fd_j|`` per
    gradient vector, maximised over all samples.
    """
    spec = fdm.unit_spec(n_x, n_y, family)
    d = decomp.decompose(spec)
    n = spec.n_qubits
    beta = vqd.default_beta(spec)
    defl_thetas = rng.uniform(-np.pi, np.pi, (max(ks), n * n))
    defl = qsim.run_ansatz(n, defl_thetas.reshape(-1, n, n), dtype=float)
    fd_worst = anc_worst = 0.0
    for i in range(n_thetas):
        theta = rng.uniform(-np.pi, np.pi, n * n)
        for k in ks:
            ga = vqd.gradient(theta, k, defl, d, beta)
            gf = vqd.gradient_finite_difference(theta, k, defl, d, beta)
            fd_worst = max(fd_worst, _rel(ga, gf))
            if i < 2:
                ge = vqd.gradient_extended_register(theta, defl_thetas[:k], d, beta)
                anc_worst = max(anc_worst, _rel(ge, ga))
    return fd_worst, anc_worst


@check("vqd", "gradient_vs_finite_difference", 1e-6)
def _(ctx):
    if "gradient" not in ctx:
        ctx["gradient"] = gradient_residuals(ctx["rng"])
    return ctx["gradient"][0]


@check("vqd", "gradient_vs_extended_register", 1e-10)
def _(ctx):
    if "gradient" not in ctx:
        ctx["gradient"] = gradient_residuals(ctx["rng"])
    return ctx["gradient"][1]


def run_checks(seed=0, inject_fault=False):
    """Run every registered check; returns a list of :class:`CheckResult`."""
    ctx = {"rng": np.random.default_rng(seed), "inject_fault": inject_fault}
    results = []
    for module, name, tol, fn in _CHECKS:
        try:
            residual = float(fn(ctx))
        except Exception as exc:  # a crash is a failed check, not an abort
            residual = float("inf")
            name = f"{name} ({type(exc).__name__}: {exc})"
        results.append(CheckResult(module, name, residual, tol))
    return results
