"""Three ways to get the deflated-cost gradient.

The analytic gradient uses pi-shifted copies of the ansatz state. The same
numbers follow from an ancilla-extended register (the form a device would
measure), and from central finite differences.
"""
import numpy as np

from wgvqd import decomp, fdm, qsim, vqd

rng = np.random.default_rng(1)
spec = fdm.unit_spec(2, 2, "TM")
d = decomp.decompose(spec)
beta = vqd.default_beta(spec)
n = spec.n_qubits

# two earlier modes, represented by their ansatz angles
defl_thetas = rng.uniform(-np.pi, np.pi, (2, n, n))
defl = qsim.run_ansatz(n, defl_thetas, dtype=float)
theta = rng.uniform(-np.pi, np.pi, n * n)

g = vqd.gradient(theta, 2, defl, d, beta)
g_anc = vqd.gradient_extended_register(theta, defl_thetas, d, beta)
g_fd = vqd.gradient_finite_difference(theta, 2, defl, d, beta)
print("first components:", np.round(g[:4], 6))
print(f"ancilla form     max rel diff {np.max(np.abs(g_anc - g)) / np.max(np.abs(g)):.1e}")
print(f"finite diff.     max rel diff {np.max(np.abs(g_fd - g)) / np.max(np.abs(g)):.1e}")
