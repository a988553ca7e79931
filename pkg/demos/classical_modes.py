"""Classical cut-off frequencies of a 15 mm x 10 mm waveguide.

The transverse operator is assembled on a 16 x 8 shifted grid and diagonalised
with the Jacobi eigensolver. The lowest TE and TM levels are compared with the
closed-form cut-offs of the continuous guide.
"""
import numpy as np

from wgvqd import eigoracle, fdm, vqd
from wgvqd.fdm import Family, WaveguideSpec

A, B = 0.015, 0.010

for family in Family:
    spec = WaveguideSpec(A, B, 4, 3, family)
    m = fdm.assemble_2d(spec)
    eig = eigoracle.eigensolve_symmetric(m)
    print(f"{family.value}: {spec.dim} x {spec.dim} operator, {eig.sweeps} Jacobi sweeps")
    shown = 0
    for k, lam in enumerate(eig.values):
        label = vqd.mode_label(spec, lam)
        if label == ((0, 0),):
            # the constant TE field has zero cut-off and does not propagate
            continue
        f = fdm.eigenvalue_to_cutoff(lam, eig.spectral_norm()) / 1e9
        f_exact = fdm.analytic_cutoff(spec, *label[0]) / 1e9
        print(f"  {vqd.format_label(spec, label):>6}  grid {f:8.4f} GHz"
              f"  exact {f_exact:8.4f} GHz  ({abs(f - f_exact) / f_exact:.2%} low)")
        shown += 1
        if shown == 4:
            break

# the 1D building blocks have closed-form spectra
for bc in fdm.Boundary:
    m1 = fdm.build_1d_operator(3, bc)
    got = eigoracle.eigensolve_symmetric(m1).values
    err = np.max(np.abs(got - fdm.closed_form_1d_eigenvalues(3, bc)))
    print(f"1D {bc.value:9s} corners {m1[0, 0]:.0f}: max deviation from 4 sin^2 form {err:.1e}")
