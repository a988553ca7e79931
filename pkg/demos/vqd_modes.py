"""Variational deflation for the first TE and TM modes.

A seven-layer Ry/CNOT ansatz on seven qubits is optimised with BFGS, five
random starts per mode. Each found state is added to an overlap penalty so the
next search lands on the next level. TE first finds the constant field, which
is kept for deflation but has no cut-off.
"""
from wgvqd import fdm, vqd
from wgvqd.fdm import WaveguideSpec


def reporter(spec):
    def show(k, mode):
        ok = sum(t.classification is vqd.Classification.CORRECT for t in mode.trials)
        print(f"  k={k} {vqd.format_label(spec, mode.label):>6}  "
              f"{mode.cutoff_hz / 1e9:9.5f} GHz  fidelity {mode.fidelity:.6f}  "
              f"{ok}/{len(mode.trials)} trials correct  {mode.trace.iterations} BFGS steps")
    return show


for family, modes in (("TE", 3), ("TM", 2)):
    spec = WaveguideSpec(0.015, 0.010, 4, 3, family)
    print(f"{family}:")
    result = vqd.solve(vqd.VqdConfig(spec, layers=7, modes=modes, trials=5, seed=0),
                       progress=reporter(spec))
    for mode in result.physical_modes():
        f_ref = fdm.eigenvalue_to_cutoff(result.reference.values[mode.k])
        print(f"    {vqd.format_label(spec, mode.label)} relative error vs classical "
              f"{abs(mode.cutoff_hz - f_ref) / f_ref:.1e}")
