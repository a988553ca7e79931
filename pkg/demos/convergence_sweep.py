"""Discretisation error against qubit count.

TE10 varies only along x, so adding x qubits shrinks its error quickly and
adding y qubits does nothing. TM11 varies along both axes and improves with
either.
"""
import tempfile

from wgvqd import cli

with tempfile.TemporaryDirectory() as out:
    cfg = cli.RunConfig(out=out, workers=1)
    print("growing n_x at n_y = 3")
    for nx, ny, mode, _, err in cli.cmd_sweep(cfg, (2, 5), (3, 3)):
        print(f"  nx={nx} ny={ny} {mode}: {err:.3e}")
    print("growing n_y at n_x = 3")
    for nx, ny, mode, _, err in cli.cmd_sweep(cfg, (3, 3), (1, 4)):
        print(f"  nx={nx} ny={ny} {mode}: {err:.3e}")
