"""How often does VQD find TM11 as the ansatz gets deeper?

A reduced version of the full layer study (``wgvqd layers``): two small
scenarios and depths 1 to 6. Each cell runs five seeded trials and classifies
each one against the exact eigenspaces.
"""
import tempfile

from wgvqd import cli

with tempfile.TemporaryDirectory() as out:
    cfg = cli.RunConfig(out=out, trials=5, workers=1)
    for r in cli.cmd_layers(cfg, (1, 6), [(2, 2), (3, 2)]):
        bar = "#" * r.correct + "." * (r.trials - r.correct)
        print(f"(n_x, n_y)=({r.nx},{r.ny}) L={r.layers}: {bar}  "
              f"higher={r.higher_mode} wrong={r.incorrect}  {r.colour}")
