"""Command-line front end: ``wgvqd modes | sweep | layers | validate``.

Settings come from defaults, then an optional JSON file (``--config``), then
command-line flags, later sources winning. JSON keys::

    width_a, height_b      metres
    n_x, n_y               qubits per axis
    family                 "te", "tm" or "both"
    modes                  physical modes per family
    layers, trials, seed, beta
    gradient               "analytic" or "fd"
    out                    output directory
    nx_range, ny_range     [lo, hi] inclusive, for sweep
    layer_range            [lo, hi] inclusive, for layers
    scenarios              [[n_x, n_y], ...], for layers
    with_vqd               bool, for sweep
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import eigoracle, fdm, heatmap, qsim, validation, vqd
from .fdm import Family

logger = logging.getLogger(__name__)

MAX_RUN_QUBITS = 14
DEFAULT_SCENARIOS = ((2, 2), (3, 2), (3, 3), (4, 2), (4, 3), (2, 3))


@dataclass(frozen=True)
class RunConfig:
    width_a: float = 0.015
    height_b: float = 0.010
    n_x: int = 4
    n_y: int = 3
    family: str = "both"
    modes: int = 2
    layers: int | None = 7
    trials: int = 5
    seed: int = 0
    beta: float | None = None
    gradient: str = "analytic"
    out: str = "."
    nx_range: tuple = (2, 5)
    ny_range: tuple = (3, 3)
    layer_range: tuple = (1, 11)
    scenarios: tuple = DEFAULT_SCENARIOS
    with_vqd: bool = False
    workers: int = field(default_factory=vqd.default_workers)

    def __post_init__(self):
        def set_(key, value):
            object.__setattr__(self, key, value)

        set_("family", str(self.family).lower())
        set_("gradient", vqd.GradientMode(self.gradient).value)
        set_("nx_range", tuple(int(v) for v in self.nx_range))
        set_("ny_range", tuple(int(v) for v in self.ny_range))
        set_("layer_range", tuple(int(v) for v in self.layer_range))
        set_("scenarios", tuple(tuple(int(v) for v in s) for s in self.scenarios))
        if self.family not in ("te", "tm", "both"):
            raise ValueError(f"family must be te, tm or both, not {self.family!r}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.modes < 1 or self.trials < 1 or self.workers < 1:
            raise ValueError("modes, trials and workers must be positive")
        if self.layers is not None and self.layers < 1:
            raise ValueError("layers must be positive")
        for name in ("nx_range", "ny_range", "layer_range"):
            lo, hi = getattr(self, name)
            if not 1 <= lo <= hi:
                raise ValueError(f"{name} must satisfy 1 <= lo <= hi")
        pairs = [(self.n_x, self.n_y), *self.scenarios,
                 (self.nx_range[1], self.ny_range[1])]
        for nx, ny in pairs:
            if nx + ny > MAX_RUN_QUBITS:
                raise ValueError(f"{nx}+{ny} qubits exceeds the cap of {MAX_RUN_QUBITS}")
        self.spec()  # geometry checks

    def families(self):
        if self.family == "both":
            return [Family.TE, Family.TM]
        return [Family(self.family.upper())]

    def spec(self, family=Family.TE, n_x=None, n_y=None):
        return fdm.WaveguideSpec(self.width_a, self.height_b,
                                 self.n_x if n_x is None else n_x,
                                 self.n_y if n_y is None else n_y, family)

    def ensure_out(self):
        os.makedirs(self.out, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise PermissionError(f"output directory {self.out!r} is not writable")
        return self.out


@dataclass(frozen=True)
class ModeTableRow:
    label: str
    family: str
    k: int
    vqa_cutoff_ghz: float
    classical_cutoff_ghz: float
    analytic_cutoff_ghz: float
    rel_err_vqa_vs_classical: float
    rel_err_classical_vs_analytic: float
    fidelity: float
    classification: str
    status: str = "ok"

    def csv_row(self):
        return [self.label, self.family, self.k,
                _ghz(self.vqa_cutoff_ghz), _ghz(self.classical_cutoff_ghz),
                _ghz(self.analytic_cutoff_ghz),
                _sci(self.rel_err_vqa_vs_classical), _sci(self.rel_err_classical_vs_analytic),
                _sci(self.fidelity), self.classification, self.status]


MODE_COLUMNS = [f.name for f in fields(ModeTableRow)]


def _ghz(x):
    return f"{x:#.6g}" if np.isfinite(x) else "nan"


def _sci(x):
    return f"{x:.6e}" if np.isfinite(x) else "nan"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _pool_map(fn, jobs, workers):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _vqd_config(cfg, spec, modes, layers=None, trials=None, seed=None):
    return vqd.VqdConfig(spec, layers=layers or cfg.layers, modes=modes, beta=cfg.beta,
                         trials=trials or cfg.trials,
                         seed=cfg.seed if seed is None else seed,
                         gradient_mode=cfg.gradient)


# ---------------------------------------------------------------------------
# modes


def mode_rows(spec, result):
    """Table rows for a finished VQD run, skipping the non-propagating TE00.

    Row ``k`` describes the k-th classical level: its label and classical
    value come from the oracle, so a VQD run that lands elsewhere shows up in
    the error and classification columns instead of relabelling the row.
    Beyond the dense cap the discrete closed form of the VQD label stands in.
    """
    ref = result.reference
    norm = ref.spectral_norm() if ref is not None else 0.0
    rows = []
    for mode in result.modes:
        if ref is not None:
            lam = float(ref.values[mode.k])
            label = vqd.mode_label(spec, lam)
        else:
            label = mode.label
            lam = float(fdm.discrete_eigenvalue(spec, *label[0]))
        if label == ((0, 0),):
            continue
        f_vqa = mode.cutoff_hz / 1e9
        f_cls = fdm.eigenvalue_to_cutoff(lam, norm) / 1e9
        f_ana = fdm.analytic_cutoff(spec, *label[0]) / 1e9
        cls = mode.classification
        rows.append(ModeTableRow(
            vqd.format_label(spec, label), spec.family.value, mode.k, f_vqa, f_cls,
            f_ana, abs(f_vqa - f_cls) / f_cls, abs(f_cls - f_ana) / f_ana,
            mode.fidelity, cls.value if cls is not None else "unclassified"))
    return rows


def svg_name(label):
    return f"mode_{label.replace('+', '_')}.svg"


def cmd_modes(cfg, progress=None):
    """Mode table plus one heatmap per physical mode, for each family.

    Returns
    -------
    rows : list of ModeTableRow
    results : dict
        ``Family -> VqdResult`` for the families that finished.
    """
    out = cfg.ensure_out()
    rows, results = [], {}
    for family in cfg.families():
        spec = cfg.spec(family)
        # TE carries the constant zero mode first; it is found then skipped
        modes = cfg.modes + (1 if family is Family.TE else 0)
        try:
            result = vqd.solve(_vqd_config(cfg, spec, min(modes, spec.dim)), progress=progress)
        except Exception as exc:
            logger.error("%s run failed: %s", family.value, exc)
            rows.append(ModeTableRow(family.value, family.value, -1, *([float("nan")] * 6),
                                     "unclassified", f"error: {exc}"))
            continue
        results[family] = result
        new_rows = mode_rows(spec, result)
        by_k = {m.k: m for m in result.modes}
        for row in new_rows:
            title = f"{row.label}  {row.vqa_cutoff_ghz:.4f} GHz"
            heatmap.write_mode_svg(os.path.join(out, svg_name(row.label)),
                                   by_k[row.k].state, spec.n_x, spec.n_y, title)
        rows.extend(new_rows)
    rows.sort(key=lambda r: (np.nan_to_num(r.analytic_cutoff_ghz, nan=np.inf), r.label))
    _write_csv(os.path.join(out, "modes.csv"), MODE_COLUMNS, [r.csv_row() for r in rows])
    return rows, results


# ---------------------------------------------------------------------------
# sweep

SWEEP_TARGETS = ((Family.TE, (1, 0)), (Family.TM, (1, 1)))


def classical_mode_cutoff(spec, eig, mn):
    """Cut-off from the oracle eigenvalue nearest the discrete value of (m, n).

    The closed form only picks which eigenvalue belongs to the mode; the
    reported number is the oracle's. Returns ``(frequency_hz, index)``.
    """
    target = fdm.discrete_eigenvalue(spec, *mn)
    idx = int(np.argmin(np.abs(eig.values - target)))
    # first index of a degenerate level, so VQD knows how deep to deflate
    idx = int(eig.eigenspace_indices(idx)[0])
    return fdm.eigenvalue_to_cutoff(eig.values[idx], eig.spectral_norm()), idx


def _sweep_cell(job):
    cfg, nx, ny = job
    rows = []
    for family, mn in SWEEP_TARGETS:
        spec = cfg.spec(family, nx, ny)
        eig = eigoracle.eigensolve_symmetric(fdm.assemble_2d(spec))
        f_cls, idx = classical_mode_cutoff(spec, eig, mn)
        f_ana = fdm.analytic_cutoff(spec, *mn)
        name = f"{family.value}{mn[0]}{mn[1]}"
        rows.append((nx, ny, name, "classical", abs(f_cls - f_ana) / f_ana))
        if cfg.with_vqd:
            res = vqd.solve(_vqd_config(cfg, spec, idx + 1, layers=cfg.layers or spec.n_qubits),
                            reference=eig)
            f_vqa = res[idx].cutoff_hz
            rows.append((nx, ny, name, "vqd", abs(f_vqa - f_ana) / f_ana))
    return rows


def cmd_sweep(cfg, nx_range=None, ny_range=None):
    """Discretisation error of TE10 and TM11 over a grid of qubit counts.

    Returns the rows written to ``sweep.csv``:
    ``(nx, ny, mode, method, rel_diff)``.
    """
    nx_lo, nx_hi = nx_range or cfg.nx_range
    ny_lo, ny_hi = ny_range or cfg.ny_range
    if nx_hi + ny_hi > qsim.MAX_DENSE_QUBITS:
        raise ValueError(f"sweep uses the dense oracle, capped at {qsim.MAX_DENSE_QUBITS} qubits")
    out = cfg.ensure_out()
    jobs = [(cfg, nx, ny) for nx in range(nx_lo, nx_hi + 1) for ny in range(ny_lo, ny_hi + 1)]
    rows = [r for cell in _pool_map(_sweep_cell, jobs, cfg.workers) for r in cell]
    _write_csv(os.path.join(out, "sweep.csv"), ["nx", "ny", "mode", "method", "rel_diff"],
               [(nx, ny, m, meth, _sci(v)) for nx, ny, m, meth, v in rows])
    return rows


# ---------------------------------------------------------------------------
# layers


@dataclass(frozen=True)
class LayerRow:
    nx: int
    ny: int
    layers: int
    trials: int
    correct: int
    higher_mode: int
    incorrect: int
    success_rate: float
    colour: str


def layer_colour(counts, trials):
    """green: every trial correct; amber/red: at least half higher-mode or
    incorrect minima; otherwise mixed."""
    if counts[vqd.Classification.CORRECT] == trials:
        return "green"
    if counts[vqd.Classification.HIGHER_MODE] >= 0.5 * trials:
        return "amber"
    if counts[vqd.Classification.INCORRECT] >= 0.5 * trials:
        return "red"
    return "mixed"


def _layer_cell(job):
    cfg, nx, ny, layers = job
    spec = cfg.spec(Family.TM, nx, ny)
    # TM11 is the TM ground state, so one deflation step suffices
    res = vqd.solve(_vqd_config(cfg, spec, 1, layers=layers))
    trials = res[0].trials
    counts = {c: sum(t.classification is c for t in trials) for c in vqd.Classification}
    return LayerRow(nx, ny, layers, len(trials), counts[vqd.Classification.CORRECT],
                    counts[vqd.Classification.HIGHER_MODE],
                    counts[vqd.Classification.INCORRECT],
                    counts[vqd.Classification.CORRECT] / len(trials),
                    layer_colour(counts, len(trials)))


def cmd_layers(cfg, layer_range=None, scenarios=None):
    """Success rate of the TM11 search versus ansatz depth."""
    lo, hi = layer_range or cfg.layer_range
    scenarios = scenarios or cfg.scenarios
    for nx, ny in scenarios:
        if nx + ny > qsim.MAX_DENSE_QUBITS:
            raise ValueError("layer study classifies against the dense oracle; "
                             f"scenario ({nx}, {ny}) is too large")
    out = cfg.ensure_out()
    jobs = [(cfg, nx, ny, L) for nx, ny in scenarios for L in range(lo, hi + 1)]
    rows = _pool_map(_layer_cell, jobs, cfg.workers)
    header = [f.name for f in fields(LayerRow)]
    _write_csv(os.path.join(out, "layers.csv"), header,
               [[r.nx, r.ny, r.layers, r.trials, r.correct, r.higher_mode, r.incorrect,
                 f"{r.success_rate:.6g}", r.colour] for r in rows])
    return rows


# ---------------------------------------------------------------------------
# validate


def cmd_validate(cfg, inject_fault=False):
    """Run the oracle suite, write ``validate.txt``; returns (results, ok)."""
    out = cfg.ensure_out()
    results = validation.run_checks(cfg.seed, inject_fault)
    ok = all(r.passed for r in results)
    lines = [r.line() for r in results]
    failed = [r for r in results if not r.passed]
    lines.append(f"{len(results) - len(failed)}/{len(results)} checks passed")
    for r in failed:
        lines.append(f"failed: module={r.module} check={r.name} "
                     f"residual={r.residual:.6e} tolerance={r.tolerance:.1e}")
    with open(os.path.join(out, "validate.txt"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return results, ok


# ---------------------------------------------------------------------------
# argument handling


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; flags override it")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--nx", type=int, dest="n_x")
    common.add_argument("--ny", type=int, dest="n_y")
    common.add_argument("--width", type=float, dest="width_a", help="a in metres")
    common.add_argument("--height", type=float, dest="height_b", help="b in metres")
    common.add_argument("--layers", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--family", choices=["te", "tm", "both"])
    common.add_argument("--modes", type=int)
    common.add_argument("--gradient", choices=["analytic", "fd"])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="wgvqd", description="Rectangular waveguide modes by finite differences and VQD.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("modes", parents=[common], help="mode table and field heatmaps")
    p = sub.add_parser("sweep", parents=[common], help="discretisation error versus qubits")
    p.add_argument("--nx-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--ny-range", type=int, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--with-vqd", action="store_true", default=None)
    p = sub.add_parser("layers", parents=[common], help="success rate versus ansatz depth")
    p.add_argument("--layer-range", type=int, nargs=2, metavar=("LO", "HI"))
    p = sub.add_parser("validate", parents=[common], help="run the oracle checks")
    p.add_argument("--inject-fault", action="store_true",
                   help="perturb one decomposition coefficient by 1e-6 (debug)")
    return parser


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def load_config(args):
    """RunConfig from defaults, the JSON file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            data = json.load(fh)
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for key in _CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return RunConfig(**values)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (ValueError, TypeError, OSError) as exc:
        parser.error(str(exc))

    if args.command == "modes":
        rows, _ = cmd_modes(cfg)
        for r in rows:
            print(f"{r.label:>12}  vqa {_ghz(r.vqa_cutoff_ghz)}  classical "
                  f"{_ghz(r.classical_cutoff_ghz)}  analytic {_ghz(r.analytic_cutoff_ghz)} GHz"
                  f"  [{r.classification}]")
        return 0 if all(r.status == "ok" for r in rows) else 1
    if args.command == "sweep":
        for nx, ny, mode, method, v in cmd_sweep(cfg):
            print(f"nx={nx} ny={ny} {mode} {method}: rel_diff {v:.3e}")
        return 0
    if args.command == "layers":
        for r in cmd_layers(cfg):
            print(f"({r.nx},{r.ny}) L={r.layers:2d}: {r.correct}/{r.trials} correct  {r.colour}")
        return 0
    results, ok = cmd_validate(cfg, args.inject_fault)
    for r in results:
        print(r.line())
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
