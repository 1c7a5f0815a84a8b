"""Command-line front end.

    ftmrs run --preset table3-desk --seeds 1-5 --out results/
    ftmrs run --config scenario.txt --set node_count=150 --seed 7
    ftmrs sweep --config scenario.txt --grid node_count=100,150 --seeds 1-3
    ftmrs presets

``run`` writes a per-round metrics CSV, an event log and a two-column energy
curve for every (cell, seed), a ``summary.csv`` with one row per (cell, seed),
and per-curve plot data for figure presets. ``sweep`` runs the cross product
of ``--grid`` values and writes only ``sweep.csv``. The output directory is
``--out``, else ``$FTMRS_OUT``, else ``./ftmrs-out``.

Exit status: 0 when every run completed with energy conserved, 1 when some
run broke conservation, 2 on bad input (nothing is written in that case).
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import configfile
from .engine import ScenarioConfig, run_path_failure_sweep, run_scenario
from .faults import diagnosis_rate
from .metrics import (
    DIAGNOSIS_WINDOW,
    average_delay,
    average_dissipated_energy,
    events_csv,
    metrics_series,
    series_csv,
    throughput,
    write_atomic,
)

log = logging.getLogger("ftmrs")

OUT_ENV = "FTMRS_OUT"
DEFAULT_OUT = "ftmrs-out"
# relative per-round mismatch between booked charges and residual energy
CONSERVATION_TOL = 1e-9

SUMMARY_HEADER = (
    "cell", "seed", "node_count", "node_fault_fraction", "rounds", "lifetime",
    "initial_energy_j", "final_energy_j", "pdr", "avg_delay_rounds",
    "avg_dissipated_j_per_node", "diagnosis_rate", "max_energy_gap",
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class Preset:
    help: str
    base: dict
    cells: tuple = (("run", {}),)
    seeds: tuple = (1,)
    kind: str = "series"
    # (x key, y column) for the per-curve plot data of fault sweeps
    plot: tuple | None = None


def _sizes_by_fault(sizes, fractions):
    return tuple(
        (f"n{n}_f{round(frac * 100)}", {"node_count": str(n), "faults.node_fault_fraction": str(frac)})
        for frac in fractions
        for n in sizes
    )


# desk scale for the lifetime table: same area and radio, a tenth of the
# nodes and a small battery so every run ends within a few hundred rounds
_DESK = {
    "area_width": "300", "area_height": "300", "radio_range": "80",
    "initial_energy": "0.02", "cluster_count": "30", "recluster_period": "10",
    "rounds_max": "3000",
}
_FULL = dict(_DESK, initial_energy="0.5", rounds_max="5000")
_FIG9 = {
    "node_count": "100", "rounds_max": "20", "initial_energy": "0.5", "radio_range": "80",
    "cluster_count": "10", "recluster_period": "100",
}
_FAULT_SWEEP = dict(_DESK, rounds_max="60", initial_energy="0.5")
_FIG_FRACTIONS = (0.0, 0.1, 0.2, 0.3, 0.4)

PRESETS = {
    "table3": Preset(
        "global energy per round, N=1000..2500 at 0% and 40% node faults",
        _FULL, _sizes_by_fault((1000, 1500, 2000, 2500), (0.0, 0.4)),
    ),
    "table3-desk": Preset(
        "the lifetime table at N=100..250 with 0.02 J batteries",
        _DESK, _sizes_by_fault((100, 150, 200, 250), (0.0, 0.4)), seeds=(1, 2, 3, 4, 5),
    ),
    "fig6": Preset(
        "average delay against the node fault percentage",
        _FAULT_SWEEP, _sizes_by_fault((100, 150, 200, 250), _FIG_FRACTIONS),
        seeds=(1, 2, 3), plot=("node_fault_fraction", "avg_delay_rounds"),
    ),
    "fig7": Preset(
        "packet delivery ratio against the node fault percentage",
        _FAULT_SWEEP, _sizes_by_fault((100, 150, 200, 250), _FIG_FRACTIONS),
        seeds=(1, 2, 3), plot=("node_fault_fraction", "pdr"),
    ),
    "fig8": Preset(
        "energy dissipated per node against the node fault percentage",
        _FAULT_SWEEP, _sizes_by_fault((100, 150, 200, 250), _FIG_FRACTIONS),
        seeds=(1, 2, 3), plot=("node_fault_fraction", "avg_dissipated_j_per_node"),
    ),
    "fig9": Preset(
        "throughput against the share of failed primary paths, k=1..3",
        _FIG9, seeds=(1, 2, 3, 4, 5), kind="throughput",
    ),
    "fig10": Preset(
        "diagnosis rate of 100 injected faults in 250 nodes",
        dict(_DESK, node_count="250", initial_energy="0.5", rounds_max="12",
             **{"faults.node_fault_fraction": "0.4"}),
        seeds=tuple(range(1, 11)),
    ),
}

FIG9_FRACTIONS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
FIG9_PATHS = (1, 2, 3)


# -- argument helpers -------------------------------------------------------

def parse_seeds(text):
    """``"3"``, ``"1,4,9"`` or ``"1-5"`` (inclusive) into a list of ints."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(-?\d+)\s*-\s*(-?\d+)", part)
        try:
            if m:
                lo, hi = int(m.group(1)), int(m.group(2))
                if hi < lo:
                    raise UsageError(f"empty seed range {part!r}")
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise UsageError(f"bad seed {part!r}") from None
    if not seeds:
        raise UsageError("seed list is empty")
    return seeds


def _split_assignment(text, flag):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise UsageError(f"{flag} expects key=value, got {text!r}")
    key = key.strip()
    if key not in configfile.KEYS:
        raise UsageError(f"{flag}: unknown key {key!r}")
    return key, value.strip()


def parse_grid(items):
    """``["node_count=100,150", ...]`` into ordered ``[(key, [values])]``."""
    grid = []
    seen = set()
    for item in items or ():
        key, values = _split_assignment(item, "--grid")
        if key in seen:
            raise UsageError(f"--grid: key {key!r} given twice")
        seen.add(key)
        if key == "faults.fault_mix":
            vals = [v.strip() for v in values.split(";") if v.strip()]
        else:
            vals = [v.strip() for v in values.split(",") if v.strip()]
        if not vals:
            raise UsageError(f"--grid: no values for {key!r}")
        grid.append((key, vals))
    return grid


def resolve_out(arg):
    return os.path.abspath(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _confined(out_dir, name):
    path = os.path.abspath(os.path.join(out_dir, name))
    if os.path.commonpath([out_dir, path]) != out_dir:
        raise UsageError(f"output {name!r} escapes {out_dir}")
    return path


def _safe_name(label):
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", label).strip("._") or "cell"


# -- running ----------------------------------------------------------------

def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _summarize(cell, config, result):
    delivered = [r for r in result.packets.values() if not r.suppressed]
    gaps = [rep.energy_gap for rep in result.reports] + [result.final_gap]
    return {
        "cell": cell,
        "seed": config.seed,
        "node_count": config.node_count,
        "node_fault_fraction": config.faults.node_fault_fraction,
        "rounds": len(result.reports),
        "lifetime": result.lifetime,
        "initial_energy_j": result.initial_energy,
        "final_energy_j": result.final_energy,
        "pdr": throughput(result),
        "avg_delay_rounds": average_delay(delivered),
        "avg_dissipated_j_per_node": average_dissipated_energy(
            result.initial_energy - result.final_energy, result.node_count),
        "diagnosis_rate": diagnosis_rate(result.injected, result.diagnoses, DIAGNOSIS_WINDOW),
        "max_energy_gap": max(gaps),
    }


def _run_cell(job):
    """Worker body: one scenario, returned as CSV texts plus its summary row."""
    cell, config, want_files = job
    result = run_scenario(config)
    files = {}
    if want_files:
        stem = f"{_safe_name(cell)}_s{config.seed}"
        files[f"{stem}.csv"] = series_csv(metrics_series(result))
        files[f"{stem}_events.csv"] = events_csv(result.events)
        files[f"{stem}_energy.dat"] = "".join(
            f"{rep.round} {rep.global_energy!r}\n" for rep in result.reports)
    return files, _summarize(cell, config, result)


def _run_fig9(job):
    config, = job
    return config.seed, run_path_failure_sweep(config, FIG9_FRACTIONS, FIG9_PATHS)


def _map(fn, jobs, n_jobs):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


def summary_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for row in rows:
        w.writerow([_fmt(row[k]) for k in SUMMARY_HEADER])
    return buf.getvalue()


def _mean(values):
    values = [v for v in values if v is not None]
    return sum(values) / len(values) if values else None


def fault_plot_data(rows, x_key, y_key):
    """``{N: "x y" lines}``, y averaged over seeds, x as a percentage."""
    curves = {}
    for row in rows:
        curves.setdefault(row["node_count"], {}).setdefault(row[x_key], []).append(row[y_key])
    out = {}
    for n, points in sorted(curves.items()):
        lines = []
        for x in sorted(points):
            y = _mean(points[x])
            if y is not None:
                lines.append(f"{round(100 * x, 6)!r} {y!r}\n")
        out[n] = "".join(lines)
    return out


def _check_conservation(rows):
    bad = [r for r in rows if not r["max_energy_gap"] <= CONSERVATION_TOL]
    for r in bad:
        log.error("energy not conserved in %s seed %s (gap %.3g)", r["cell"], r["seed"], r["max_energy_gap"])
    return not bad


def _base_config(args, preset):
    config = ScenarioConfig()
    if preset is not None:
        config = configfile.apply_overrides(config, preset.base)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {args.config}: {exc.strerror}") from None
        try:
            config = configfile.parse_config(text, config)
        except configfile.ConfigError as exc:
            raise UsageError(f"{args.config}: {exc}") from None
    return config


def _user_overrides(args):
    values = dict(_split_assignment(item, "--set") for item in args.set or ())
    if args.rounds is not None:
        values["rounds_max"] = str(args.rounds)
    return values


def _configure(config, *layers, where="--set"):
    for layer in layers:
        try:
            config = configfile.apply_overrides(config, layer)
        except configfile.ConfigError as exc:
            raise UsageError(f"{where}: {exc}") from None
    return config


def _pick_preset(name):
    if name is None:
        return None
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}") from None


def _seeds(args, preset):
    if args.seeds:
        return parse_seeds(args.seeds)
    if args.seed is not None:
        return [args.seed]
    return list(preset.seeds) if preset is not None else [1]


def cmd_run(args):
    preset = _pick_preset(args.preset)
    if preset is None and not args.config:
        raise UsageError("run needs --preset or --config")
    base = _base_config(args, preset)
    user = _user_overrides(args)
    seeds = _seeds(args, preset)
    out_dir = resolve_out(args.out)
    kind = preset.kind if preset is not None else "series"
    cells = preset.cells if preset is not None else (("run", {}),)

    if kind == "throughput":
        configs = [replace(_configure(base, user), seed=s) for s in seeds]
        results = _map(_run_fig9, [(c,) for c in configs], args.jobs)
        files = fig9_files(results)
        ok = True
    else:
        jobs = []
        for label, overrides in cells:
            cfg = _configure(base, overrides, user)
            jobs.extend((label, replace(cfg, seed=s), True) for s in seeds)
        results = _map(_run_cell, jobs, args.jobs)
        files, rows = {}, []
        for f, row in results:
            files.update(f)
            rows.append(row)
        files["summary.csv"] = summary_csv(rows)
        if preset is not None and preset.plot is not None:
            x_key, y_key = preset.plot
            for n, text in fault_plot_data(rows, x_key, y_key).items():
                files[f"{args.preset}_n{n}.dat"] = text
        ok = _check_conservation(rows)
    _write_all(out_dir, files)
    log.info("wrote %d files to %s", len(files), out_dir)
    return 0 if ok else 1


def fig9_files(results):
    """Per-seed throughput table plus one mean curve per path count."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "failed_fraction"] + [f"k{k}" for k in FIG9_PATHS])
    for seed, table in results:
        for i, f in enumerate(FIG9_FRACTIONS):
            w.writerow([seed, repr(f)] + [repr(table[k][i]) for k in FIG9_PATHS])
    files = {"fig9_throughput.csv": buf.getvalue()}
    for k in FIG9_PATHS:
        files[f"fig9_k{k}.dat"] = "".join(
            f"{f!r} {_mean([table[k][i] for _, table in results])!r}\n"
            for i, f in enumerate(FIG9_FRACTIONS)
        )
    return files


def cmd_sweep(args):
    preset = _pick_preset(args.preset)
    if preset is not None and preset.kind != "series":
        raise UsageError(f"preset {args.preset!r} cannot be swept")
    base = _base_config(args, preset)
    user = _user_overrides(args)
    grid = parse_grid(args.grid)
    seeds = _seeds(args, preset)
    out_dir = resolve_out(args.out)
    keys = [k for k, _ in grid]
    # every cell is configured before anything runs
    jobs = []
    for combo in itertools.product(*(vals for _, vals in grid)):
        values = dict(zip(keys, combo))
        label = ",".join(f"{k}={v}" for k, v in values.items()) or "base"
        cfg = _configure(base, user, values, where=f"--grid {label}")
        jobs.extend((label, replace(cfg, seed=s), False) for s in seeds)
    rows = [row for _, row in _map(_run_cell, jobs, args.jobs)]
    _write_all(out_dir, {args.name: summary_csv(rows)})
    log.info("wrote %d rows to %s", len(rows), os.path.join(out_dir, args.name))
    return 0 if _check_conservation(rows) else 1


def cmd_presets(args):
    width = max(map(len, PRESETS))
    for name, p in PRESETS.items():
        print(f"{name:<{width}}  {p.help}")
    return 0


def _write_all(out_dir, files):
    paths = {name: _confined(out_dir, name) for name in files}
    for name, text in files.items():
        write_atomic(paths[name], text)


def build_parser():
    parser = argparse.ArgumentParser(prog="ftmrs", description="Clustered multipath WSN routing simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--preset", help="named figure or table setup (see 'ftmrs presets')")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV}, then ./{DEFAULT_OUT})")
        p.add_argument("--seed", type=int)
        p.add_argument("--seeds", help="list like 1,2,3 or a range like 1-5")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
        p.add_argument("--rounds", type=int, help="shorthand for --set rounds_max=N")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress")

    run = sub.add_parser("run", help="run a scenario or preset")
    common(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="cross product over config keys")
    common(sweep)
    sweep.add_argument("--grid", action="append", metavar="KEY=V1,V2",
                       help="values for one key; fault mixes are separated by ';'")
    sweep.add_argument("--name", default="sweep.csv", help="summary file name")
    sweep.set_defaults(func=cmd_sweep)

    presets = sub.add_parser("presets", help="list presets")
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("ftmrs: error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ftmrs: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
