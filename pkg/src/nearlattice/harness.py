"""Experiment orchestration, snapshots, and result emission.

run_experiment sweeps a (n, l) grid: each grid point starts at the scaled
lattice, burns in, runs the chain, and streams volume/rigidity/orientation
aggregates into results.csv (one row per grid point, deterministic order).
Built-in invariant checks run on every thinned sample; any violation makes
the experiment fail with the first offending invariant named.

Snapshots are plain text with a versioned header and one line per site;
floats are emitted with 17 significant digits so reload is bit-exact.
"""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from .config import Configuration, check_admissibility, scaled_lattice_config
from .errors import (SnapshotParseError, SnapshotVersionError,
                     SpecValidationError)
from .lattice import LatticeKind, build_lattice
from .observables import (batch_means, deviation_statistics,
                          neighbor_direction_stats, volume_sum_check)
from .sampler import ChainStats, SamplerParams, metropolis_run

SNAPSHOT_VERSION = 1
RESULT_COLUMNS = ("lattice", "n", "l", "alpha", "sweep", "acceptance",
                  "mean_dev_id", "mean_dev_lid", "max_dev", "psi6",
                  "mean_ang_dev", "vol_residual", "edge_dev_sum")

#: tolerances of the built-in per-sample invariant checks
MEAN_JACOBIAN_TOL = 1e-10
VOLUME_RESIDUAL_TOL = 1e-9


def fmt(x):
    """Round-trip-safe decimal for binary64."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass
class ExperimentSpec:
    kind: LatticeKind
    n_list: list
    l_list: list
    alpha: float
    seed: int = 0
    sweeps: int = 1000
    burn_in: int = 100
    thin: int = 10
    proposal_radius: float | None = None
    observables: tuple = ("deviation", "direction", "volume")
    output_dir: Path = Path("out")
    workers: int = 1
    write_cells: bool = False

    def validate(self):
        if not isinstance(self.kind, LatticeKind):
            raise SpecValidationError(f"unknown lattice kind {self.kind!r}")
        if not self.n_list:
            raise SpecValidationError("empty n list")
        if not self.l_list:
            raise SpecValidationError("empty l list")
        if not 0.0 < self.alpha <= 1.0:
            raise SpecValidationError("alpha must lie in (0, 1]")
        for l in self.l_list:
            if not 1.0 < l < 1.0 + self.alpha:
                raise SpecValidationError(
                    f"l={l} outside (1, {1.0 + self.alpha})")
        for n in self.n_list:
            if not (isinstance(n, (int, np.integer)) and n >= 1):
                raise SpecValidationError(f"invalid period count {n!r}")
        if self.thin < 1 or self.sweeps < 1 or self.burn_in < 0:
            raise SpecValidationError("invalid sweep counts")
        if self.workers < 1:
            raise SpecValidationError("workers must be >= 1")


# ---------------------------------------------------------------------------
# snapshots

def save_snapshot(config, path, seed=0, sweep=0):
    lat = config.lattice
    lines = [f"nearlattice-snapshot {SNAPSHOT_VERSION}",
             f"kind {lat.kind.value}",
             f"n {lat.n}",
             f"l {fmt(config.l)}",
             f"alpha {fmt(config.alpha)}",
             f"seed {int(seed)}",
             f"sweep {int(sweep)}",
             f"sites {lat.n_sites}"]
    for i in range(lat.n_sites):
        ints = " ".join(str(int(v)) for v in lat.site_ints[i])
        pos = " ".join(fmt(x) for x in config.positions[i])
        lines.append(f"site {ints} {pos}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_snapshot(path):
    """Reconstruct (Configuration, meta) from a snapshot file, bit-exactly."""
    text = Path(path).read_text()
    lines = text.splitlines()

    def bad(lineno, msg):
        raise SnapshotParseError(lineno, msg)

    if not lines:
        bad(1, "empty snapshot")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "nearlattice-snapshot":
        bad(1, "missing snapshot magic")
    if head[1] != str(SNAPSHOT_VERSION):
        raise SnapshotVersionError(f"unsupported snapshot version {head[1]}")
    meta = {}
    for lineno in range(2, 8):
        if lineno - 1 >= len(lines):
            bad(lineno, "truncated header")
        parts = lines[lineno - 1].split()
        if len(parts) != 2:
            bad(lineno, f"malformed header line {lines[lineno - 1]!r}")
        meta[parts[0]] = parts[1]
    for key in ("kind", "n", "l", "alpha", "seed", "sweep", "sites"):
        if key not in meta:
            bad(8, f"missing header field {key!r}")
    try:
        kind = LatticeKind(meta["kind"])
    except ValueError:
        bad(2, f"unknown lattice kind {meta['kind']!r}")
    n = int(meta["n"])
    lat = build_lattice(kind, n)
    n_sites = int(meta["sites"])
    if n_sites != lat.n_sites:
        bad(8, f"site count {n_sites} does not match {kind.value} n={n}")
    n_ints = lat.site_ints.shape[1]
    positions = np.zeros((n_sites, lat.d))
    for i in range(n_sites):
        lineno = 9 + i
        if lineno - 1 >= len(lines):
            bad(lineno, "truncated site table")
        parts = lines[lineno - 1].split()
        if len(parts) != 1 + n_ints + lat.d or parts[0] != "site":
            bad(lineno, f"malformed site line {lines[lineno - 1]!r}")
        ints = tuple(int(v) for v in parts[1:1 + n_ints])
        if ints != tuple(int(v) for v in lat.site_ints[i]):
            bad(lineno, f"unexpected site coordinates {ints}")
        try:
            positions[i] = [float(v) for v in parts[1 + n_ints:]]
        except ValueError:
            bad(lineno, "unparsable position")
    config = Configuration(lat, positions, float(meta["l"]), float(meta["alpha"]))
    return config, {"seed": int(meta["seed"]), "sweep": int(meta["sweep"])}


# ---------------------------------------------------------------------------
# experiment driver

@dataclass
class GridResult:
    row: dict
    snapshot: str
    failures: list
    cell_rows: list
    stats: dict


def _chain_seed(master, index):
    ss = np.random.SeedSequence(master, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_grid_point(args):
    (kind_value, n, l, alpha, sweeps, burn_in, thin, radius, seed,
     observables, outdir, write_cells) = args
    kind = LatticeKind(kind_value)
    lattice = build_lattice(kind, n)
    c0 = scaled_lattice_config(lattice, l, alpha)
    params = SamplerParams(seed=seed, sweeps=sweeps, burn_in=burn_in,
                           thin=thin, proposal_radius=radius)

    failures = []
    series = {"dev_id": [], "dev_lid": [], "max_dev": [], "edge_dev": [],
              "psi6": [], "ang_dev": [], "vol_residual": []}
    last = {"config": None, "sweep": 0}

    def observer(cfg, sweep):
        report = check_admissibility(cfg)
        if not report.overall:
            failures.append(f"admissibility:{report.first_failure()}@sweep{sweep}")
        if "deviation" in observables or "direction" in observables:
            stats = deviation_statistics(cfg)
            series["dev_id"].append(stats.mean_dev_id)
            series["dev_lid"].append(stats.mean_dev_lid)
            series["max_dev"].append(stats.max_dev_lid)
            series["edge_dev"].append(stats.edge_dev_sum)
            mj = stats.mean_jacobian - cfg.l * np.eye(lattice.d)
            if np.abs(mj).max() > MEAN_JACOBIAN_TOL:
                failures.append(f"mean_jacobian@sweep{sweep}")
        if "volume" in observables:
            res = volume_sum_check(cfg)
            series["vol_residual"].append(abs(res))
            if abs(res) > VOLUME_RESIDUAL_TOL * lattice.volume:
                failures.append(f"volume_residual@sweep{sweep}")
        if "direction" in observables and lattice.d == 2:
            ds = neighbor_direction_stats(cfg)
            series["psi6"].append(ds.psi6)
            series["ang_dev"].append(ds.mean_abs_deviation)
        last["config"], last["sweep"] = cfg, sweep

    final, stats = metropolis_run(c0, params, observer)

    def agg(key):
        return batch_means(series[key])[0] if series[key] else math.nan

    acceptance = np.nanmean([v for v in stats.acceptance_rate.values()])
    row = {
        "lattice": kind.value, "n": n, "l": l, "alpha": alpha,
        "sweep": sweeps, "acceptance": float(acceptance),
        "mean_dev_id": agg("dev_id"), "mean_dev_lid": agg("dev_lid"),
        "max_dev": max(series["max_dev"]) if series["max_dev"] else math.nan,
        "psi6": agg("psi6"), "mean_ang_dev": agg("ang_dev"),
        "vol_residual": max(series["vol_residual"]) if series["vol_residual"]
        else math.nan,
        "edge_dev_sum": agg("edge_dev"),
    }

    snap = os.path.join(outdir, f"{kind.value}_n{n}_l{fmt(l)}.snap")
    save_snapshot(final, snap, seed=seed, sweep=sweeps)

    cell_rows = []
    if write_cells:
        dstats = deviation_statistics(final)
        for m in range(len(dstats.dev_id)):
            cell_rows.append({
                "lattice": kind.value, "n": n, "l": l, "alpha": alpha,
                "sweep": sweeps, "simplex": m,
                "cell": int(lattice.simp_cell[m]),
                "kind": lattice.cells[int(lattice.simp_cell[m])].kind.value,
                "ref_vol": float(dstats.ref_vol[m]),
                "dev_id": float(dstats.dev_id[m]),
                "dev_lid": float(dstats.dev_lid[m]),
                "dist_so2": float(dstats.dist_so2[m]),
            })

    chain = {"acceptance_rate": stats.acceptance_rate,
             "rejections": stats.rejections,
             "proposal_radius": stats.proposal_radius}
    return GridResult(row, snap, failures, cell_rows, chain)


@dataclass
class ExperimentResult:
    ok: bool
    failures: list
    results_path: Path
    manifest_path: Path
    rows: list


def run_experiment(spec):
    spec.validate()
    outdir = Path(spec.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    grid = [(n, l) for n in spec.n_list for l in spec.l_list]
    tasks = []
    for idx, (n, l) in enumerate(grid):
        tasks.append((spec.kind.value, int(n), float(l), float(spec.alpha),
                      int(spec.sweeps), int(spec.burn_in), int(spec.thin),
                      spec.proposal_radius, _chain_seed(spec.seed, idx),
                      tuple(spec.observables), str(outdir), spec.write_cells))

    t0 = time.time()
    if spec.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_run_grid_point, tasks))
    else:
        results = [_run_grid_point(t) for t in tasks]
    wall = time.time() - t0

    rows = [r.row for r in results]
    results_path = outdir / "results.csv"
    with open(results_path, "w", newline="") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) if not isinstance(row[c], str)
                              else row[c] for c in RESULT_COLUMNS) + "\n")

    if spec.write_cells:
        cell_path = outdir / "cells.csv"
        cols = ("lattice", "n", "l", "alpha", "sweep", "simplex", "cell",
                "kind", "ref_vol", "dev_id", "dev_lid", "dist_so2")
        with open(cell_path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for r in results:
                for row in r.cell_rows:
                    fh.write(",".join(row[c] if isinstance(row[c], str)
                                      else fmt(row[c]) for c in cols) + "\n")

    failures = [f for r in results for f in r.failures]
    manifest = {
        "spec": {
            "kind": spec.kind.value, "n_list": list(spec.n_list),
            "l_list": [float(l) for l in spec.l_list],
            "alpha": spec.alpha, "seed": spec.seed, "sweeps": spec.sweeps,
            "burn_in": spec.burn_in, "thin": spec.thin,
            "proposal_radius": spec.proposal_radius,
            "observables": list(spec.observables),
            "workers": spec.workers, "write_cells": spec.write_cells,
        },
        "grid_seeds": [t[8] for t in tasks],
        "chains": [r.stats for r in results],
        "snapshots": [r.snapshot for r in results],
        "failures": failures,
        "versions": _versions(),
        "wall_clock_s": wall,
    }
    manifest_path = outdir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return ExperimentResult(not failures, failures, results_path,
                            manifest_path, rows)


def _versions():
    import numba
    import scipy

    from . import __version__
    import sys
    return {"nearlattice": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__,
            "python": sys.version.split()[0]}
