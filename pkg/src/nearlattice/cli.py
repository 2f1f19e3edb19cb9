"""Command line interface.

Subcommands: sample (single chain), check (admissibility of a snapshot),
enumerate (triangular labeling of a snapshot's points), sweep (parameter
grid), estimate-z (partition function estimate).  A flat key=value config
file can replace or override flags for `sweep`; lists use commas, e.g.
`l = 1.12,1.06,1.03`.

Exit codes: 0 success, 1 invariant violation, 2 spec error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import DiskWindow, RectWindow, check_admissibility, scaled_lattice_config
from .enumeration import enumerate_points
from .errors import NearLatticeError, NotEnumerableError, SpecValidationError
from .harness import ExperimentSpec, fmt, load_snapshot, run_experiment, save_snapshot
from .lattice import LatticeKind, build_lattice
from .sampler import SamplerParams, estimate_partition, metropolis_run

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_SPEC = 2


def parse_config_file(path):
    """Flat key=value file; comma-separated lists; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecValidationError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        values[key.strip()] = val.strip()
    return values


def _apply_config(values, args):
    conv = {
        "kind": str, "alpha": float, "seed": int, "sweeps": int,
        "burn_in": int, "thin": int, "out": str, "workers": int,
        "observables": str, "cells": lambda v: v.lower() in ("1", "true", "yes"),
    }
    for key, val in values.items():
        if key == "n":
            args.n = [int(v) for v in val.split(",") if v.strip()]
        elif key == "l":
            args.l = [float(v) for v in val.split(",") if v.strip()]
        elif key == "proposal_radius":
            args.delta = None if val == "auto" else float(val)
        elif key in conv:
            setattr(args, key if key != "out" else "out", conv[key](val))
        else:
            raise SpecValidationError(f"unknown config key {key!r}")
    return args


def _kind(value):
    try:
        return LatticeKind(value.upper())
    except ValueError:
        raise SpecValidationError(f"unknown lattice kind {value!r}")


def _delta(value):
    return None if value == "auto" else float(value)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nearlattice",
        description="Constrained near-lattice hard-sphere/hard-disk sampling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="run one Metropolis chain")
    p.add_argument("--kind", default="TRIANGULAR2D")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--l", type=float, default=1.06)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=100, dest="burn_in")
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=_delta, default=None,
                   help="proposal radius, or 'auto'")
    p.add_argument("--out", default="chain.snap")

    p = sub.add_parser("check", help="admissibility report for a snapshot")
    p.add_argument("snapshot")

    p = sub.add_parser("enumerate", help="triangular labeling of a snapshot")
    p.add_argument("snapshot")
    p.add_argument("--out", default="labeling.csv")

    p = sub.add_parser("sweep", help="run a parameter grid")
    p.add_argument("--config", default=None, help="key=value spec file")
    p.add_argument("--kind", default="TRIANGULAR2D")
    p.add_argument("--n", type=int, nargs="+", default=[4])
    p.add_argument("--l", type=float, nargs="+", default=[1.06])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--burn-in", type=int, default=100, dest="burn_in")
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--delta", type=_delta, default=None)
    p.add_argument("--observables", default="deviation,direction,volume")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cells", action="store_true")
    p.add_argument("--out", default="out")

    p = sub.add_parser("estimate-z", help="partition function estimate")
    p.add_argument("--disk", type=float, default=None, metavar="RADIUS")
    p.add_argument("--rect", type=float, nargs=4, default=None,
                   metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--z", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boundary", default=None,
                   help="snapshot whose wrapped points act as boundary")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except SpecValidationError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NearLatticeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


def _dispatch(args):
    if args.command == "sample":
        kind = _kind(args.kind)
        alpha = args.alpha if args.alpha is not None else \
            (0.15 if kind is LatticeKind.TRIANGULAR2D else 0.10)
        lattice = build_lattice(kind, args.n)
        c0 = scaled_lattice_config(lattice, args.l, alpha)
        params = SamplerParams(seed=args.seed, sweeps=args.sweeps,
                               burn_in=args.burn_in, thin=args.thin,
                               proposal_radius=args.delta)
        final, stats = metropolis_run(c0, params)
        save_snapshot(final, args.out, seed=args.seed, sweep=args.sweeps)
        acc = ", ".join(f"class{k}={v:.3f}" for k, v in
                        stats.acceptance_rate.items())
        print(f"wrote {args.out}; acceptance {acc}; "
              f"rejections {stats.rejections}")
        return EXIT_OK

    if args.command == "check":
        config, _meta = load_snapshot(args.snapshot)
        report = check_admissibility(config)
        for name in ("omega1", "omega2", "omega3", "omega4"):
            cond = getattr(report, name)
            status = "ok" if cond.ok else f"FAIL {cond.violations[:5]}"
            print(f"{name}: {status}")
        print(f"overall: {'admissible' if report.overall else 'inadmissible'}")
        return EXIT_OK if report.overall else EXIT_VIOLATION

    if args.command == "enumerate":
        config, _meta = load_snapshot(args.snapshot)
        ps = config.point_set()
        try:
            lab = enumerate_points(ps)
        except NotEnumerableError as exc:
            print(f"not enumerable: {exc} (witness {exc.witness})",
                  file=sys.stderr)
            return EXIT_VIOLATION
        with open(args.out, "w", newline="") as fh:
            fh.write("site_i,site_j,point_index\n")
            for a in range(lab.n):
                for b in range(lab.n):
                    fh.write(f"{a},{b},{lab.point_of(a, b)}\n")
        print(f"wrote {args.out}; anchor point {lab.anchor_index}, "
              f"direction neighbor {lab.anchor_direction}")
        return EXIT_OK

    if args.command == "sweep":
        if args.config:
            args = _apply_config(parse_config_file(args.config), args)
        kind = _kind(args.kind)
        alpha = args.alpha if args.alpha is not None else \
            (0.15 if kind is LatticeKind.TRIANGULAR2D else 0.10)
        obs = tuple(s.strip() for s in
                    (args.observables.split(",")
                     if isinstance(args.observables, str) else args.observables)
                    if s.strip())
        spec = ExperimentSpec(
            kind=kind, n_list=list(args.n), l_list=list(args.l), alpha=alpha,
            seed=args.seed, sweeps=args.sweeps, burn_in=args.burn_in,
            thin=args.thin, proposal_radius=args.delta, observables=obs,
            output_dir=Path(args.out), workers=args.workers,
            write_cells=args.cells)
        result = run_experiment(spec)
        if result.ok:
            print(f"wrote {result.results_path}")
            return EXIT_OK
        print(f"invariant violation: {result.failures[0]}", file=sys.stderr)
        return EXIT_VIOLATION

    if args.command == "estimate-z":
        if (args.disk is None) == (args.rect is None):
            raise SpecValidationError("choose exactly one of --disk / --rect")
        window = DiskWindow(0.0, 0.0, args.disk) if args.disk is not None \
            else RectWindow(*args.rect)
        y = np.empty((0, 2))
        if args.boundary:
            config, _ = load_snapshot(args.boundary)
            pts = config.point_set().points
            y = pts[~window.contains(pts)]
        est = estimate_partition(window, y, args.z, args.trials, args.seed,
                                 args.alpha)
        print(f"Z = {fmt(est.value)} +- {fmt(est.stderr)} "
              f"({est.accepted}/{est.trials} accepted)")
        return EXIT_OK

    raise SpecValidationError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
