"""Samplers for the uniform constrained measure and the windowed Gibbs kernel.

metropolis_run: single-site Metropolis with uniform-ball proposals.  The
target is flat on the admissible set, so accept/reject is a pure
admissibility test of the proposed state; only the cells incident to the
moved site (plus the local injectivity neighborhood) are re-examined.
Site 0 is pinned and never proposed.  One sweep proposes every free site
once, in canonical site order.  Identical (start, params) give bit-identical
trajectories: the chain RNG is a private splitmix64 stream.

ball_sample: exact draw from the product of uniform balls around the scaled
lattice (a subset of the admissible set for small enough radius).

gibbs_kernel_sample / estimate_partition: Poisson rejection sampling of the
windowed Gibbs kernel with boundary condition, and the acceptance-fraction
partition function estimate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .config import Configuration, PointSet, check_admissibility, _window_energy
from .errors import InadmissibleStartError, RadiusTooLargeError, TrialsExhaustedError
from .geometry import GUARD, TorusMetric

CONDITION_NAMES = ("omega1", "omega2", "omega3", "omega4")

#: sweeps between proposal-radius adjustments during burn-in
TUNE_INTERVAL = 50
TUNE_TARGET = 0.30


@dataclass
class SamplerParams:
    seed: int
    sweeps: int
    burn_in: int = 0
    thin: int = 1
    proposal_radius: float | None = None  # None: auto-tune during burn-in

    def __post_init__(self):
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.sweeps < 0 or self.burn_in < 0:
            raise ValueError("sweep counts must be non-negative")
        if self.proposal_radius is not None and not self.proposal_radius > 0:
            raise ValueError("proposal radius must be positive")


@dataclass
class ChainStats:
    acceptance_rate: dict
    sweeps_completed: int
    rejections: dict
    proposal_radius: float


class _Tables:
    """Flat per-site incidence tables derived from (lattice, l)."""

    def __init__(self, lattice, l):
        self.lattice = lattice
        self.l = float(l)
        d = lattice.d
        N = lattice.n_sites
        torus = np.ascontiguousarray(l * lattice.torus_periods)
        self.torus = torus
        self.inv_torus = np.ascontiguousarray(np.linalg.inv(torus))
        self.heights = 1.0 / np.linalg.norm(self.inv_torus, axis=0)
        self.order = np.arange(1, N, dtype=np.int64)  # site 0 pinned
        self.site_class = np.ascontiguousarray(lattice.site_class)
        self.n_classes = int(self.site_class.max()) + 1

        self.nbr_idx = np.ascontiguousarray(lattice.nbr_sites.astype(np.int64))
        self.nbr_voff = np.ascontiguousarray(
            lattice.nbr_offsets.astype(float) @ torus)

        # per-site incident simplices, with vertex offsets re-anchored so the
        # stored vertex position is pos[site] + voff
        M = len(lattice.simp_sites)
        per_site = [[] for _ in range(N)]
        for si in range(M):
            for v in set(int(s) for s in lattice.simp_sites[si]):
                per_site[v].append(si)
        counts = {len(p) for p in per_site}
        self.simp_sites = np.ascontiguousarray(lattice.simp_sites.astype(np.int64))
        self.simp_voff = np.ascontiguousarray(
            lattice.simp_offsets.astype(float) @ torus)

        if d == 2:
            assert counts == {6}
            self.tri_idx = np.empty((N, 6, 3), dtype=np.int64)
            self.tri_voff = np.empty((N, 6, 3, 2))
            for v in range(N):
                for k, si in enumerate(per_site[v]):
                    self.tri_idx[v, k] = self.simp_sites[si]
                    self.tri_voff[v, k] = self.simp_voff[si]
            # corner tables: for vertex v, the other two vertices of each
            # incident triangle in positive orientation, offsets relative to v
            self.cor_a_idx = np.empty((N, 6), dtype=np.int64)
            self.cor_b_idx = np.empty((N, 6), dtype=np.int64)
            self.cor_a_voff = np.empty((N, 6, 2))
            self.cor_b_voff = np.empty((N, 6, 2))
            fill = np.zeros(N, dtype=int)
            for si in range(M):
                sites = lattice.simp_sites[si]
                offs = lattice.simp_offsets[si].astype(float) @ torus
                for corner in range(3):
                    v = int(sites[corner])
                    k = fill[v]
                    fill[v] += 1
                    a, b = (corner + 1) % 3, (corner + 2) % 3
                    self.cor_a_idx[v, k] = sites[a]
                    self.cor_b_idx[v, k] = sites[b]
                    self.cor_a_voff[v, k] = offs[a] - offs[corner]
                    self.cor_b_voff[v, k] = offs[b] - offs[corner]
            assert np.all(fill == 6)
        else:
            smax = max(counts)
            self.inc_simp = np.empty((N, smax), dtype=np.int64)
            for v in range(N):
                # repeated-site cells give fewer distinct incidences; pad by
                # repeating the first entry (harmless: identical re-check)
                lst = per_site[v]
                self.inc_simp[v] = (lst + lst[:1] * (smax - len(lst)))
            self.simp_keys = self._keys(lattice)
            K = len(lattice.octa_sites)
            per_site_o = [[] for _ in range(N)]
            for oi in range(K):
                for v in set(int(s) for s in lattice.octa_sites[oi]):
                    per_site_o[v].append(oi)
            omax = max(len(p) for p in per_site_o)
            self.inc_octa = np.empty((N, omax), dtype=np.int64)
            for v in range(N):
                lst = per_site_o[v]
                self.inc_octa[v] = (lst + lst[:1] * (omax - len(lst)))
            self.octa_sites = np.ascontiguousarray(lattice.octa_sites.astype(np.int64))
            self.octa_voff = np.ascontiguousarray(
                lattice.octa_offsets.astype(float) @ torus)

    @staticmethod
    def _keys(lattice):
        keys = lattice.simp_sites.astype(np.int64)
        for ax in range(lattice.d):
            keys = keys * 32 + (lattice.simp_offsets[:, :, ax].astype(np.int64) + 8)
        return np.ascontiguousarray(keys)

    def window(self, alpha):
        lo = 1.0 + GUARD
        hi = 1.0 + alpha - GUARD
        return lo * lo, hi * hi

    def geometry_state(self, positions, scan_all=False):
        """verts/cent/rad/frac-box/candidate arrays for the 3D kernel.

        scan_all=True marks every simplex for exhaustive pairing (used for
        one-shot proposal checks with unbounded displacement).
        """
        verts = positions[self.simp_sites] + self.simp_voff
        cent = verts.mean(axis=1)
        rad = np.sqrt(((verts - cent[:, None, :]) ** 2).sum(axis=2).max(axis=1))
        frac0 = verts[:, :1, :] @ self.inv_torus
        rel = verts @ self.inv_torus - frac0
        rel -= np.round(rel)
        chart = frac0 + rel
        lo, hi = chart.min(axis=1), chart.max(axis=1)
        fc = np.ascontiguousarray(0.5 * (lo + hi))
        fh = np.ascontiguousarray(0.5 * (hi - lo))
        M = len(verts)
        changed_map = np.full(M, -1, dtype=np.int64)
        cand = np.zeros((M, min(M, 128)), dtype=np.int64)
        fill = -1 if scan_all else 0
        cand_n = np.full(M, fill, dtype=np.int64)
        return (np.ascontiguousarray(verts), np.ascontiguousarray(cent),
                np.ascontiguousarray(rad), fc, fh, cand, cand_n, changed_map)


def default_proposal_radius(l, alpha):
    """Conservative default: 5% of the edge-length wiggle room."""
    return 0.05 * min(l - 1.0, 1.0 + alpha - l)


def _run_chunk(tables, pos, alpha, delta, nsweeps, rng, acc, prop, rej):
    lo2, hi2 = tables.window(alpha)
    if tables.lattice.d == 2:
        _kernels.sweep_2d(pos, tables.order, tables.site_class,
                          tables.nbr_idx, tables.nbr_voff,
                          tables.tri_idx, tables.tri_voff,
                          tables.cor_a_idx, tables.cor_a_voff,
                          tables.cor_b_idx, tables.cor_b_voff,
                          lo2, hi2, delta, nsweeps, rng, acc, prop, rej)
    else:
        verts, cent, rad, fc, fh, cand, cand_n, changed = tables._state
        _kernels.sweep_3d(pos, tables.order, tables.site_class,
                          tables.nbr_idx, tables.nbr_voff,
                          tables.inc_simp, tables.simp_sites, tables.simp_voff,
                          tables.simp_keys,
                          tables.inc_octa, tables.octa_sites, tables.octa_voff,
                          verts, cent, rad, fc, fh, cand, cand_n, changed,
                          tables.torus, tables.inv_torus, tables.heights,
                          lo2, hi2, delta, nsweeps, rng, acc, prop, rej)


def metropolis_run(c0, params, observer=None):
    """Run the chain from c0; returns (final Configuration, ChainStats).

    The observer, when given, is called as observer(config, sweep) with a
    fresh Configuration copy every `thin` production sweeps after burn-in.
    """
    report = check_admissibility(c0)
    if not report.overall:
        raise InadmissibleStartError(
            f"start configuration violates {report.first_failure()}")
    lattice = c0.lattice
    tables = _Tables(lattice, c0.l)
    pos = np.ascontiguousarray(c0.positions.copy())
    if lattice.d == 3:
        tables._state = tables.geometry_state(pos)
    rng = np.array([np.uint64(params.seed)], dtype=np.uint64)

    auto = params.proposal_radius is None
    delta = params.proposal_radius if not auto \
        else default_proposal_radius(c0.l, c0.alpha)
    nclass = tables.n_classes
    acc = np.zeros(nclass, dtype=np.int64)
    prop = np.zeros(nclass, dtype=np.int64)
    rej = np.zeros(4, dtype=np.int64)

    done = 0
    while done < params.burn_in:
        step = min(TUNE_INTERVAL, params.burn_in - done)
        acc[:] = 0
        prop[:] = 0
        rej[:] = 0
        _run_chunk(tables, pos, c0.alpha, delta, step, rng, acc, prop, rej)
        done += step
        if auto and prop.sum():
            rate = acc.sum() / prop.sum()
            if rate < TUNE_TARGET - 0.05:
                delta /= 1.12
            elif rate > TUNE_TARGET + 0.05:
                delta = min(delta * 1.12, 0.5)

    acc[:] = 0
    prop[:] = 0
    rej[:] = 0
    done = 0
    while done < params.sweeps:
        step = min(params.thin, params.sweeps - done)
        _run_chunk(tables, pos, c0.alpha, delta, step, rng, acc, prop, rej)
        done += step
        if observer is not None and done % params.thin == 0:
            observer(Configuration(lattice, pos.copy(), c0.l, c0.alpha), done)

    rates = {}
    for cls in range(nclass):
        rates[cls] = float(acc[cls] / prop[cls]) if prop[cls] else float("nan")
    stats = ChainStats(
        acceptance_rate=rates,
        sweeps_completed=params.burn_in + params.sweeps,
        rejections={name: int(rej[i]) for i, name in enumerate(CONDITION_NAMES)},
        proposal_radius=float(delta),
    )
    return Configuration(lattice, pos, c0.l, c0.alpha), stats


def evaluate_proposal(config, site, new_position):
    """Would the chain accept moving `site` to `new_position` from `config`?

    Returns (accepted, failed_condition_name_or_None).  Uses the same
    incremental kernel as the sweeps.
    """
    if site == 0:
        raise ValueError("site 0 is pinned")
    lattice = config.lattice
    tables = _Tables(lattice, config.l)
    pos = np.ascontiguousarray(config.positions)
    lo2, hi2 = tables.window(config.alpha)
    p = np.asarray(new_position, dtype=float)
    if lattice.d == 2:
        code = _kernels.check_move_2d(
            site, p[0], p[1], pos, tables.nbr_idx, tables.nbr_voff,
            tables.tri_idx, tables.tri_voff,
            tables.cor_a_idx, tables.cor_a_voff,
            tables.cor_b_idx, tables.cor_b_voff, lo2, hi2)
    else:
        verts, cent, rad, fc, fh, cand, cand_n, changed = \
            tables.geometry_state(pos, scan_all=True)
        smax = tables.inc_simp.shape[1]
        code = _kernels.check_move_3d(
            site, p, pos, tables.nbr_idx, tables.nbr_voff,
            tables.inc_simp, tables.simp_sites, tables.simp_voff,
            tables.simp_keys, tables.inc_octa, tables.octa_sites,
            tables.octa_voff, verts, cent, rad, fc, fh, cand, cand_n, changed,
            np.empty((smax, 4, 3)), np.empty((smax, 3)), np.empty(smax),
            np.empty((smax, 3)), np.empty((smax, 3)),
            tables.torus, tables.inv_torus, tables.heights, lo2, hi2)
    return code == 0, None if code == 0 else CONDITION_NAMES[code - 1]


def ball_sample(lattice, l, r, seed, alpha):
    """Uniform draw from the ball product S_{n,l,r} around the scaled lattice.

    Requires 2r < min(l-1, 1+alpha-l) and r < 1/2, which makes every draw
    admissible.  r = 0 returns the scaled lattice itself.
    """
    if not 1.0 < l < 1.0 + alpha:
        raise RadiusTooLargeError(f"l={l} not in (1, {1 + alpha})")
    room = min(l - 1.0, 1.0 + alpha - l)
    if r < 0 or 2.0 * r >= room or r >= 0.5:
        raise RadiusTooLargeError(
            f"need 2r < min(l-1, 1+alpha-l) = {room} and r < 1/2, got r={r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    N, d = lattice.n_sites, lattice.d
    disp = np.zeros((N, d))
    if r > 0:
        pending = np.arange(1, N)
        while pending.size:
            trial = rng.uniform(-r, r, size=(pending.size, d))
            ok = (trial ** 2).sum(axis=1) <= r * r
            disp[pending[ok]] = trial[ok]
            pending = pending[~ok]
    return Configuration(lattice, l * lattice.site_coords + disp, l, alpha)


@dataclass
class PartitionEstimate:
    value: float
    stderr: float
    trials: int
    accepted: int


def _gibbs_trial(window, y, z, alpha, rng):
    k = rng.poisson(z * window.area())
    pts = window.sample_uniform(rng, k) if k else np.empty((0, 2))
    value, _ = _window_energy(window, pts, y, alpha)
    return value == 0.0, pts


def gibbs_kernel_sample(window, y_points, z, seed, max_trials, alpha):
    """First Poisson draw in the window with zero energy given boundary Y."""
    rng = np.random.Generator(np.random.PCG64(seed))
    y = np.asarray(y_points, dtype=float).reshape(-1, 2)
    if len(y) and np.any(window.contains(y)):
        raise ValueError("boundary condition must be supported outside the window")
    for _ in range(int(max_trials)):
        ok, pts = _gibbs_trial(window, y, z, alpha, rng)
        if ok:
            return PointSet(pts, TorusMetric(None), alpha)
    raise TrialsExhaustedError(int(max_trials))


def estimate_partition(window, y_points, z, trials, seed, alpha):
    """Monte-Carlo estimate of the partition function Z^z as the acceptance
    fraction of Poisson draws, with binomial standard error."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.Generator(np.random.PCG64(seed))
    y = np.asarray(y_points, dtype=float).reshape(-1, 2)
    if len(y) and np.any(window.contains(y)):
        raise ValueError("boundary condition must be supported outside the window")
    accepted = 0
    for _ in range(int(trials)):
        ok, _pts = _gibbs_trial(window, y, z, alpha, rng)
        accepted += ok
    p = accepted / trials
    return PartitionEstimate(p, math.sqrt(p * (1.0 - p) / trials), int(trials),
                             accepted)
