"""Periodic parametrized configurations and their admissibility.

A Configuration stores one position per canonical site of the lattice
torus; the periodic extension  omega(x + n*t_i) = omega(x) + l*n*t_i  is
implied and realized through the integer offsets carried by edges, cells
and the triangulation.  Site 0 is pinned at the origin.

The four admissibility conditions:
  1. every edge image length lies strictly in (1, 1+alpha);
  2. the piecewise-affine extension is injective;
  3. every triangulation simplex image has positive signed volume;
  4. every octahedron image is a convex polyhedron (3D; vacuous in 2D).

Condition 2 is decided by condition 3 plus an overlap scan over
non-adjacent simplex images (periodic copies included); in 2D a full-angle
check at every vertex short-circuits the scan in the common case.

The module also evaluates the unlabeled-point-set Hamiltonian: zero energy
means hard-core separation plus exactly six annulus neighbors per point,
either on a torus or in a planar window with boundary condition.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ScaleOutOfRangeError
from .geometry import ANGLE_TOL, GUARD, VOLUME_GUARD, NeighborGrid, TorusMetric
from .lattice import Lattice

_FACTORIAL = {2: 2.0, 3: 6.0}


@dataclass
class Configuration:
    """An n-periodic parametrized configuration with parameters (l, alpha)."""

    lattice: Lattice
    positions: np.ndarray
    l: float
    alpha: float

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=float)
        if self.positions.shape != (self.lattice.n_sites, self.lattice.d):
            raise ValueError("positions shape does not match the lattice")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if not 1.0 < self.l < 1.0 + self.alpha:
            raise ScaleOutOfRangeError(
                f"l={self.l} outside the open interval (1, {1.0 + self.alpha})")
        if np.any(self.positions[0] != 0.0):
            raise ValueError("site 0 must sit exactly at the origin")

    @property
    def image_periods(self):
        """Rows span the image torus: l * n * t_i."""
        return self.l * self.lattice.torus_periods

    def copy(self):
        return Configuration(self.lattice, self.positions.copy(), self.l, self.alpha)

    def edge_vectors(self):
        lat = self.lattice
        return (self.positions[lat.edge_sites[:, 1]]
                + lat.edge_offsets.astype(float) @ self.image_periods
                - self.positions[lat.edge_sites[:, 0]])

    def simplex_images(self):
        """Image vertex coordinates of every triangulation simplex, (M, d+1, d)."""
        lat = self.lattice
        return (self.positions[lat.simp_sites]
                + lat.simp_offsets.astype(float) @ self.image_periods)

    def octa_images(self):
        lat = self.lattice
        if len(lat.octa_sites) == 0:
            return np.empty((0, 6, lat.d))
        return (self.positions[lat.octa_sites]
                + lat.octa_offsets.astype(float) @ self.image_periods)

    def cell_edge_lengths(self):
        """Per-cell edge image lengths, aligned with lattice.cell_edge_cell."""
        lat = self.lattice
        P = self.image_periods
        vec = (self.positions[lat.cell_edge_sites[:, 1]]
               + lat.cell_edge_offsets[:, 1].astype(float) @ P
               - self.positions[lat.cell_edge_sites[:, 0]]
               - lat.cell_edge_offsets[:, 0].astype(float) @ P)
        return np.linalg.norm(vec, axis=1)

    def point_set(self):
        """Wrapped image positions as an unlabeled PointSet on the torus."""
        metric = TorusMetric(self.image_periods)
        return PointSet(metric.wrap(self.positions), metric, self.alpha)


def scaled_lattice_config(lattice, l, alpha=None):
    """The scaled lattice omega_l(x) = l*x as a Configuration."""
    if alpha is None:
        alpha = 0.15 if lattice.d == 2 else 0.10
    return Configuration(lattice, l * lattice.site_coords, l, alpha)


def translate(config, v):
    """All positions shifted by v, then re-pinned so site 0 is the origin."""
    pos = config.positions + np.asarray(v, dtype=float)
    pos = pos - pos[0]
    pos[0] = 0.0
    return Configuration(config.lattice, pos, config.l, config.alpha)


def relabel(config, shift):
    """Relabeling by a torus lattice translation (the measure-preserving map
    omega(x) -> omega(x + b) - omega(b) for b in T)."""
    lat = config.lattice
    shift = np.asarray(shift, dtype=np.int64)
    ints = lat.site_ints
    new_ints = ints.copy()
    new_ints[:, :lat.d] = (ints[:, :lat.d] + shift) % lat.n
    off = (ints[:, :lat.d] + shift) // lat.n
    index_of = {tuple(v): i for i, v in enumerate(ints)}
    perm = np.array([index_of[tuple(v)] for v in new_ints], dtype=np.int64)
    pos = config.positions[perm] + off.astype(float) @ config.image_periods
    pos = pos - pos[0]
    pos[0] = 0.0
    return Configuration(lat, pos, config.l, config.alpha)


# ---------------------------------------------------------------------------
# admissibility

@dataclass
class ConditionReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass
class AdmissibilityReport:
    omega1: ConditionReport
    omega2: ConditionReport
    omega3: ConditionReport
    omega4: ConditionReport

    @property
    def overall(self):
        return self.omega1.ok and self.omega2.ok and self.omega3.ok and self.omega4.ok

    def __bool__(self):
        return self.overall

    def first_failure(self):
        for name in ("omega1", "omega2", "omega3", "omega4"):
            if not getattr(self, name).ok:
                return name
        return None


def _simplex_keys(lat):
    """Packed (site, offset) vertex keys, base-32 per offset axis."""
    keys = lat.simp_sites.astype(np.int64)
    for ax in range(lat.d):
        keys = keys * 32 + (lat.simp_offsets[:, :, ax].astype(np.int64) + 8)
    return np.ascontiguousarray(keys)


def _angle_sums(config, images):
    """Sum of image corner angles around each site (2D)."""
    lat = config.lattice
    sums = np.zeros(lat.n_sites)
    for corner in range(3):
        a = images[:, (corner + 1) % 3] - images[:, corner]
        b = images[:, (corner + 2) % 3] - images[:, corner]
        ang = np.arctan2(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0],
                         a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1])
        np.add.at(sums, lat.simp_sites[:, corner], ang)
    return sums


def check_admissibility(config):
    """Full (non-incremental) admissibility report with violation witnesses."""
    lat = config.lattice
    lo = 1.0 + GUARD
    hi = 1.0 + config.alpha - GUARD

    lens = np.linalg.norm(config.edge_vectors(), axis=1)
    bad1 = np.nonzero((lens <= lo) | (lens >= hi))[0]
    omega1 = ConditionReport(bad1.size == 0, bad1.tolist())

    images = config.simplex_images()
    edges = images[:, 1:, :] - images[:, :1, :]
    vols = np.linalg.det(edges) / _FACTORIAL[lat.d]
    bad3 = np.nonzero(vols <= VOLUME_GUARD)[0]
    omega3 = ConditionReport(bad3.size == 0, bad3.tolist())

    if lat.d == 2:
        omega4 = ConditionReport(True, [])
    else:
        oct_imgs = config.octa_images()
        bad4 = []
        for idx in range(len(oct_imgs)):
            if not _octa_convex(oct_imgs[idx]):
                bad4.append(int(lat.octa_cell[idx]))
        omega4 = ConditionReport(not bad4, bad4)

    if not omega3.ok:
        omega2 = ConditionReport(False, [])
    else:
        omega2 = None
        if lat.d == 2:
            sums = _angle_sums(config, images)
            if np.all(np.abs(sums - 2.0 * math.pi) <= ANGLE_TOL):
                omega2 = ConditionReport(True, [])
        if omega2 is None:
            torus = np.ascontiguousarray(config.image_periods)
            inv = np.ascontiguousarray(np.linalg.inv(torus))
            heights = 1.0 / np.linalg.norm(inv, axis=0)
            keys = _simplex_keys(lat)
            out = np.empty((256, 2), dtype=np.int64)
            cnt = _kernels.overlap_scan(np.ascontiguousarray(images), keys,
                                        torus, inv, heights, GUARD, out)
            pairs = [tuple(p) for p in out[:min(cnt, 256)]]
            omega2 = ConditionReport(cnt == 0, pairs)

    return AdmissibilityReport(omega1, omega2, omega3, omega4)


def _octa_convex(p):
    from .geometry import OCTA_FACES
    all_slots = set(range(6))
    for face in OCTA_FACES:
        i, j, k = face
        n = np.cross(p[j] - p[i], p[k] - p[i])
        nn = np.linalg.norm(n)
        if nn < GUARD:
            return False
        others = sorted(all_slots - set(face))
        s = (p[others] - p[i]) @ n
        if not (np.all(s > GUARD * nn) or np.all(s < -GUARD * nn)):
            return False
    return True


# ---------------------------------------------------------------------------
# unlabeled point sets and the local Hamiltonian

@dataclass
class PointSet:
    """Finite unlabeled point collection with a metric and the gap alpha."""

    points: np.ndarray
    metric: TorusMetric
    alpha: float

    def __post_init__(self):
        self.points = np.ascontiguousarray(self.points, dtype=float)


@dataclass
class HamiltonianReport:
    ok: bool
    violations: list  # (point_index, kind, value): kind 'hardcore' | 'count'

    def __bool__(self):
        return self.ok


def hamiltonian_zero(ps):
    """True iff min pairwise distance > 1 and every point has exactly six
    neighbors at distance strictly inside (1, 1+alpha)."""
    n = len(ps.points)
    violations = []
    if n == 0:
        return HamiltonianReport(True, [])
    grid = NeighborGrid(ps.points, ps.metric, 1.0 + ps.alpha)
    pairs, dist = grid.pairs(-1.0, 1.0 + ps.alpha)
    hard = dist <= 1.0 + GUARD
    counts = np.zeros(n, dtype=int)
    in_ann = (dist > 1.0 + GUARD) & (dist < 1.0 + ps.alpha - GUARD)
    np.add.at(counts, pairs[in_ann, 0], 1)
    np.add.at(counts, pairs[in_ann, 1], 1)
    for (i, j), d in zip(pairs[hard], dist[hard]):
        violations.append((int(i), "hardcore", float(d)))
        violations.append((int(j), "hardcore", float(d)))
    for i in np.nonzero(counts != 6)[0]:
        violations.append((int(i), "count", int(counts[i])))
    return HamiltonianReport(not violations, violations)


@dataclass(frozen=True)
class RectWindow:
    x0: float
    x1: float
    y0: float
    y1: float

    def area(self):
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        return ((pts[:, 0] >= self.x0) & (pts[:, 0] < self.x1)
                & (pts[:, 1] >= self.y0) & (pts[:, 1] < self.y1))

    def distance(self, pts):
        """Euclidean distance from the window (0 inside)."""
        pts = np.atleast_2d(pts)
        dx = np.maximum(np.maximum(self.x0 - pts[:, 0], pts[:, 0] - self.x1), 0.0)
        dy = np.maximum(np.maximum(self.y0 - pts[:, 1], pts[:, 1] - self.y1), 0.0)
        return np.hypot(dx, dy)

    def sample_uniform(self, rng, k):
        pts = rng.random((k, 2))
        pts[:, 0] = self.x0 + pts[:, 0] * (self.x1 - self.x0)
        pts[:, 1] = self.y0 + pts[:, 1] * (self.y1 - self.y0)
        return pts


@dataclass(frozen=True)
class DiskWindow:
    cx: float
    cy: float
    radius: float

    def area(self):
        return math.pi * self.radius ** 2

    def contains(self, pts):
        pts = np.atleast_2d(pts)
        return np.hypot(pts[:, 0] - self.cx, pts[:, 1] - self.cy) < self.radius

    def distance(self, pts):
        pts = np.atleast_2d(pts)
        return np.maximum(
            np.hypot(pts[:, 0] - self.cx, pts[:, 1] - self.cy) - self.radius, 0.0)

    def sample_uniform(self, rng, k):
        r = self.radius * np.sqrt(rng.random(k))
        th = 2.0 * math.pi * rng.random(k)
        return np.stack([self.cx + r * np.cos(th), self.cy + r * np.sin(th)], axis=1)


def hamiltonian_window(window, x_points, y_points, alpha):
    """Energy of X in the window given boundary Y: 0 or inf, with diagnostics.

    X must be supported inside the window, Y outside; only Y within the
    2(1+alpha)-enlargement influences the value.
    """
    x = np.asarray(x_points, dtype=float).reshape(-1, 2)
    y = np.asarray(y_points, dtype=float).reshape(-1, 2)
    if x.size and not np.all(window.contains(x)):
        raise ValueError("X must be supported inside the window")
    if y.size and np.any(window.contains(y)):
        raise ValueError("Y must be supported outside the window")
    return _window_energy(window, x, y, alpha)


def _window_energy(window, x, y, alpha):
    if len(y):
        y = y[window.distance(y) < 2.0 * (1.0 + alpha)]
    pool = np.concatenate([x, y]) if len(y) else x
    # points whose local conditions are part of the energy: X plus the Y collar
    check_idx = list(range(len(x)))
    if len(y):
        for k in np.nonzero(window.distance(y) < 1.0 + alpha)[0]:
            check_idx.append(len(x) + int(k))
    violations = []
    for ci in check_idx:
        p = pool[ci]
        d = np.hypot(pool[:, 0] - p[0], pool[:, 1] - p[1])
        d[ci] = np.inf  # exclude the point itself, not coincident partners
        dmin = float(d.min()) if len(d) > 1 else math.inf
        if dmin <= 1.0 + GUARD:
            violations.append((ci, "hardcore", dmin))
            continue
        cnt = int(np.count_nonzero((d > 1.0 + GUARD) & (d < 1.0 + alpha - GUARD)))
        if cnt != 6:
            violations.append((ci, "count", cnt))
    value = 0.0 if not violations else math.inf
    return value, HamiltonianReport(not violations, violations)
