"""Rebuild the triangular-lattice labeling of an unlabeled 2D point set.

A point set on a torus with zero Hamiltonian (hard-core separation, exactly
six annulus neighbors everywhere) carries a hidden triangular-lattice
structure.  enumerate_points makes it explicit: starting from a canonical
anchor, an orientation-preserving local frame is propagated breadth-first
through the annulus graph; every non-tree edge is then checked for
consistency and the resulting labels are reduced modulo the torus.

Failure at any stage (wrong point count, Hamiltonian violation, frame
inconsistency, non-bijective labels) raises NotEnumerableError with the
offending point or edge as witness.
"""

from dataclasses import dataclass

import numpy as np

from .config import hamiltonian_zero
from .errors import NotEnumerableError
from .geometry import GUARD, NeighborGrid

# lattice unit directions in integer (a, b) coordinates for a + b*tau,
# counterclockwise from (1, 0)
DIRECTIONS = np.array([(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)],
                      dtype=np.int64)
_DIR_INDEX = {tuple(d): k for k, d in enumerate(DIRECTIONS)}


@dataclass
class Labeling:
    """Bijection between torus lattice sites and point indices."""

    n: int
    point_labels: np.ndarray      # (N, 2) integer labels mod n
    site_to_point: np.ndarray     # (n, n) point index for site (a, b)
    anchor_index: int
    anchor_direction: int         # point index mapped to lattice direction (1, 0)

    def point_of(self, a, b):
        return int(self.site_to_point[a % self.n, b % self.n])

    def edge_point_pairs(self):
        """The 3n^2 lattice-edge classes as unordered point-index pairs."""
        s = self.site_to_point
        pairs = set()
        for da, db in DIRECTIONS[:3]:
            q = np.roll(np.roll(s, -int(da), axis=0), -int(db), axis=1)
            lo = np.minimum(s, q).ravel()
            hi = np.maximum(s, q).ravel()
            pairs.update(zip(lo.tolist(), hi.tolist()))
        return pairs


def _neighbor_table(ps):
    """(N, 6) neighbor indices sorted counterclockwise per point."""
    pts = ps.points
    n_pts = len(pts)
    report = hamiltonian_zero(ps)
    if not report.ok:
        idx, kind, value = report.violations[0]
        raise NotEnumerableError(
            f"Hamiltonian violation at point {idx}: {kind}={value}", witness=idx)
    grid = NeighborGrid(pts, ps.metric, 1.0 + ps.alpha)
    pairs, _dist = grid.pairs(1.0, 1.0 + ps.alpha)
    both = np.concatenate([pairs, pairs[:, ::-1]])
    order = np.argsort(both[:, 0], kind="stable")
    table = both[order, 1].reshape(n_pts, 6)
    disp = ps.metric.displacement(pts[:, None, :], pts[table])
    ang = np.arctan2(disp[:, :, 1], disp[:, :, 0]) % (2.0 * np.pi)
    ccw = np.argsort(ang, axis=1, kind="stable")
    return np.take_along_axis(table, ccw, axis=1)


def enumerate_points(ps):
    """Labeling of a zero-energy point set by the triangular lattice torus.

    The anchor is the point closest to the domain origin (lexicographic
    tie-break); its neighbor of smallest positive angle from the +x axis
    becomes lattice direction (1, 0) and the rest follow counterclockwise.
    """
    pts = ps.points
    n_pts = len(pts)
    n = int(round(np.sqrt(n_pts)))
    if n * n != n_pts or n_pts == 0:
        raise NotEnumerableError(
            f"point count {n_pts} is not a positive perfect square")

    ring = _neighbor_table(ps)  # (N, 6) neighbors in ccw order
    ring_list = ring.tolist()

    origin_dist = ps.metric.distance(np.zeros(2), pts)
    best = np.lexsort((pts[:, 1], pts[:, 0], origin_dist))
    anchor = int(best[0])

    la = [0] * n_pts  # labels, unwrapped along the spanning tree
    lb = [0] * n_pts
    seen = [False] * n_pts
    seen[anchor] = True
    dirs = DIRECTIONS.tolist()

    for k, j in enumerate(ring_list[anchor]):
        la[j], lb[j] = dirs[k]
        seen[j] = True
    anchor_direction = ring_list[anchor][0]

    # queue entries: (point, parent, direction index of parent seen from point)
    queue = [(j, anchor, (k + 3) % 6) for k, j in enumerate(ring_list[anchor])]
    head = 0
    while head < len(queue):
        p, parent, back_dir = queue[head]
        head += 1
        rp = ring_list[p]
        try:
            start = rp.index(parent)
        except ValueError:
            raise NotEnumerableError(
                f"neighbor relation not symmetric at point {p}", witness=p)
        for step in range(6):
            q = rp[(start + step) % 6]
            da, db = dirs[(back_dir + step) % 6]
            wa = la[p] + da
            wb = lb[p] + db
            if seen[q]:
                if (la[q] - wa) % n or (lb[q] - wb) % n:
                    raise NotEnumerableError(
                        f"inconsistent loop at edge ({p}, {q})", witness=(p, q))
            else:
                la[q], lb[q] = wa, wb
                seen[q] = True
                queue.append((q, p, (back_dir + step + 3) % 6))

    if not all(seen):
        missing = seen.index(False)
        raise NotEnumerableError(f"annulus graph is disconnected at {missing}",
                                 witness=missing)

    labels_mod = np.stack([np.array(la) % n, np.array(lb) % n], axis=1)
    site_to_point = np.full((n, n), -1, dtype=np.int64)
    flat = labels_mod[:, 0] * n + labels_mod[:, 1]
    site_to_point.ravel()[flat] = np.arange(n_pts)
    if len(np.unique(flat)) != n_pts:
        counts = np.bincount(flat, minlength=n * n)
        dup = int(np.nonzero(counts > 1)[0][0])
        clash = np.nonzero(flat == dup)[0]
        raise NotEnumerableError(
            f"points {int(clash[0])} and {int(clash[1])} collide on site"
            f" ({dup // n}, {dup % n})", witness=int(clash[1]))

    lab = Labeling(n, labels_mod, site_to_point, anchor, anchor_direction)
    _verify(lab, ring)
    return lab


def _verify(lab, ring):
    """Soundness: annulus edges and lattice edges coincide as point pairs."""
    n = lab.n
    n_pts = ring.shape[0]
    # every annulus edge must be a unit label difference
    src = np.repeat(np.arange(n_pts), 6)
    dst = ring.ravel()
    diff = (lab.point_labels[dst] - lab.point_labels[src]) % n
    codes = diff[:, 0] * n + diff[:, 1]
    unit = set((int(da % n) * n + int(db % n)) for da, db in DIRECTIONS)
    bad = [c not in unit for c in codes.tolist()]
    if any(bad):
        k = bad.index(True)
        raise NotEnumerableError(
            f"edge ({int(src[k])}, {int(dst[k])}) maps to a non-unit label"
            " difference", witness=(int(src[k]), int(dst[k])))
    # conversely, every lattice edge must be an annulus edge: both relations
    # are 6-regular on n^2 vertices, so matching edge sets follow from the
    # unit-difference check plus exact annulus degree (checked upstream);
    # verify the edge sets explicitly all the same
    annulus = set()
    for p in range(n_pts):
        for q in ring[p].tolist():
            annulus.add((p, q) if p < q else (q, p))
    lattice_pairs = lab.edge_point_pairs()
    if annulus != lattice_pairs:
        diff_pair = sorted(annulus.symmetric_difference(lattice_pairs))[0]
        raise NotEnumerableError(
            f"labeling violates the edge biconditional on {diff_pair}",
            witness=diff_pair)
