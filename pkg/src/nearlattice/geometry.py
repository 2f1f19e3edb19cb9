"""Pure geometric kernels.

Simplex volumes (determinant and edge-length closed forms), affine cell
Jacobians, Frobenius distance to the rotation group, torus metric with a
uniform-grid neighbor structure, and the octahedron convexity predicate.

All strict comparisons against geometric thresholds use a symmetric guard
band of GUARD so accept/reject decisions are reproducible.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFaceError, DegenerateReferenceError, NonEmbeddableError

#: symmetric guard band for strict inequalities (lengths, signed distances)
GUARD = 1e-12

#: minimal positive signed volume accepted as orientation-preserving
VOLUME_GUARD = 1e-12

#: tolerance on the vertex angle-sum injectivity pre-check (2D), radians
ANGLE_TOL = 1e-8

# Octahedron combinatorics, vertex slots 0..5 with antipodal pairs
# (0,3), (1,4), (2,5); slot order is fixed by the lattice builder.
OCTA_PAIRS = ((0, 3), (1, 4), (2, 5))
# Equator cycle for the stored splitting diagonal (0,3).
OCTA_EQUATOR = (1, 2, 4, 5)
# The four tetrahedra sharing the (0,3) diagonal.
OCTA_SPLIT = ((0, 3, 1, 2), (0, 3, 2, 4), (0, 3, 4, 5), (0, 3, 5, 1))
# The eight triangular faces: one vertex from each antipodal pair.
OCTA_FACES = (
    (0, 1, 2), (0, 2, 4), (0, 4, 5), (0, 5, 1),
    (3, 1, 2), (3, 2, 4), (3, 4, 5), (3, 5, 1),
)

_FACTORIAL = {1: 1.0, 2: 2.0, 3: 6.0}


def simplex_volume(vertices):
    """Signed volume of a d-simplex given as (d+1, d) vertex array.

    (1/d!) det of the edge-vector matrix; the sign encodes orientation.
    Batched input (..., d+1, d) is accepted.
    """
    v = np.asarray(vertices, dtype=float)
    d = v.shape[-1]
    edges = v[..., 1:, :] - v[..., :1, :]
    return np.linalg.det(edges) / _FACTORIAL[d]


def tetra_volume_heron(u, v, w, U, V, W):
    """Tetrahedron volume from its six edge lengths.

    Convention: (U, V, W) are the edges of one face and u, v, w the
    respectively opposite edges (u opposite U, and so on).  Accepts scalars
    or broadcastable arrays.  Raises NonEmbeddableError when the lengths
    cannot be realized in R^3; radicands in [-1e-12, 0) are clamped to 0 so
    near-degenerate probes do not produce NaN.
    """
    u, v, w, U, V, W = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (u, v, w, U, V, W))
    )
    X = (w - U + v) * (U + v + w)
    x = (U - v + w) * (v - w + U)
    Y = (u - V + w) * (V + w + u)
    y = (V - w + u) * (w - u + V)
    Z = (v - W + u) * (W + u + v)
    z = (W - u + v) * (u - v + W)

    face = np.stack([x * Y * Z, y * Z * X, z * X * Y, x * y * z])
    if np.any(face < -1e-12):
        raise NonEmbeddableError("a face violates the triangle inequality")
    face = np.clip(face, 0.0, None)
    a, b, c, d = np.sqrt(face)

    rad = (-a + b + c + d) * (a - b + c + d) * (a + b - c + d) * (a + b + c - d)
    if np.any(rad < -1e-12):
        raise NonEmbeddableError("edge lengths are not embeddable in R^3")
    rad = np.clip(rad, 0.0, None)
    out = np.sqrt(rad) / (192.0 * u * v * w)
    return float(out) if out.ndim == 0 else out


def cell_jacobian(reference, image):
    """The matrix A mapping reference edge vectors onto image edge vectors.

    This is the (constant) gradient of the affine map sending the reference
    simplex onto the image simplex.
    """
    ref = np.asarray(reference, dtype=float)
    img = np.asarray(image, dtype=float)
    d = ref.shape[-1]
    e_ref = (ref[1:] - ref[0]).T
    e_img = (img[1:] - img[0]).T
    if abs(np.linalg.det(e_ref)) / _FACTORIAL[d] <= VOLUME_GUARD:
        raise DegenerateReferenceError("reference simplex volume below 1e-12")
    return e_img @ np.linalg.inv(e_ref)


def dist_to_rotations(A):
    """Frobenius distance from a square matrix to SO(d).

    Via singular values s_i: with det A >= 0 the squared distance is
    sum (s_i - 1)^2; with det A < 0 the smallest singular value flips sign,
    giving sum_{i<d} (s_i - 1)^2 + (s_min + 1)^2.
    """
    A = np.asarray(A, dtype=float)
    s = np.linalg.svd(A, compute_uv=False)
    if np.linalg.det(A) >= 0.0:
        d2 = np.sum((s - 1.0) ** 2)
    else:
        d2 = np.sum((s[:-1] - 1.0) ** 2) + (s[-1] + 1.0) ** 2
    return float(np.sqrt(max(d2, 0.0)))


def convex_image_check(vertices):
    """Convexity test for an octahedron image (6 vertices, slots as above).

    True iff for each of the eight faces the three non-face vertices lie
    strictly on a common side of the face plane (signed distance beyond the
    guard).  Raises DegenerateFaceError on a collinear face.
    """
    p = np.asarray(vertices, dtype=float)
    if p.shape != (6, 3):
        raise ValueError("expected 6 vertices in R^3")
    all_slots = set(range(6))
    for face in OCTA_FACES:
        i, j, k = face
        n = np.cross(p[j] - p[i], p[k] - p[i])
        nn = np.linalg.norm(n)
        if nn < GUARD:
            raise DegenerateFaceError(f"face {face} is collinear")
        others = sorted(all_slots - set(face))
        s = (p[others] - p[i]) @ n
        if not (np.all(s > GUARD * nn) or np.all(s < -GUARD * nn)):
            return False
    return True


@dataclass(frozen=True)
class TorusMetric:
    """Distance on a flat torus R^d / (Z^d @ periods), or plain R^d.

    `periods` holds the period vectors as rows; None means planar (no wrap).
    """

    periods: np.ndarray | None = None
    _inv: np.ndarray = field(init=False, repr=False, default=None)
    _shifts: np.ndarray = field(init=False, repr=False, default=None)

    def __post_init__(self):
        if self.periods is not None:
            P = np.asarray(self.periods, dtype=float)
            object.__setattr__(self, "periods", P)
            object.__setattr__(self, "_inv", np.linalg.inv(P))
            d = P.shape[0]
            grids = np.meshgrid(*([np.array([-1.0, 0.0, 1.0])] * d), indexing="ij")
            shifts = np.stack([g.ravel() for g in grids], axis=-1) @ P
            object.__setattr__(self, "_shifts", shifts)

    @property
    def planar(self):
        return self.periods is None

    def displacement(self, a, b):
        """Minimum-image vector(s) b - a; shapes broadcast."""
        diff = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
        if self.periods is None:
            return diff
        frac = diff @ self._inv
        diff = diff - np.round(frac) @ self.periods
        # non-orthogonal cells: the rounded image need not be nearest
        cand = diff[..., None, :] + self._shifts
        idx = np.argmin(np.sum(cand * cand, axis=-1), axis=-1)
        return np.take_along_axis(cand, idx[..., None, None], axis=-2)[..., 0, :]

    def distance(self, a, b):
        return np.linalg.norm(self.displacement(a, b), axis=-1)

    def wrap(self, points):
        """Map points into the half-open fundamental cell."""
        pts = np.asarray(points, dtype=float)
        if self.periods is None:
            return pts.copy()
        frac = pts @ self._inv
        return (frac - np.floor(frac)) @ self.periods

    def heights(self):
        """Per-axis heights of the period cell."""
        if self.periods is None:
            raise ValueError("planar metric has no period heights")
        return 1.0 / np.linalg.norm(self._inv, axis=0)


class NeighborGrid:
    """Uniform spatial grid over a point collection for annulus queries.

    Bin size is at least the query radius along every axis, so a single
    query inspects the 3^d surrounding bins.  Rebuild on point changes
    (single-writer discipline).
    """

    def __init__(self, points, metric, r_max):
        self.points = np.asarray(points, dtype=float)
        self.metric = metric
        self.r_max = float(r_max)
        n, d = self.points.shape
        self.d = d
        if metric.planar:
            lo = self.points.min(axis=0) - 1e-9 if n else np.zeros(d)
            hi = self.points.max(axis=0) + 1e-9 if n else np.ones(d)
            span = np.maximum(hi - lo, self.r_max)
            self._m = np.maximum(1, np.floor(span / self.r_max).astype(int))
            self._frac_of = lambda p: (p - lo) / span
        else:
            heights = metric.heights()
            self._m = np.maximum(1, np.floor(heights / self.r_max).astype(int))
            inv = metric._inv
            self._frac_of = lambda p: (p @ inv) % 1.0
        frac = self._frac_of(self.points)
        self._bins = np.minimum((frac * self._m).astype(int), self._m - 1)
        flat = np.ravel_multi_index(self._bins.T, self._m)
        self._order = np.argsort(flat, kind="stable")
        sorted_flat = flat[self._order]
        nbins = int(np.prod(self._m))
        self._starts = np.searchsorted(sorted_flat, np.arange(nbins + 1))

    def _bin_candidates(self, bin_idx):
        ranges = []
        for ax in range(self.d):
            m = self._m[ax]
            if self.metric.planar:
                vals = [v for v in (bin_idx[ax] - 1, bin_idx[ax], bin_idx[ax] + 1) if 0 <= v < m]
            else:
                vals = sorted({(bin_idx[ax] + o) % m for o in (-1, 0, 1)})
            ranges.append(vals)
        grids = np.meshgrid(*ranges, indexing="ij")
        flat = np.ravel_multi_index([g.ravel() for g in grids], self._m)
        out = []
        for f in flat:
            out.append(self._order[self._starts[f]:self._starts[f + 1]])
        return np.concatenate(out) if out else np.empty(0, dtype=int)

    def query(self, x, r_lo, r_hi):
        """Indices of points at metric distance strictly in (r_lo, r_hi) of x."""
        if r_hi > self.r_max + 1e-15:
            raise ValueError("query radius exceeds the grid build radius")
        x = np.asarray(x, dtype=float)
        frac = self._frac_of(x)
        b = np.minimum((frac * self._m).astype(int), self._m - 1)
        cand = self._bin_candidates(b)
        if cand.size == 0:
            return cand
        dist = self.metric.distance(x, self.points[cand])
        keep = (dist > r_lo + GUARD) & (dist < r_hi - GUARD)
        return np.sort(cand[keep])

    def pairs(self, r_lo, r_hi):
        """All unordered point pairs (i < j) with distance strictly in (r_lo, r_hi).

        Vectorized over bin offsets; on the torus a pair is counted once via
        its minimum-image distance.
        """
        n = len(self.points)
        if n < 2:
            return np.empty((0, 2), dtype=int), np.empty(0)
        offs = self._half_offsets()
        bins = self._bins
        flat = np.ravel_multi_index(bins.T, self._m)
        rows_all, cols_all = [], []
        for off in offs:
            if self.metric.planar:
                tgt = bins + off
                ok = np.all((tgt >= 0) & (tgt < self._m), axis=1)
                src = np.nonzero(ok)[0]
                tflat = np.ravel_multi_index(tgt[ok].T, self._m)
            else:
                tgt = (bins + off) % self._m
                src = np.arange(n)
                tflat = np.ravel_multi_index(tgt.T, self._m)
            cnt = self._starts[tflat + 1] - self._starts[tflat]
            if not np.any(cnt):
                continue
            rows = np.repeat(src, cnt)
            base = np.repeat(self._starts[tflat], cnt)
            step = np.arange(len(rows)) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            cols = self._order[base + step]
            rows_all.append(rows)
            cols_all.append(cols)
        if not rows_all:
            return np.empty((0, 2), dtype=int), np.empty(0)
        rows = np.concatenate(rows_all)
        cols = np.concatenate(cols_all)
        keep = rows != cols
        rows, cols = rows[keep], cols[keep]
        # canonicalize order; small tori can surface a pair via several offsets
        lo, hi = np.minimum(rows, cols), np.maximum(rows, cols)
        _, uniq = np.unique(lo * n + hi, return_index=True)
        rows, cols = lo[uniq], hi[uniq]
        dist = self.metric.distance(self.points[rows], self.points[cols])
        keep = (dist > r_lo + GUARD) & (dist < r_hi - GUARD)
        return np.stack([rows[keep], cols[keep]], axis=1), dist[keep]

    def _half_offsets(self):
        # (0,...,0) plus one representative of each +/- offset pair
        grids = np.meshgrid(*([np.array([-1, 0, 1])] * self.d), indexing="ij")
        offs = np.stack([g.ravel() for g in grids], axis=-1)
        keep = []
        for o in offs:
            t = tuple(o)
            if t == (0,) * self.d or (t > (0,) * self.d):
                keep.append(o)
        return np.array(keep)


def annulus_neighbors(points, metric, x, r_lo, r_hi):
    """Indices of points y != x with metric distance strictly in (r_lo, r_hi)."""
    if not r_lo < r_hi:
        raise ValueError("require r_lo < r_hi")
    grid = NeighborGrid(points, metric, r_hi)
    return grid.query(x, r_lo, r_hi)
