"""Rigidity, volume, entropy and orientational-order statistics.

deviation_statistics measures how far the piecewise-affine extension's
Jacobian sits from Id and from l*Id, per triangulation simplex and as
volume-weighted aggregates over the period cell; it also carries the
edge-length deviation sum that bounds the L2 distance in the rigidity
estimate.

volume_sum_check evaluates the exact periodic identity
sum_cells (image volume - reference volume) = |U_n| (l^d - 1),
valid for any periodic configuration when image volumes are signed.

neighbor_direction_stats extracts bond direction statistics: psi6 and the
deviation from the best-aligned frame of sixth roots of unity.

entropy_upper_bound evaluates the closed-form specific-entropy bound coming
from the ball-sampler volume; octa/tetra_derivative_check verify the volume
derivatives at the regular polyhedra by central finite differences.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NonEmbeddableError
from .geometry import tetra_volume_heron
from .lattice import CellKind

_FACTORIAL = {2: 2.0, 3: 6.0}


@dataclass
class DeviationStats:
    dev_id: np.ndarray        # per-simplex |J - Id|^2
    dev_lid: np.ndarray       # per-simplex |J - l Id|^2
    dist_so2: np.ndarray      # per-simplex dist^2(J, SO(d))
    ref_vol: np.ndarray
    l2_id: float              # ||grad - Id||^2_{L2(U_n)}
    l2_lid: float
    l2_dist_so: float
    mean_dev_id: float        # volume-weighted means
    mean_dev_lid: float
    max_dev_id: float
    max_dev_lid: float
    mean_jacobian: np.ndarray
    edge_dev_sum: float       # sum over cells, cell edges of (|edge|-1)^2


@dataclass
class DirectionStats:
    angles: np.ndarray
    psi6: float
    frame_angle: float        # best-aligned sixth-roots frame, in [0, pi/3)
    mean_abs_deviation: float
    class_histogram: np.ndarray  # bond counts per alignment class


def jacobians(config):
    """Per-simplex Jacobian of the affine extension, (M, d, d)."""
    lat = config.lattice
    ref = lat.simp_ref
    img = config.simplex_images()
    e_ref = np.swapaxes(ref[:, 1:, :] - ref[:, :1, :], 1, 2)
    e_img = np.swapaxes(img[:, 1:, :] - img[:, :1, :], 1, 2)
    return e_img @ np.linalg.inv(e_ref)


def deviation_statistics(config):
    lat = config.lattice
    d = lat.d
    J = jacobians(config)
    w = lat.simp_ref_vol
    eye = np.eye(d)
    dev_id = ((J - eye) ** 2).sum(axis=(1, 2))
    dev_lid = ((J - config.l * eye) ** 2).sum(axis=(1, 2))
    s = np.linalg.svd(J, compute_uv=False)
    det = np.linalg.det(J)
    dist2_pos = ((s - 1.0) ** 2).sum(axis=1)
    dist2_neg = ((s[:, :-1] - 1.0) ** 2).sum(axis=1) + (s[:, -1] + 1.0) ** 2
    dist_so2 = np.where(det >= 0, dist2_pos, dist2_neg)
    vol = float(w.sum())
    mean_j = np.einsum("m,mij->ij", w, J) / vol

    lens = config.cell_edge_lengths()
    edge_dev = float(((lens - 1.0) ** 2).sum())

    return DeviationStats(
        dev_id=dev_id, dev_lid=dev_lid, dist_so2=dist_so2, ref_vol=w,
        l2_id=float(w @ dev_id), l2_lid=float(w @ dev_lid),
        l2_dist_so=float(w @ dist_so2),
        mean_dev_id=float(w @ dev_id / vol), mean_dev_lid=float(w @ dev_lid / vol),
        max_dev_id=float(dev_id.max()), max_dev_lid=float(dev_lid.max()),
        mean_jacobian=mean_j, edge_dev_sum=edge_dev,
    )


def volume_sum_check(config):
    """Residual of  sum_cells(signed image vol - ref vol) = |U_n| (l^d - 1)."""
    lat = config.lattice
    img = config.simplex_images()
    edges = img[:, 1:, :] - img[:, :1, :]
    signed = np.linalg.det(edges) / _FACTORIAL[lat.d]
    vol = lat.volume
    return float(signed.sum() - vol - vol * (config.l ** lat.d - 1.0))


def _wrap_sixth(x):
    """Wrap angles into [-pi/6, pi/6) modulo pi/3."""
    third = math.pi / 3.0
    return (x + third / 2.0) % third - third / 2.0


def bond_angles(source, alpha=None):
    """Bond direction angles from a Configuration or a 2D PointSet."""
    from .config import Configuration, PointSet
    from .errors import NeighborCountError
    from .geometry import NeighborGrid

    if isinstance(source, Configuration):
        if source.lattice.d != 2:
            raise ValueError("bond angles are a 2D statistic")
        vec = source.edge_vectors()
    elif isinstance(source, PointSet):
        a = source.alpha if alpha is None else alpha
        grid = NeighborGrid(source.points, source.metric, 1.0 + a)
        pairs, _ = grid.pairs(1.0, 1.0 + a)
        counts = np.zeros(len(source.points), dtype=int)
        np.add.at(counts, pairs[:, 0], 1)
        np.add.at(counts, pairs[:, 1], 1)
        bad = np.nonzero(counts != 6)[0]
        if bad.size:
            raise NeighborCountError(int(bad[0]), int(counts[bad[0]]))
        vec = source.metric.displacement(source.points[pairs[:, 0]],
                                         source.points[pairs[:, 1]])
    else:
        raise TypeError("expected Configuration or PointSet")
    return np.arctan2(vec[:, 1], vec[:, 0])


def neighbor_direction_stats(source, alpha=None):
    theta = bond_angles(source, alpha)
    z = np.exp(6j * theta)
    psi6 = float(abs(z.mean()))

    # minimize mean squared wrapped deviation; circular-mean start, then
    # fixed-point refinement of the wrapped average
    phi = float(np.angle(z.mean()) / 6.0)
    for _ in range(32):
        dev = _wrap_sixth(theta - phi)
        shift = float(dev.mean())
        phi += shift
        if abs(shift) < 1e-14:
            break
    phi = phi % (math.pi / 3.0)
    dev = _wrap_sixth(theta - phi)
    classes = np.round((theta - phi) / (math.pi / 3.0)).astype(int) % 6
    hist = np.bincount(classes, minlength=6)
    return DirectionStats(
        angles=theta, psi6=psi6, frame_angle=phi,
        mean_abs_deviation=float(np.abs(dev).mean()),
        class_histogram=hist,
    )


def triangular_density(l):
    """Density of the l-scaled triangular lattice: 2 / (l^2 sqrt(3))."""
    return 2.0 / (l * l * math.sqrt(3.0))


@dataclass
class EntropyBound:
    finite_n: float
    limit: float


def entropy_upper_bound(n, l, alpha, r):
    """Specific-entropy upper bound from the ball-sampler volume.

    finite_n:  1 + n^2/A - ln(A)/A - (n^2 - 1) ln(pi r^2)/A  with
    A = n^2 l^2 sqrt(3)/2;  limit: the n-free closed form
    1 + (2 - 2 ln(pi r^2)) / (l^2 sqrt(3)).
    """
    room = min(l - 1.0, 1.0 + alpha - l)
    if not (0.0 < r < 0.5 and 2.0 * r < room):
        raise ValueError(f"need 0 < r < 1/2 and 2r < {room}")
    area = n * n * l * l * math.sqrt(3.0) / 2.0
    logball = math.log(math.pi * r * r)
    finite = 1.0 + n * n / area - math.log(area) / area \
        - (n * n - 1) * logball / area
    limit = 1.0 + (2.0 - 2.0 * logball) / (l * l * math.sqrt(3.0))
    assert finite <= limit + 1e-12
    return EntropyBound(finite, limit)


def build_octahedron(x):
    """Octahedron with eleven unit edges and one edge of length x.

    All six vertices sit at distance 1 from both endpoints of the free
    diagonal, so four of them lie on a circle; the stretched edge spans an
    isosceles trapezoid chord pattern (x, 1, 1, 1).  Vertex slots follow the
    package octahedron convention; the (1, 4) diagonal is adjacent to the
    stretched edge and has length sqrt(x + 1).
    """

    def gap(rho):
        return (2.0 * math.asin(min(x / (2.0 * rho), 1.0))
                + 6.0 * math.asin(min(1.0 / (2.0 * rho), 1.0)) - 2.0 * math.pi)

    lo = max(x, 1.0) / 2.0 + 1e-12
    try:
        rho = brentq(gap, lo, 1.2, xtol=1e-15)
    except ValueError as exc:
        raise NonEmbeddableError(f"no octahedron with stretched edge {x}") from exc
    t = math.sqrt(max(1.0 - rho * rho, 0.0))
    th_x = 2.0 * math.asin(x / (2.0 * rho))
    th_1 = 2.0 * math.asin(1.0 / (2.0 * rho))
    angles = [0.0, th_x, th_x + th_1, th_x + 2.0 * th_1]
    ring = [np.array([rho * math.cos(a), rho * math.sin(a), 0.0]) for a in angles]
    q2, q3, q5, q6 = ring
    p1 = np.array([0.0, 0.0, t])
    p4 = np.array([0.0, 0.0, -t])
    # slots: diagonal (0,3) = apexes, equator (1,2,4,5) = ring
    return np.array([p1, q2, q3, p4, q5, q6])


def octa_volume(vertices):
    """Volume via the four tetrahedra sharing the (1, 4) ring diagonal."""
    v = vertices
    total = 0.0
    for tet in ((1, 4, 0, 2), (1, 4, 2, 3), (1, 4, 3, 5), (1, 4, 5, 0)):
        e = v[list(tet[1:])] - v[tet[0]]
        total += abs(np.linalg.det(e)) / 6.0
    return total


def octa_derivative_check(eps):
    """Central finite difference of the octahedron volume in one edge at 1.

    The paper value is 1/(6 sqrt(2)).  The construction is rigid, so the
    volume is well-defined by the twelve edge lengths.
    """
    if not 0.0 < eps <= 1e-3:
        raise ValueError("need 0 < eps <= 1e-3")
    vols = []
    for x in (1.0 + eps, 1.0 - eps):
        verts = build_octahedron(x)
        diag = np.linalg.norm(verts[1] - verts[4])
        if abs(diag - math.sqrt(x + 1.0)) > 1e-9:
            raise NonEmbeddableError("trapezoid diagonal check failed")
        vols.append(octa_volume(verts))
    return (vols[0] - vols[1]) / (2.0 * eps)


def tetra_derivative_check(eps, slot=0):
    """Central finite difference of the tetrahedron volume in one edge at 1.

    The paper value is 1/(12 sqrt(2)); by symmetry every slot agrees.
    """
    if not 0.0 < eps <= 1e-3:
        raise ValueError("need 0 < eps <= 1e-3")
    base = [1.0] * 6
    hi = list(base)
    hi[slot] = 1.0 + eps
    lo = list(base)
    lo[slot] = 1.0 - eps
    return (tetra_volume_heron(*hi) - tetra_volume_heron(*lo)) / (2.0 * eps)


def batch_means(values, n_batches=20):
    """Chain mean with batch-means standard error."""
    v = np.asarray(values, dtype=float)
    if len(v) < n_batches:
        n_batches = max(1, len(v))
    usable = (len(v) // n_batches) * n_batches
    batches = v[:usable].reshape(n_batches, -1).mean(axis=1)
    mean = float(batches.mean())
    se = float(batches.std(ddof=1) / math.sqrt(n_batches)) if n_batches > 1 else 0.0
    return mean, se
