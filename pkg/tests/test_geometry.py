import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from nearlattice.errors import DegenerateFaceError, DegenerateReferenceError, NonEmbeddableError
from nearlattice.geometry import (NeighborGrid, TorusMetric, annulus_neighbors,
                                  cell_jacobian, convex_image_check,
                                  dist_to_rotations, simplex_volume,
                                  tetra_volume_heron)

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)

# regular octahedron, side 1, in the package slot convention
# (antipodal pairs (0,3), (1,4), (2,5))
REG_OCTA = np.array([
    (SQRT2 / 2, 0, 0), (0, SQRT2 / 2, 0), (0, 0, SQRT2 / 2),
    (-SQRT2 / 2, 0, 0), (0, -SQRT2 / 2, 0), (0, 0, -SQRT2 / 2),
])


def heron_edges_from_coords(p):
    """Edge tuple (u, v, w, U, V, W) for tetra_volume_heron from 4 vertices.

    Face (p0, p1, p2) supplies (U, V, W) = (|p1p2|, |p2p0|, |p0p1|); the
    respectively opposite edges all meet at p3.
    """
    U = np.linalg.norm(p[1] - p[2])
    V = np.linalg.norm(p[2] - p[0])
    W = np.linalg.norm(p[0] - p[1])
    u = np.linalg.norm(p[0] - p[3])
    v = np.linalg.norm(p[1] - p[3])
    w = np.linalg.norm(p[2] - p[3])
    return u, v, w, U, V, W


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


class TestHeron:
    def test_regular_tetrahedron(self):
        assert tetra_volume_heron(1, 1, 1, 1, 1, 1) == pytest.approx(
            SQRT2 / 12, abs=1e-14)

    def test_unit_square_with_diagonals_is_flat(self):
        # vertices of a unit square: both diagonals form the (w, W) pair
        vol = tetra_volume_heron(1, 1, SQRT2, 1, 1, SQRT2)
        assert vol == pytest.approx(0.0, abs=1e-9)

    def test_flat_from_coordinates(self):
        square = np.array([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], float)
        vol = tetra_volume_heron(*heron_edges_from_coords(square))
        assert vol == pytest.approx(0.0, abs=1e-9)

    def test_matches_determinant_on_random_tetrahedra(self):
        # oracle: embed coordinates, compare with the determinant volume
        rng = np.random.default_rng(42)
        base = np.array([(0, 0, 0), (1.2, 0, 0), (0.6, 1.2 * SQRT3 / 2, 0),
                         (0.6, 1.2 * SQRT3 / 6, 1.2 * math.sqrt(2 / 3))])
        for _ in range(2000):
            p = base + rng.uniform(-0.1, 0.1, size=(4, 3))
            vol = tetra_volume_heron(*heron_edges_from_coords(p))
            ref = abs(simplex_volume(p))
            assert abs(vol - ref) <= 1e-10 * max(vol, ref)

    def test_vectorized_input(self):
        ones = np.ones(16)
        out = tetra_volume_heron(ones, ones, ones, ones, ones, ones)
        assert out.shape == (16,)
        assert np.allclose(out, SQRT2 / 12)

    def test_non_embeddable_raises(self):
        with pytest.raises(NonEmbeddableError):
            tetra_volume_heron(1, 1, 1, 1, 1, 2.9)

    def test_taylor_coefficient_every_edge(self):
        # central finite difference at the regular tetrahedron
        eps = 1e-4
        for slot in range(6):
            hi = [1.0] * 6
            lo = [1.0] * 6
            hi[slot] += eps
            lo[slot] -= eps
            deriv = (tetra_volume_heron(*hi) - tetra_volume_heron(*lo)) / (2 * eps)
            assert deriv == pytest.approx(1.0 / (12 * SQRT2), abs=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=10 ** 6))
    def test_heron_determinant_equivalence_property(self, seed):
        rng = np.random.default_rng(seed)
        base = np.array([(0, 0, 0), (1.2, 0, 0), (0.6, 1.2 * SQRT3 / 2, 0),
                         (0.6, 1.2 * SQRT3 / 6, 1.2 * math.sqrt(2 / 3))])
        p = base + rng.uniform(-0.12, 0.12, size=(4, 3))
        lens = [np.linalg.norm(p[i] - p[j]) for i in range(4) for j in range(i + 1, 4)]
        assert all(1.0 <= l <= 1.5 for l in lens)
        vol = tetra_volume_heron(*heron_edges_from_coords(p))
        ref = abs(simplex_volume(p))
        assert abs(vol - ref) <= 1e-10 * max(vol, ref)


class TestSimplexVolume:
    def test_unit_right_tetrahedron(self):
        p = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], float)
        assert simplex_volume(p) == pytest.approx(1.0 / 6)

    def test_swap_negates(self):
        rng = np.random.default_rng(0)
        p = rng.normal(size=(4, 3))
        q = p[[0, 2, 1, 3]]
        assert simplex_volume(q) == pytest.approx(-simplex_volume(p))

    def test_regular_triangle(self):
        p = np.array([(0, 0), (1, 0), (0.5, SQRT3 / 2)])
        assert simplex_volume(p) == pytest.approx(SQRT3 / 4)


class TestCellJacobian:
    def test_scaling(self):
        ref = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], float)
        A = cell_jacobian(ref, 1.07 * ref)
        assert np.allclose(A, 1.07 * np.eye(3), atol=1e-12)

    def test_rotation(self):
        rng = np.random.default_rng(3)
        R = random_rotation(rng)
        ref = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], float)
        A = cell_jacobian(ref, ref @ R.T)
        assert np.allclose(A, R, atol=1e-12)

    def test_recovers_shear(self):
        S = np.array([[1.0, 0.3, 0.0], [0.0, 1.0, -0.2], [0.1, 0.0, 1.0]])
        rng = np.random.default_rng(4)
        ref = rng.normal(size=(4, 3))
        img = ref @ S.T
        assert np.allclose(cell_jacobian(ref, img), S, atol=1e-10)

    def test_degenerate_reference(self):
        flat = np.array([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)], float)
        with pytest.raises(DegenerateReferenceError):
            cell_jacobian(flat, flat)


def brute_force_dist_to_rotations(A, n_coarse=4096, seed=0):
    """Independent oracle: coarse rotation scan plus local refinement."""
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(n_coarse, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    R = np.empty((n_coarse, 3, 3))
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - w * z)
    R[:, 0, 2] = 2 * (x * z + w * y)
    R[:, 1, 0] = 2 * (x * y + w * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - w * x)
    R[:, 2, 0] = 2 * (x * z - w * y)
    R[:, 2, 1] = 2 * (y * z + w * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    d2 = ((A[None, :, :] - R) ** 2).sum(axis=(1, 2))
    R0 = R[int(np.argmin(d2))]

    def rodrigues(v):
        th = np.linalg.norm(v)
        if th < 1e-16:
            return np.eye(3)
        k = v / th
        K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        return np.eye(3) + math.sin(th) * K + (1 - math.cos(th)) * (K @ K)

    def f(v):
        return np.linalg.norm(A - rodrigues(v) @ R0)

    res = minimize(f, np.zeros(3), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000})
    return float(res.fun)


class TestDistToRotations:
    def test_identity(self):
        assert dist_to_rotations(np.eye(3)) == 0.0

    def test_scaled_identity(self):
        for l in (1.03, 1.12, 0.5):
            assert dist_to_rotations(l * np.eye(3)) == pytest.approx(
                SQRT3 * abs(l - 1), abs=1e-12)

    def test_reflection(self):
        A = np.diag([1.0, 1.0, -1.0])
        assert dist_to_rotations(A) == pytest.approx(2.0, abs=1e-12)
        assert brute_force_dist_to_rotations(A) == pytest.approx(2.0, abs=1e-4)

    def test_rotation_invariance(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(3, 3))
        d = dist_to_rotations(A)
        for _ in range(5):
            R = random_rotation(rng)
            assert dist_to_rotations(R @ A) == pytest.approx(d, abs=1e-10)
            assert dist_to_rotations(A @ R) == pytest.approx(d, abs=1e-10)

    def test_zero_iff_rotation(self):
        rng = np.random.default_rng(8)
        R = random_rotation(rng)
        assert dist_to_rotations(R) <= 1e-10
        A = R + 1e-3 * rng.normal(size=(3, 3))
        if dist_to_rotations(A) <= 1e-10:
            assert np.allclose(A.T @ A, np.eye(3), atol=1e-10)
            assert np.linalg.det(A) == pytest.approx(1.0, abs=1e-10)

    def test_matches_brute_force_sample(self):
        rng = np.random.default_rng(9)
        for k in range(25):
            A = rng.normal(size=(3, 3))
            assert dist_to_rotations(A) == pytest.approx(
                brute_force_dist_to_rotations(A, seed=k), abs=1e-4)

    def test_infimum_property(self):
        rng = np.random.default_rng(10)
        A = rng.normal(size=(3, 3))
        d = dist_to_rotations(A)
        for _ in range(200):
            R = random_rotation(rng)
            assert d <= np.linalg.norm(A - R) + 1e-12


class TestAnnulus:
    def test_scaled_triangular_lattice_six(self):
        from nearlattice.config import scaled_lattice_config
        from nearlattice.lattice import LatticeKind, build_lattice
        lat = build_lattice(LatticeKind.TRIANGULAR2D, 4)
        c = scaled_lattice_config(lat, 1.08, 0.15)
        ps = c.point_set()
        for i in (0, 5, 11):
            got = annulus_neighbors(ps.points, ps.metric, ps.points[i], 1.0, 1.15)
            assert len(got) == 6

    def test_strict_upper_bound(self):
        from nearlattice.config import scaled_lattice_config
        from nearlattice.lattice import LatticeKind, build_lattice
        lat = build_lattice(LatticeKind.TRIANGULAR2D, 4)
        c = scaled_lattice_config(lat, 1.08, 0.15)
        ps = c.point_set()
        got = annulus_neighbors(ps.points, ps.metric, ps.points[0], 1.0,
                                1.08 - 1e-9)
        assert len(got) == 0

    def test_scaled_fcc_twelve(self):
        from nearlattice.config import scaled_lattice_config
        from nearlattice.lattice import LatticeKind, build_lattice
        lat = build_lattice(LatticeKind.FCC, 3)
        c = scaled_lattice_config(lat, 1.05, 0.10)
        metric = TorusMetric(c.image_periods)
        pts = metric.wrap(c.positions)
        got = annulus_neighbors(pts, metric, pts[4], 1.0, 1.10)
        assert len(got) == 12

    def test_agrees_with_naive_scan(self):
        rng = np.random.default_rng(11)
        periods = np.array([[7.3, 0.0], [3.65, 7.3 * SQRT3 / 2]])
        metric = TorusMetric(periods)
        pts = metric.wrap(rng.uniform(0, 7, size=(1000, 2)) @ np.eye(2))
        grid = NeighborGrid(pts, metric, 1.4)
        for i in range(0, 1000, 97):
            got = set(grid.query(pts[i], 0.9, 1.4).tolist())
            dist = metric.distance(pts[i], pts)
            naive = set(np.nonzero((dist > 0.9 + 1e-12)
                                   & (dist < 1.4 - 1e-12))[0].tolist())
            naive.discard(i)
            assert got == naive

    def test_pairs_agree_with_naive(self):
        rng = np.random.default_rng(12)
        periods = np.array([[6.0, 0.0], [0.0, 6.0]])
        metric = TorusMetric(periods)
        pts = metric.wrap(rng.uniform(0, 6, size=(300, 2)))
        grid = NeighborGrid(pts, metric, 1.2)
        pairs, dist = grid.pairs(0.8, 1.2)
        got = {tuple(p) for p in pairs.tolist()}
        naive = set()
        for i in range(300):
            d = metric.distance(pts[i], pts)
            for j in np.nonzero((d > 0.8 + 1e-12) & (d < 1.2 - 1e-12))[0]:
                if i < j:
                    naive.add((i, int(j)))
        assert got == naive


class TestConvexImage:
    def test_regular_true(self):
        assert convex_image_check(REG_OCTA)

    def test_reflected_vertex_false(self):
        # reflect vertex 0 through the plane of its opposite face (1,2,5)...
        # any face not containing vertex 0; use the centroid plane trick
        p = REG_OCTA.copy()
        face = p[[3, 1, 2]]
        n = np.cross(face[1] - face[0], face[2] - face[0])
        n /= np.linalg.norm(n)
        d = (p[0] - face[0]) @ n
        p[0] = p[0] - 2 * d * n
        assert not convex_image_check(p)

    def test_rotation_and_scaling_invariant(self):
        rng = np.random.default_rng(13)
        for l in (1.1, 1.5, 1.9):
            R = random_rotation(rng)
            assert convex_image_check(l * REG_OCTA @ R.T)

    def test_degenerate_face_raises(self):
        p = REG_OCTA.copy()
        # collapse face (0,1,2) onto a line
        p[2] = 0.5 * (p[0] + p[1])
        with pytest.raises(DegenerateFaceError):
            convex_image_check(p)
