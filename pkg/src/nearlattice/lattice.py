"""Periodic index lattices and their cell tessellations.

Builds the three supported lattices (2D triangular, FCC, HCP) on an n-fold
torus: canonical site representatives in the half-open period cell, the
unit-distance edge set, the Delaunay cells (triangles, regular tetrahedra,
regular octahedra), and a fixed periodic triangulation in which every
octahedron is split into four tetrahedra along a canonically chosen
diagonal.

Conventions
-----------
* Nearest-neighbor distance is normalized to 1.
* Triangular: periods (1, 0) and (1/2, sqrt(3)/2); sites a*t1 + b*t2.
* FCC: primitive vectors s*(1,1,0), s*(0,1,1), s*(1,0,1) with s = sqrt(2)/2
  (conventional cube side sqrt(2), so neighbors sit at distance 1).
* HCP: hexagonal vectors a1=(1,0,0), a2=(1/2, sqrt(3)/2, 0),
  a3=(0, 0, sqrt(8/3)) and a two-site basis, second atom at
  (a1 + a2)/3 + a3/2.
* Sites are ordered lexicographically by integer coordinates (plus basis
  index for HCP); site 0 always sits at the origin.
* Edges, cells and the triangulation store, per vertex, a site id plus an
  integer period offset, so that the torus wrap is explicit:
  vertex position = site_coords[site] + offset @ (n * periods).

Everything is immutable after construction and safe to share across
concurrent samplers.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import OCTA_PAIRS, OCTA_SPLIT, simplex_volume


class LatticeKind(Enum):
    TRIANGULAR2D = "TRIANGULAR2D"
    FCC = "FCC"
    HCP = "HCP"


class CellKind(Enum):
    TRIANGLE = "TRIANGLE"
    TETRA = "TETRA"
    OCTA = "OCTA"


# counterclockwise neighbor directions of the triangular lattice,
# in integer (a, b) coordinates for a + b*tau
TRI_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

FCC_DIRS = (
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (-1, 0, 0), (0, -1, 0), (0, 0, -1),
    (1, -1, 0), (-1, 1, 0), (0, 1, -1),
    (0, -1, 1), (1, 0, -1), (-1, 0, 1),
)

# HCP neighbor deltas as (da, db, dc, new_basis), separately per basis
HCP_DIRS_A = (
    (1, 0, 0, 0), (0, 1, 0, 0), (-1, 1, 0, 0),
    (-1, 0, 0, 0), (0, -1, 0, 0), (1, -1, 0, 0),
    (0, 0, 0, 1), (-1, 0, 0, 1), (0, -1, 0, 1),
    (0, 0, -1, 1), (-1, 0, -1, 1), (0, -1, -1, 1),
)
HCP_DIRS_B = (
    (1, 0, 0, 1), (0, 1, 0, 1), (-1, 1, 0, 1),
    (-1, 0, 0, 1), (0, -1, 0, 1), (1, -1, 0, 1),
    (0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0),
    (0, 0, 1, 0), (1, 0, 1, 0), (0, 1, 1, 0),
)


@dataclass(frozen=True)
class Cell:
    """One Delaunay cell: vertex site ids plus per-vertex period offsets.

    For OCTA cells the splitting diagonal is the vertex-slot pair recorded
    in `diagonal` (always slots (0, 3) after canonical reordering).
    """

    kind: CellKind
    sites: tuple
    offsets: tuple
    diagonal: tuple | None = None


@dataclass(frozen=True, eq=False)
class Lattice:
    kind: LatticeKind
    d: int
    n: int
    periods: np.ndarray            # (d, d) rows = primitive translation vectors
    site_ints: np.ndarray          # (N, d) or (N, d+1) integer coordinates
    site_coords: np.ndarray        # (N, d) canonical positions in U_n
    edge_sites: np.ndarray         # (E, 2) int32
    edge_offsets: np.ndarray       # (E, d) int8, offset of the second endpoint
    nbr_sites: np.ndarray          # (N, z) int32
    nbr_offsets: np.ndarray        # (N, z, d) int8
    cells: tuple                   # tuple[Cell]
    simp_sites: np.ndarray         # (M, d+1) int32
    simp_offsets: np.ndarray       # (M, d+1, d) int8
    simp_cell: np.ndarray          # (M,) int32 owning cell index
    simp_ref: np.ndarray           # (M, d+1, d) reference vertex coordinates
    simp_ref_vol: np.ndarray       # (M,) reference volumes (all positive)
    octa_sites: np.ndarray         # (K, 6) int32
    octa_offsets: np.ndarray       # (K, 6, d) int8
    octa_cell: np.ndarray          # (K,) int32
    cell_edge_sites: np.ndarray    # (Q, 2) int32, per-cell edge list
    cell_edge_offsets: np.ndarray  # (Q, 2, d) int8
    cell_edge_cell: np.ndarray     # (Q,) int32
    site_class: np.ndarray         # (N,) int8 (basis index; 0 for Bravais)

    @property
    def n_sites(self):
        return len(self.site_coords)

    @property
    def torus_periods(self):
        """Rows span the period cell U_n (reference scale)."""
        return self.n * self.periods

    @property
    def volume(self):
        """Volume of the period cell U_n."""
        return self.n ** self.d * abs(np.linalg.det(self.periods))

    def cell_vertices(self, cell):
        """Reference coordinates of a cell's vertices."""
        off = np.asarray(cell.offsets, dtype=float)
        return self.site_coords[list(cell.sites)] + off @ self.torus_periods


def cells_of(lattice):
    """The Delaunay cells together with per-site cell counts by kind."""
    counts = {}
    for c in lattice.cells:
        counts[c.kind] = counts.get(c.kind, 0) + 1
    per_site = {k: v / lattice.n_sites for k, v in counts.items()}
    return lattice.cells, per_site


def neighbor_shell(lattice, i):
    """Site ids at torus distance exactly 1 from site i.

    For TRIANGULAR2D the six ids come in counterclockwise order starting at
    direction (1, 0).  On small tori ids may repeat; the distinct period
    offsets live in `lattice.nbr_offsets[i]`.
    """
    if not 0 <= i < lattice.n_sites:
        raise IndexError(f"invalid site id {i}")
    return [int(s) for s in lattice.nbr_sites[i]]


def build_lattice(kind, n):
    """Construct the n-periodic lattice torus with cells and triangulation.

    Deterministic: identical inputs produce identical array contents and
    orderings.
    """
    if not isinstance(kind, LatticeKind):
        raise ValueError(f"unknown lattice kind: {kind!r}")
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ValueError(f"period count must be a positive integer, got {n!r}")
    n = int(n)
    if kind is LatticeKind.TRIANGULAR2D:
        lat = _build_triangular(n)
    elif kind is LatticeKind.FCC:
        lat = _build_fcc(n)
    else:
        lat = _build_hcp(n)
    _validate(lat)
    return lat


# ---------------------------------------------------------------------------
# construction helpers

def _site_positions(ints, periods, basis=None):
    pos = ints[:, : periods.shape[0]].astype(float) @ periods
    if basis is not None:
        pos = pos + basis[ints[:, -1]]
    return pos


def _canonical_edges(n, ints, index_of, dirs, d, basis_change=None):
    """Edge and neighbor tables from integer direction lists.

    `index_of` maps an integer coordinate tuple to a site id.  Returns
    (edge_sites, edge_offsets, nbr_sites, nbr_offsets).
    """
    N = len(ints)
    z = len(dirs[0]) if basis_change else len(dirs)
    nbr_sites = np.empty((N, z), dtype=np.int32)
    nbr_offsets = np.empty((N, z, d), dtype=np.int8)
    edges = []
    for i in range(N):
        if basis_change:
            dlist = dirs[ints[i, -1]]
        else:
            dlist = dirs
        for k, dv in enumerate(dlist):
            tgt = ints[i, :d] + np.array(dv[:d])
            off = tgt // n
            rep = tgt - off * n
            key = tuple(rep) + ((dv[d],) if basis_change else ())
            j = index_of[key]
            nbr_sites[i, k] = j
            nbr_offsets[i, k] = off
            if j > i:
                edges.append((i, j, tuple(off)))
            elif j == i:
                t = tuple(off)
                if t > tuple(-o for o in t):
                    edges.append((i, j, t))
    edge_sites = np.array([(a, b) for a, b, _ in edges], dtype=np.int32)
    edge_offsets = np.array([o for _, _, o in edges], dtype=np.int8)
    return edge_sites, edge_offsets, nbr_sites, nbr_offsets


def _canonicalize(n, coords_ints, d):
    """Split absolute integer coordinates into (representative, offset).

    Only the first d columns are periodic; a trailing basis column (HCP)
    passes through unchanged.
    """
    arr = np.asarray(coords_ints)
    off = np.zeros_like(arr)
    off[:, :d] = arr[:, :d] // n
    rep = arr - off * n
    return rep, off[:, :d]


def _octa_slots(vert_coords):
    """Canonical slot order for six octahedron vertices.

    Input pairs ((0,1),(2,3),(4,5)) are antipodal.  The splitting diagonal
    is the lexicographically smallest pair in canonical coordinates; it is
    placed in slots (0, 3), the equator fills (1, 2, 4, 5) respecting the
    antipodal layout of OCTA_PAIRS.
    """
    pairs = [(0, 1), (2, 3), (4, 5)]
    keys = [min(tuple(vert_coords[a]), tuple(vert_coords[b])) for a, b in pairs]
    diag = pairs[min(range(3), key=lambda i: keys[i])]
    a, b = diag
    p1, p4 = (a, b) if tuple(vert_coords[a]) <= tuple(vert_coords[b]) else (b, a)
    rest = [p for pr in pairs if pr != diag for p in pr]
    mate = {}
    for x, y in pairs:
        mate[x], mate[y] = y, x
    p2 = min(rest, key=lambda p: tuple(vert_coords[p]))
    p5 = mate[p2]
    p3 = min((p for p in rest if p not in (p2, p5)), key=lambda p: tuple(vert_coords[p]))
    p6 = mate[p3]
    return [p1, p2, p3, p4, p5, p6]


def _assemble(kind, d, n, periods, ints, coords, edges_pack, cell_specs, site_class):
    """Shared tail of the builders: cells, octa split, triangulation arrays."""
    edge_sites, edge_offsets, nbr_sites, nbr_offsets = edges_pack
    torus = n * periods

    def vertex_pos(sites, offs):
        return coords[list(sites)] + np.asarray(offs, dtype=float) @ torus

    edge_set = set()
    for (a, b), off in zip(edge_sites, edge_offsets):
        edge_set.add(_edge_key(int(a), int(b), tuple(int(o) for o in off)))

    cells = []
    simp_sites, simp_offsets, simp_cell, simp_ref = [], [], [], []
    octa_sites, octa_offsets, octa_cell = [], [], []
    ce_sites, ce_offsets, ce_cell = [], [], []

    for ckind, abs_ints, site_lookup in cell_specs:
        rep, off = _canonicalize(n, abs_ints, d)
        sites = tuple(site_lookup(tuple(r)) for r in rep)
        offsets = tuple(tuple(int(x) for x in o) for o in off)
        ci = len(cells)
        if ckind is CellKind.OCTA:
            pos = vertex_pos(sites, offsets)
            order = _octa_slots(pos)
            sites = tuple(sites[k] for k in order)
            offsets = tuple(offsets[k] for k in order)
            pos = pos[order]
            cell = Cell(CellKind.OCTA, sites, offsets, diagonal=(0, 3))
            octa_sites.append(sites)
            octa_offsets.append(offsets)
            octa_cell.append(ci)
            for tet in OCTA_SPLIT:
                _push_simplex(
                    [sites[t] for t in tet], [offsets[t] for t in tet],
                    pos[list(tet)], ci, simp_sites, simp_offsets, simp_cell, simp_ref,
                )
            pair_slots = OCTA_PAIRS
            edge_pairs = [
                (i, j) for i in range(6) for j in range(i + 1, 6)
                if (i, j) not in pair_slots
            ]
        else:
            pos = vertex_pos(sites, offsets)
            cell = Cell(ckind, sites, offsets)
            _push_simplex(
                list(sites), list(offsets), pos, ci,
                simp_sites, simp_offsets, simp_cell, simp_ref,
            )
            m = len(sites)
            edge_pairs = [(i, j) for i in range(m) for j in range(i + 1, m)]
        cells.append(cell)
        for i, j in edge_pairs:
            ce_sites.append((sites[i], sites[j]))
            ce_offsets.append((offsets[i], offsets[j]))
            ce_cell.append(ci)
            key = _edge_key(sites[i], sites[j], _off_diff(offsets[j], offsets[i]))
            if key not in edge_set:
                raise AssertionError(f"cell edge {key} missing from lattice edge set")

    simp_ref = np.array(simp_ref, dtype=float)
    simp_ref_vol = simplex_volume(simp_ref)
    assert np.all(simp_ref_vol > 0)

    return Lattice(
        kind=kind, d=d, n=n, periods=periods,
        site_ints=ints, site_coords=coords,
        edge_sites=edge_sites, edge_offsets=edge_offsets,
        nbr_sites=nbr_sites, nbr_offsets=nbr_offsets,
        cells=tuple(cells),
        simp_sites=np.array(simp_sites, dtype=np.int32),
        simp_offsets=np.array(simp_offsets, dtype=np.int8),
        simp_cell=np.array(simp_cell, dtype=np.int32),
        simp_ref=simp_ref,
        simp_ref_vol=simp_ref_vol,
        octa_sites=np.array(octa_sites, dtype=np.int32).reshape(-1, 6),
        octa_offsets=np.array(octa_offsets, dtype=np.int8).reshape(-1, 6, d),
        octa_cell=np.array(octa_cell, dtype=np.int32),
        cell_edge_sites=np.array(ce_sites, dtype=np.int32),
        cell_edge_offsets=np.array(ce_offsets, dtype=np.int8),
        cell_edge_cell=np.array(ce_cell, dtype=np.int32),
        site_class=site_class,
    )


def _push_simplex(sites, offsets, pos, ci, s_sites, s_offsets, s_cell, s_ref):
    # store with positive reference orientation
    if simplex_volume(pos) < 0:
        sites = list(sites)
        offsets = list(offsets)
        sites[-1], sites[-2] = sites[-2], sites[-1]
        offsets[-1], offsets[-2] = offsets[-2], offsets[-1]
        pos = pos.copy()
        pos[[-2, -1]] = pos[[-1, -2]]
    s_sites.append(tuple(sites))
    s_offsets.append(tuple(offsets))
    s_cell.append(ci)
    s_ref.append(pos)


def _edge_key(a, b, off):
    """Order-free key of an edge given as (site_a, site_b, offset_of_b)."""
    neg = tuple(-o for o in off)
    k1 = (a, b, off)
    k2 = (b, a, neg)
    return min(k1, k2)


def _off_diff(off_b, off_a):
    return tuple(int(x) - int(y) for x, y in zip(off_b, off_a))


def _build_triangular(n):
    periods = np.array([[1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])
    ints = np.array([(a, b) for a in range(n) for b in range(n)], dtype=np.int64)
    index_of = {tuple(v): i for i, v in enumerate(ints)}
    coords = _site_positions(ints, periods)
    edges_pack = _canonical_edges(n, ints, index_of, TRI_DIRS, 2)

    cell_specs = []
    lookup = lambda key: index_of[key]
    for a in range(n):
        for b in range(n):
            base = np.array([a, b])
            up = np.array([base, base + (1, 0), base + (0, 1)])
            down = np.array([base + (1, 0), base + (1, 1), base + (0, 1)])
            cell_specs.append((CellKind.TRIANGLE, up, lookup))
            cell_specs.append((CellKind.TRIANGLE, down, lookup))

    site_class = np.zeros(len(ints), dtype=np.int8)
    return _assemble(LatticeKind.TRIANGULAR2D, 2, n, periods, ints, coords,
                     edges_pack, cell_specs, site_class)


def _build_fcc(n):
    s = np.sqrt(2.0) / 2.0
    periods = np.array([[s, s, 0.0], [0.0, s, s], [s, 0.0, s]])
    ints = np.array(
        [(a, b, c) for a in range(n) for b in range(n) for c in range(n)],
        dtype=np.int64,
    )
    index_of = {tuple(v): i for i, v in enumerate(ints)}
    coords = _site_positions(ints, periods)
    edges_pack = _canonical_edges(n, ints, index_of, FCC_DIRS, 3)

    e1, e2, e3 = np.eye(3, dtype=np.int64)
    cell_specs = []
    lookup = lambda key: index_of[key]
    for v in ints:
        t1 = np.array([v, v + e1, v + e2, v + e3])
        t2 = np.array([v + e1 + e2, v + e1 + e3, v + e2 + e3, v + e1 + e2 + e3])
        # antipodal pairs listed adjacently: (e1, e2+e3), (e2, e1+e3), (e3, e1+e2)
        oc = np.array([v + e1, v + e2 + e3, v + e2, v + e1 + e3, v + e3, v + e1 + e2])
        cell_specs.append((CellKind.TETRA, t1, lookup))
        cell_specs.append((CellKind.TETRA, t2, lookup))
        cell_specs.append((CellKind.OCTA, oc, lookup))

    site_class = np.zeros(len(ints), dtype=np.int8)
    return _assemble(LatticeKind.FCC, 3, n, periods, ints, coords,
                     edges_pack, cell_specs, site_class)


def _build_hcp(n):
    c = np.sqrt(8.0 / 3.0)
    periods = np.array([[1.0, 0.0, 0.0], [0.5, np.sqrt(3.0) / 2.0, 0.0], [0.0, 0.0, c]])
    basis = np.array([[0.0, 0.0, 0.0], [0.5, np.sqrt(3.0) / 6.0, c / 2.0]])
    ints = np.array(
        [(a, b, cc, s) for a in range(n) for b in range(n) for cc in range(n)
         for s in range(2)],
        dtype=np.int64,
    )
    index_of = {tuple(v): i for i, v in enumerate(ints)}
    coords = _site_positions(ints, periods, basis)
    edges_pack = _canonical_edges(n, ints, index_of, (HCP_DIRS_A, HCP_DIRS_B), 3,
                                  basis_change=True)

    def A(u, v, w):
        return np.array([u, v, w, 0], dtype=np.int64)

    def B(u, v, w):
        return np.array([u, v, w, 1], dtype=np.int64)

    cell_specs = []
    lookup = lambda key: index_of[key]
    for u in range(n):
        for v in range(n):
            for w in range(n):
                t1 = np.array([A(u, v, w), A(u + 1, v, w), A(u, v + 1, w), B(u, v, w)])
                t2 = np.array([A(u + 1, v + 1, w), B(u + 1, v, w), B(u, v + 1, w),
                               B(u + 1, v + 1, w)])
                o1 = np.array([A(u + 1, v, w), B(u, v + 1, w),
                               A(u, v + 1, w), B(u + 1, v, w),
                               A(u + 1, v + 1, w), B(u, v, w)])
                t3 = np.array([B(u + 1, v, w), B(u, v + 1, w), B(u + 1, v + 1, w),
                               A(u + 1, v + 1, w + 1)])
                t4 = np.array([A(u, v, w + 1), A(u + 1, v, w + 1), A(u, v + 1, w + 1),
                               B(u, v, w)])
                o2 = np.array([B(u, v, w), A(u + 1, v + 1, w + 1),
                               B(u + 1, v, w), A(u, v + 1, w + 1),
                               B(u, v + 1, w), A(u + 1, v, w + 1)])
                for ck, spec in ((CellKind.TETRA, t1), (CellKind.TETRA, t2),
                                 (CellKind.OCTA, o1), (CellKind.TETRA, t3),
                                 (CellKind.TETRA, t4), (CellKind.OCTA, o2)):
                    cell_specs.append((ck, spec, lookup))

    site_class = ints[:, 3].astype(np.int8)
    return _assemble(LatticeKind.HCP, 3, n, periods, ints, coords,
                     edges_pack, cell_specs, site_class)


def _validate(lat):
    torus = lat.torus_periods
    # every edge at canonical-representative torus distance exactly 1
    vec = (lat.site_coords[lat.edge_sites[:, 1]]
           + lat.edge_offsets.astype(float) @ torus
           - lat.site_coords[lat.edge_sites[:, 0]])
    lens = np.linalg.norm(vec, axis=1)
    assert np.all(np.abs(lens - 1.0) < 1e-12), "edge length normalization broken"
    # cells tile U_n
    total = float(np.sum(lat.simp_ref_vol))
    assert abs(total - lat.volume) <= 1e-9 * lat.volume, "cells do not tile U_n"
    # all cell edges unit length; OCTA carries its split diagonal
    ce = (lat.site_coords[lat.cell_edge_sites[:, 1]]
          + lat.cell_edge_offsets[:, 1].astype(float) @ torus
          - lat.site_coords[lat.cell_edge_sites[:, 0]]
          - lat.cell_edge_offsets[:, 0].astype(float) @ torus)
    assert np.all(np.abs(np.linalg.norm(ce, axis=1) - 1.0) < 1e-12)
    for cell in lat.cells:
        if cell.kind is CellKind.OCTA:
            assert cell.diagonal == (0, 3)
