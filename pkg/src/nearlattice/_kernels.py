"""Compiled hot paths for the Metropolis sampler and the overlap scans.

Everything here is numba-njit with a self-contained splitmix64 PRNG so a
chain's trajectory is a pure function of its seed.  Positions, incidence
tables and real-valued period offsets are passed as flat numpy arrays; the
tables are built in sampler.py.

Condition codes: 1 = edge-length window, 2 = injectivity, 3 = orientation,
4 = octahedron convexity.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-8
GUARD = 1e-12

# octahedron face slots and, per face, the three opposite vertex slots
OCTA_FACE_ARR = np.array(
    [[0, 1, 2], [0, 2, 4], [0, 4, 5], [0, 5, 1],
     [3, 1, 2], [3, 2, 4], [3, 4, 5], [3, 5, 1]], dtype=np.int64)
OCTA_OTHER_ARR = np.array(
    [[3, 4, 5], [3, 1, 5], [3, 1, 2], [3, 2, 4],
     [0, 4, 5], [0, 1, 5], [0, 1, 2], [0, 2, 4]], dtype=np.int64)

TET_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]], dtype=np.int64)
TET_FACES = np.array([[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]], dtype=np.int64)


# ---------------------------------------------------------------------------
# PRNG: splitmix64, state carried in a (1,) uint64 array

@njit(cache=True)
def rng_next(state):
    state[0] += np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def rng_uniform(state):
    return float(rng_next(state) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def draw_in_ball(state, delta, out):
    d = out.shape[0]
    while True:
        s = 0.0
        for k in range(d):
            out[k] = (2.0 * rng_uniform(state) - 1.0) * delta
            s += out[k] * out[k]
        if s <= delta * delta:
            return


# ---------------------------------------------------------------------------
# separating-axis overlap tests (True = interiors intersect beyond guard)

@njit(cache=True)
def _axis_separates_2d(A, B, nx, ny, guard):
    n2 = nx * nx + ny * ny
    if n2 < 1e-28:
        return False
    amin = amax = A[0, 0] * nx + A[0, 1] * ny
    for k in range(1, A.shape[0]):
        p = A[k, 0] * nx + A[k, 1] * ny
        amin = min(amin, p)
        amax = max(amax, p)
    bmin = bmax = B[0, 0] * nx + B[0, 1] * ny
    for k in range(1, B.shape[0]):
        p = B[k, 0] * nx + B[k, 1] * ny
        bmin = min(bmin, p)
        bmax = max(bmax, p)
    overlap = min(amax, bmax) - max(amin, bmin)
    return overlap <= guard * math.sqrt(n2)


@njit(cache=True)
def tri_overlap(A, B, guard):
    for src in range(2):
        P = A if src == 0 else B
        for e in range(3):
            x0 = P[e, 0]
            y0 = P[e, 1]
            x1 = P[(e + 1) % 3, 0]
            y1 = P[(e + 1) % 3, 1]
            if _axis_separates_2d(A, B, y0 - y1, x1 - x0, guard):
                return False
    return True


@njit(cache=True)
def _axis_separates_3d(A, B, nx, ny, nz, guard):
    n2 = nx * nx + ny * ny + nz * nz
    if n2 < 1e-28:
        return False
    amin = amax = A[0, 0] * nx + A[0, 1] * ny + A[0, 2] * nz
    for k in range(1, 4):
        p = A[k, 0] * nx + A[k, 1] * ny + A[k, 2] * nz
        amin = min(amin, p)
        amax = max(amax, p)
    bmin = bmax = B[0, 0] * nx + B[0, 1] * ny + B[0, 2] * nz
    for k in range(1, 4):
        p = B[k, 0] * nx + B[k, 1] * ny + B[k, 2] * nz
        bmin = min(bmin, p)
        bmax = max(bmax, p)
    overlap = min(amax, bmax) - max(amin, bmin)
    return overlap <= guard * math.sqrt(n2)


@njit(cache=True)
def _tet_axis_separates(A, B, ax, guard):
    """Axis ids: 0-3 faces of A, 4-7 faces of B, 8-43 edge-pair crosses."""
    if ax < 8:
        P = A if ax < 4 else B
        f = ax if ax < 4 else ax - 4
        i = TET_FACES[f, 0]
        j = TET_FACES[f, 1]
        k = TET_FACES[f, 2]
        ux = P[j, 0] - P[i, 0]
        uy = P[j, 1] - P[i, 1]
        uz = P[j, 2] - P[i, 2]
        vx = P[k, 0] - P[i, 0]
        vy = P[k, 1] - P[i, 1]
        vz = P[k, 2] - P[i, 2]
    else:
        ea = (ax - 8) // 6
        eb = (ax - 8) % 6
        a0 = TET_EDGES[ea, 0]
        a1 = TET_EDGES[ea, 1]
        ux = A[a1, 0] - A[a0, 0]
        uy = A[a1, 1] - A[a0, 1]
        uz = A[a1, 2] - A[a0, 2]
        b0 = TET_EDGES[eb, 0]
        b1 = TET_EDGES[eb, 1]
        vx = B[b1, 0] - B[b0, 0]
        vy = B[b1, 1] - B[b0, 1]
        vz = B[b1, 2] - B[b0, 2]
    return _axis_separates_3d(A, B, uy * vz - uz * vy, uz * vx - ux * vz,
                              ux * vy - uy * vx, guard)


@njit(cache=True)
def tet_sep_axis(A, B, guard, hint):
    """Separating axis id, or -1 when interiors intersect.

    The cached hint axis is tried first; pairs re-tested across sweeps
    almost always separate on the same axis.
    """
    if 0 <= hint < 44:
        if _tet_axis_separates(A, B, hint, guard):
            return hint
    for ax in range(44):
        if ax == hint:
            continue
        if _tet_axis_separates(A, B, ax, guard):
            return ax
    return -1


@njit(cache=True)
def tet_overlap(A, B, guard):
    return tet_sep_axis(A, B, guard, -1) < 0


# ---------------------------------------------------------------------------
# periodic pair overlap: enumerate candidate period shifts of B near A

@njit(cache=True)
def pair_overlap_2d(vA, cA, rA, kA, vB, cB, rB, kB,
                    torus, inv_torus, heights, same, guard, Bbuf):
    reach = rA + rB + 1e-9
    fx = (cA[0] - cB[0]) * inv_torus[0, 0] + (cA[1] - cB[1]) * inv_torus[1, 0]
    fy = (cA[0] - cB[0]) * inv_torus[0, 1] + (cA[1] - cB[1]) * inv_torus[1, 1]
    bx = round(fx)
    by = round(fy)
    # |diff - k@torus| >= |f_m - k_m| * heights[m]: sharp per-axis prefilter
    mx = reach / heights[0]
    my = reach / heights[1]
    if abs(fx - bx) > mx or abs(fy - by) > my:
        return False
    # widen on degenerate tori whose period heights are below the pair reach
    wx = 1 + int(mx)
    wy = 1 + int(my)
    for sx in range(-wx, wx + 1):
        if abs(fx - bx - sx) > mx:
            continue
        for sy in range(-wy, wy + 1):
            if abs(fy - by - sy) > my:
                continue
            kx = bx + sx
            ky = by + sy
            if same and kx == 0.0 and ky == 0.0:
                continue
            tx = kx * torus[0, 0] + ky * torus[1, 0]
            ty = kx * torus[0, 1] + ky * torus[1, 1]
            dx = cA[0] - cB[0] - tx
            dy = cA[1] - cB[1] - ty
            if dx * dx + dy * dy > reach * reach:
                continue
            code = np.int64(round(kx)) * np.int64(32) + np.int64(round(ky))
            shared = 0
            for a in range(3):
                for b in range(3):
                    if kA[a] == kB[b] + code:
                        shared += 1
                        break
            if shared >= 2:
                continue
            for v in range(3):
                Bbuf[v, 0] = vB[v, 0] + tx
                Bbuf[v, 1] = vB[v, 1] + ty
            if tri_overlap(vA, Bbuf, guard):
                return True
    return False


@njit(cache=True)
def pair_overlap_3d(vA, cA, rA, kA, vB, cB, rB, kB,
                    torus, inv_torus, heights, same, guard, Bbuf, hint):
    """(interiors intersect?, updated separating-axis hint)."""
    reach = rA + rB + 1e-9
    d0 = cA[0] - cB[0]
    d1 = cA[1] - cB[1]
    d2 = cA[2] - cB[2]
    fx = d0 * inv_torus[0, 0] + d1 * inv_torus[1, 0] + d2 * inv_torus[2, 0]
    fy = d0 * inv_torus[0, 1] + d1 * inv_torus[1, 1] + d2 * inv_torus[2, 1]
    fz = d0 * inv_torus[0, 2] + d1 * inv_torus[1, 2] + d2 * inv_torus[2, 2]
    bx = round(fx)
    by = round(fy)
    bz = round(fz)
    mx = reach / heights[0]
    my = reach / heights[1]
    mz = reach / heights[2]
    if abs(fx - bx) > mx or abs(fy - by) > my or abs(fz - bz) > mz:
        return False, hint
    wx = 1 + int(mx)
    wy = 1 + int(my)
    wz = 1 + int(mz)
    for sx in range(-wx, wx + 1):
        if abs(fx - bx - sx) > mx:
            continue
        for sy in range(-wy, wy + 1):
            if abs(fy - by - sy) > my:
                continue
            for sz in range(-wz, wz + 1):
                if abs(fz - bz - sz) > mz:
                    continue
                kx = bx + sx
                ky = by + sy
                kz = bz + sz
                if same and kx == 0.0 and ky == 0.0 and kz == 0.0:
                    continue
                tx = kx * torus[0, 0] + ky * torus[1, 0] + kz * torus[2, 0]
                ty = kx * torus[0, 1] + ky * torus[1, 1] + kz * torus[2, 1]
                tz = kx * torus[0, 2] + ky * torus[1, 2] + kz * torus[2, 2]
                ddx = d0 - tx
                ddy = d1 - ty
                ddz = d2 - tz
                if ddx * ddx + ddy * ddy + ddz * ddz > reach * reach:
                    continue
                code = (np.int64(round(kx)) * np.int64(32) + np.int64(round(ky))) \
                    * np.int64(32) + np.int64(round(kz))
                shared = 0
                for a in range(4):
                    for b in range(4):
                        if kA[a] == kB[b] + code:
                            shared += 1
                            break
                if shared >= 3:
                    continue
                for v in range(4):
                    Bbuf[v, 0] = vB[v, 0] + tx
                    Bbuf[v, 1] = vB[v, 1] + ty
                    Bbuf[v, 2] = vB[v, 2] + tz
                ax = tet_sep_axis(vA, Bbuf, guard, hint)
                if ax < 0:
                    return True, hint
                hint = ax
    return False, hint


# ---------------------------------------------------------------------------
# full overlap scans (used by the global admissibility checker)

@njit(cache=True)
def overlap_scan(verts, keys, torus, inv_torus, heights, guard, out_pairs):
    """All non-adjacent simplex-image pairs with intersecting interiors.

    verts: (M, d+1, d) image vertex coordinates (canonical copy).
    Returns the number of offending pairs written into out_pairs.
    """
    M = verts.shape[0]
    k = verts.shape[1]
    d = verts.shape[2]
    cent = np.empty((M, d))
    rad = np.empty(M)
    fc = np.empty((M, d))
    fh = np.empty((M, d))
    for i in range(M):
        for c in range(d):
            s = 0.0
            for v in range(k):
                s += verts[i, v, c]
            cent[i, c] = s / k
        r2 = 0.0
        for v in range(k):
            s = 0.0
            for c in range(d):
                df = verts[i, v, c] - cent[i, c]
                s += df * df
            r2 = max(r2, s)
        rad[i] = math.sqrt(r2)
        # wrap-aware fractional bounding box (anchor chart at vertex 0)
        for c in range(d):
            f0 = 0.0
            for cc in range(d):
                f0 += verts[i, 0, cc] * inv_torus[cc, c]
            lo = hi = f0
            for v in range(1, k):
                fv = 0.0
                for cc in range(d):
                    fv += verts[i, v, cc] * inv_torus[cc, c]
                t = fv - f0
                t -= round(t)
                fv = f0 + t
                lo = min(lo, fv)
                hi = max(hi, fv)
            fc[i, c] = 0.5 * (lo + hi)
            fh[i, c] = 0.5 * (hi - lo)
    Bbuf = np.empty((k, d))
    count = 0
    cap = out_pairs.shape[0]
    for i in range(M):
        for j in range(i, M):
            if i != j:
                boxed_out = False
                for c in range(d):
                    t = fc[i, c] - fc[j, c]
                    t -= round(t)
                    if abs(t) > fh[i, c] + fh[j, c] + 1e-9:
                        boxed_out = True
                        break
                if boxed_out:
                    continue
            if d == 2:
                hit = pair_overlap_2d(verts[i], cent[i], rad[i], keys[i],
                                      verts[j], cent[j], rad[j], keys[j],
                                      torus, inv_torus, heights, i == j, guard, Bbuf)
            else:
                hit, _h = pair_overlap_3d(verts[i], cent[i], rad[i], keys[i],
                                          verts[j], cent[j], rad[j], keys[j],
                                          torus, inv_torus, heights, i == j,
                                          guard, Bbuf, -1)
            if hit:
                if count < cap:
                    out_pairs[count, 0] = i
                    out_pairs[count, 1] = j
                count += 1
    return count


# ---------------------------------------------------------------------------
# single-move admissibility checks

@njit(cache=True)
def check_move_2d(s, px, py, pos,
                  nbr_idx, nbr_voff,
                  tri_idx, tri_voff,
                  cor_a_idx, cor_a_voff, cor_b_idx, cor_b_voff,
                  lo2, hi2):
    # edge-length window
    for kk in range(nbr_idx.shape[1]):
        j = nbr_idx[s, kk]
        qx = (px if j == s else pos[j, 0]) + nbr_voff[s, kk, 0]
        qy = (py if j == s else pos[j, 1]) + nbr_voff[s, kk, 1]
        dx = qx - px
        dy = qy - py
        d2 = dx * dx + dy * dy
        if d2 <= lo2 or d2 >= hi2:
            return 1
    # orientation of incident triangles
    for kk in range(tri_idx.shape[1]):
        x0 = y0 = x1 = y1 = x2 = y2 = 0.0
        for v in range(3):
            j = tri_idx[s, kk, v]
            vx = (px if j == s else pos[j, 0]) + tri_voff[s, kk, v, 0]
            vy = (py if j == s else pos[j, 1]) + tri_voff[s, kk, v, 1]
            if v == 0:
                x0 = vx
                y0 = vy
            elif v == 1:
                x1 = vx
                y1 = vy
            else:
                x2 = vx
                y2 = vy
        area2 = (x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0)
        if area2 <= 2.0 * GUARD:
            return 3
    # injectivity: full angle at every affected vertex
    for vv in range(nbr_idx.shape[1] + 1):
        v = s if vv == 0 else nbr_idx[s, vv - 1]
        pvx = px if v == s else pos[v, 0]
        pvy = py if v == s else pos[v, 1]
        total = 0.0
        for kk in range(cor_a_idx.shape[1]):
            a = cor_a_idx[v, kk]
            b = cor_b_idx[v, kk]
            ax = (px if a == s else pos[a, 0]) + cor_a_voff[v, kk, 0] - pvx
            ay = (py if a == s else pos[a, 1]) + cor_a_voff[v, kk, 1] - pvy
            bx = (px if b == s else pos[b, 0]) + cor_b_voff[v, kk, 0] - pvx
            by = (py if b == s else pos[b, 1]) + cor_b_voff[v, kk, 1] - pvy
            total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
        if abs(total - TWO_PI) > ANGLE_TOL:
            return 2
    return 0


@njit(cache=True)
def _frac_box(verts4, inv_torus, fc_out, fh_out):
    """Wrap-aware fractional bounding box of one tetrahedron (anchor chart)."""
    f0 = np.empty(3)
    for c in range(3):
        f0[c] = (verts4[0, 0] * inv_torus[0, c] + verts4[0, 1] * inv_torus[1, c]
                 + verts4[0, 2] * inv_torus[2, c])
    for c in range(3):
        lo = hi = f0[c]
        for v in range(1, 4):
            fv = (verts4[v, 0] * inv_torus[0, c] + verts4[v, 1] * inv_torus[1, c]
                  + verts4[v, 2] * inv_torus[2, c])
            t = fv - f0[c]
            t -= round(t)
            fv = f0[c] + t
            lo = min(lo, fv)
            hi = max(hi, fv)
        fc_out[c] = 0.5 * (lo + hi)
        fh_out[c] = 0.5 * (hi - lo)


@njit(cache=True)
def _boxes_disjoint(fcA, fhA, fcB, fhB):
    for c in range(3):
        t = fcA[c] - fcB[c]
        t -= round(t)
        if abs(t) > fhA[c] + fhB[c] + 1e-9:
            return True
    return False


@njit(cache=True)
def rebuild_candidates(fc, fh, slack, cand, cand_n):
    """Per-simplex lists of box-near simplices, boxes inflated by slack.

    slack (fractional, per axis) must cover the box drift until the next
    rebuild; a list overflow marks the simplex for exhaustive scanning
    (cand_n = -1).
    """
    M = fc.shape[0]
    cap = cand.shape[1]
    for i in range(M):
        cand_n[i] = 0
    for i in range(M):
        for j in range(i + 1, M):
            near = True
            for c in range(3):
                t = fc[i, c] - fc[j, c]
                t -= round(t)
                if abs(t) > fh[i, c] + fh[j, c] + slack[c] + 1e-9:
                    near = False
                    break
            if not near:
                continue
            if cand_n[i] >= 0:
                if cand_n[i] < cap:
                    cand[i, cand_n[i]] = j
                    cand_n[i] += 1
                else:
                    cand_n[i] = -1
            if cand_n[j] >= 0:
                if cand_n[j] < cap:
                    cand[j, cand_n[j]] = i
                    cand_n[j] += 1
                else:
                    cand_n[j] = -1


@njit(cache=True)
def check_move_3d(s, pnew, pos,
                  nbr_idx, nbr_voff,
                  inc_simp, simp_sites, simp_voff, simp_keys,
                  inc_octa, octa_sites, octa_voff,
                  verts, cent, rad, fc, fh, cand, cand_n, hints,
                  changed_map, new_verts, new_cent, new_rad, new_fc, new_fh,
                  torus, inv_torus, heights,
                  lo2, hi2):
    """Admissibility of moving site s to pnew; 0 or the failing condition.

    Fills the new_* buffers for the simplices incident to s and uses
    changed_map (all -1 on entry, restored before returning) to resolve
    changed-vs-changed candidate pairs.  A simplex with cand_n < 0 scans
    every other simplex; otherwise only its candidate list, with a cached
    separating-axis hint per list slot.
    """
    nsmax = inc_simp.shape[1]
    # edge-length window
    for kk in range(nbr_idx.shape[1]):
        j = nbr_idx[s, kk]
        d2 = 0.0
        for c in range(3):
            q = (pnew[c] if j == s else pos[j, c]) + nbr_voff[s, kk, c]
            df = q - pnew[c]
            d2 += df * df
        if d2 <= lo2 or d2 >= hi2:
            return 1
    # orientation of incident tetrahedra (and refresh their geometry)
    for a in range(nsmax):
        si = inc_simp[s, a]
        for v in range(4):
            j = simp_sites[si, v]
            for c in range(3):
                new_verts[a, v, c] = (pnew[c] if j == s else pos[j, c]) \
                    + simp_voff[si, v, c]
        e10 = new_verts[a, 1] - new_verts[a, 0]
        e20 = new_verts[a, 2] - new_verts[a, 0]
        e30 = new_verts[a, 3] - new_verts[a, 0]
        det = (e10[0] * (e20[1] * e30[2] - e20[2] * e30[1])
               - e10[1] * (e20[0] * e30[2] - e20[2] * e30[0])
               + e10[2] * (e20[0] * e30[1] - e20[1] * e30[0]))
        if det <= 6.0 * GUARD:
            return 3
        for c in range(3):
            new_cent[a, c] = 0.25 * (new_verts[a, 0, c] + new_verts[a, 1, c]
                                     + new_verts[a, 2, c] + new_verts[a, 3, c])
        r2 = 0.0
        for v in range(4):
            q = 0.0
            for c in range(3):
                df = new_verts[a, v, c] - new_cent[a, c]
                q += df * df
            r2 = max(r2, q)
        new_rad[a] = math.sqrt(r2)
        _frac_box(new_verts[a], inv_torus, new_fc[a], new_fh[a])
    # convexity of incident octahedron images
    for a in range(inc_octa.shape[1]):
        oi = inc_octa[s, a]
        ov = np.empty((6, 3))
        for v in range(6):
            j = octa_sites[oi, v]
            for c in range(3):
                ov[v, c] = (pnew[c] if j == s else pos[j, c]) + octa_voff[oi, v, c]
        for f in range(8):
            i0 = OCTA_FACE_ARR[f, 0]
            i1 = OCTA_FACE_ARR[f, 1]
            i2 = OCTA_FACE_ARR[f, 2]
            ux = ov[i1, 0] - ov[i0, 0]
            uy = ov[i1, 1] - ov[i0, 1]
            uz = ov[i1, 2] - ov[i0, 2]
            vx = ov[i2, 0] - ov[i0, 0]
            vy = ov[i2, 1] - ov[i0, 1]
            vz = ov[i2, 2] - ov[i0, 2]
            nx = uy * vz - uz * vy
            ny = uz * vx - ux * vz
            nz = ux * vy - uy * vx
            nn = math.sqrt(nx * nx + ny * ny + nz * nz)
            if nn < GUARD:
                return 4
            po = neg = 0
            for m in range(3):
                jo = OCTA_OTHER_ARR[f, m]
                sdist = ((ov[jo, 0] - ov[i0, 0]) * nx + (ov[jo, 1] - ov[i0, 1]) * ny
                         + (ov[jo, 2] - ov[i0, 2]) * nz)
                if sdist > GUARD * nn:
                    po += 1
                elif sdist < -GUARD * nn:
                    neg += 1
            if po != 3 and neg != 3:
                return 4
    # injectivity: changed simplices vs all candidates within reach
    M = verts.shape[0]
    Bbuf = np.empty((4, 3))
    for a in range(nsmax):
        si = inc_simp[s, a]
        changed_map[si] = a
    ok = True
    for a in range(nsmax):
        if not ok:
            break
        si = inc_simp[s, a]
        # this simplex against its own periodic copies
        hit, _h = pair_overlap_3d(new_verts[a], new_cent[a], new_rad[a],
                                  simp_keys[si],
                                  new_verts[a], new_cent[a], new_rad[a],
                                  simp_keys[si],
                                  torus, inv_torus, heights, True, GUARD,
                                  Bbuf, -1)
        if hit:
            ok = False
            break
        listed = cand_n[si] >= 0
        limit = cand_n[si] if listed else M
        for t in range(limit):
            j = cand[si, t] if listed else t
            if j == si:
                continue
            cj = changed_map[j]
            if cj >= 0:
                if cj < a:
                    continue
                if _boxes_disjoint(new_fc[a], new_fh[a],
                                   new_fc[cj], new_fh[cj]):
                    continue
                hit, _h = pair_overlap_3d(new_verts[a], new_cent[a],
                                          new_rad[a], simp_keys[si],
                                          new_verts[cj], new_cent[cj],
                                          new_rad[cj], simp_keys[j],
                                          torus, inv_torus, heights, False,
                                          GUARD, Bbuf, -1)
            else:
                if _boxes_disjoint(new_fc[a], new_fh[a], fc[j], fh[j]):
                    continue
                h0 = hints[si, t] if listed else -1
                hit, h1 = pair_overlap_3d(new_verts[a], new_cent[a],
                                          new_rad[a], simp_keys[si],
                                          verts[j], cent[j], rad[j],
                                          simp_keys[j],
                                          torus, inv_torus, heights, False,
                                          GUARD, Bbuf, h0)
                if listed:
                    hints[si, t] = h1
            if hit:
                ok = False
                break
    for a in range(nsmax):
        changed_map[inc_simp[s, a]] = -1
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# sweep drivers

@njit(cache=True)
def sweep_2d(pos, order, site_class,
             nbr_idx, nbr_voff, tri_idx, tri_voff,
             cor_a_idx, cor_a_voff, cor_b_idx, cor_b_voff,
             lo2, hi2, delta, nsweeps, rng,
             acc_by_class, prop_by_class, rej_hist):
    buf = np.empty(2)
    for _ in range(nsweeps):
        for oi in range(order.shape[0]):
            s = order[oi]
            draw_in_ball(rng, delta, buf)
            px = pos[s, 0] + buf[0]
            py = pos[s, 1] + buf[1]
            code = check_move_2d(s, px, py, pos, nbr_idx, nbr_voff,
                                 tri_idx, tri_voff,
                                 cor_a_idx, cor_a_voff, cor_b_idx, cor_b_voff,
                                 lo2, hi2)
            cls = site_class[s]
            prop_by_class[cls] += 1
            if code == 0:
                pos[s, 0] = px
                pos[s, 1] = py
                acc_by_class[cls] += 1
            else:
                rej_hist[code - 1] += 1


@njit(cache=True)
def sweep_3d(pos, order, site_class,
             nbr_idx, nbr_voff,
             inc_simp, simp_sites, simp_voff, simp_keys,
             inc_octa, octa_sites, octa_voff,
             verts, cent, rad, fc, fh, cand, cand_n, hints, changed_map,
             torus, inv_torus, heights,
             lo2, hi2, delta, nsweeps, rng,
             acc_by_class, prop_by_class, rej_hist):
    buf = np.empty(3)
    pnew = np.empty(3)
    nsmax = inc_simp.shape[1]
    new_verts = np.empty((nsmax, 4, 3))
    new_cent = np.empty((nsmax, 3))
    new_rad = np.empty(nsmax)
    new_fc = np.empty((nsmax, 3))
    new_fh = np.empty((nsmax, 3))
    # candidate-list slack: per sweep each box center drifts at most delta
    # and each halfwidth grows at most 2*delta, plus delta for the proposal
    slack = np.empty(3)
    for c in range(3):
        slack[c] = 8.0 * delta / heights[c]
    for _ in range(nsweeps):
        rebuild_candidates(fc, fh, slack, cand, cand_n)
        for oi in range(order.shape[0]):
            s = order[oi]
            draw_in_ball(rng, delta, buf)
            for c in range(3):
                pnew[c] = pos[s, c] + buf[c]
            code = check_move_3d(s, pnew, pos, nbr_idx, nbr_voff,
                                 inc_simp, simp_sites, simp_voff, simp_keys,
                                 inc_octa, octa_sites, octa_voff,
                                 verts, cent, rad, fc, fh, cand, cand_n,
                                 changed_map, new_verts, new_cent, new_rad,
                                 new_fc, new_fh,
                                 torus, inv_torus, heights, lo2, hi2)
            cls = site_class[s]
            prop_by_class[cls] += 1
            if code == 0:
                for c in range(3):
                    pos[s, c] = pnew[c]
                for a in range(nsmax):
                    si = inc_simp[s, a]
                    for v in range(4):
                        for c in range(3):
                            verts[si, v, c] = new_verts[a, v, c]
                    for c in range(3):
                        cent[si, c] = new_cent[a, c]
                        fc[si, c] = new_fc[a, c]
                        fh[si, c] = new_fh[a, c]
                    rad[si] = new_rad[a]
                acc_by_class[cls] += 1
            else:
                rej_hist[code - 1] += 1
