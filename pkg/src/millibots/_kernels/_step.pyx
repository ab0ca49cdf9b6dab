# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernel. Semantics must match reference.py exactly;
both are exercised by the same test suite and the kernel benchmark.
"""

from libc.math cimport cos, sin, sqrt

cdef double MU0_4PI = 1e-7

cdef int P_MOM_MAG = 0
cdef int P_DT = 1
cdef int P_GAMMA = 2
cdef int P_STICTION = 3
cdef int P_TIP = 4
cdef int P_CUTOFF = 5
cdef int P_CONTACT = 6
cdef int P_CONTACT_TOL = 7
cdef int P_BOND_SLACK = 8
cdef int P_FORM_DIST = 9
cdef int P_KBOND = 10
cdef int P_MIN_SEP = 11


def step_kernel(
    double[:, ::1] pos,
    double[::1] heading,
    double[:, ::1] moment,
    int[::1] mtype,
    unsigned char[:, ::1] rel,
    double[:, ::1] couple,
    int[:, ::1] bonds,
    double[::1] bond_thresh,
    double[::1] bond_hold,
    double bx, double by, double gx, double gy,
    double[::1] params,
    int relax_iters, int project_iters,
    double[:, ::1] forces,
    double[:, ::1] radial,
    unsigned char[::1] break_out,
    int[:, ::1] form_out,
):
    cdef int n = pos.shape[0]
    cdef int m_bonds = bonds.shape[0]
    cdef double mom_mag = params[P_MOM_MAG]
    cdef double dt = params[P_DT]
    cdef double gamma = params[P_GAMMA]
    cdef double stiction = params[P_STICTION]
    cdef double tip = params[P_TIP]
    cdef double cutoff = params[P_CUTOFF]
    cdef double contact = params[P_CONTACT]
    cdef double slack = params[P_BOND_SLACK]
    cdef double form_dist = params[P_FORM_DIST]
    cdef double kbond = params[P_KBOND]
    cdef double min_sep = params[P_MIN_SEP]
    cdef double cutoff2 = cutoff * cutoff

    cdef double gxx = gx - gy / 2.0
    cdef double gyy = -gx / 2.0 + gy

    cdef int sweep, i, j, k, n_formed, max_form
    cdef double bxi, byi, bzi, rx, ry, r2, r, ux, uy, inv3, mdotr, norm, s
    cdef double mi_r, mj_r, mi_mj, pref, fx, fy, rad, fm, scale
    cdef double dx, dy, adx, ady, ox, oy, d, f, limit, ax, ay, dot, px, py, bperp

    # -- 1. moment relaxation --
    for sweep in range(relax_iters):
        for i in range(n):
            if mtype[i] == 1:
                moment[i, 0] = mom_mag * cos(heading[i])
                moment[i, 1] = mom_mag * sin(heading[i])
                moment[i, 2] = 0.0
                continue
            bxi = bx + gxx * pos[i, 0]
            byi = by + gyy * pos[i, 1]
            bzi = 0.0
            for j in range(n):
                if j == i or rel[i, j] == 2:
                    continue
                rx = pos[i, 0] - pos[j, 0]
                ry = pos[i, 1] - pos[j, 1]
                r2 = rx * rx + ry * ry
                if r2 > cutoff2 or r2 == 0.0:
                    continue
                r = sqrt(r2)
                ux = rx / r
                uy = ry / r
                inv3 = MU0_4PI / (r2 * r) * couple[i, j]
                mdotr = moment[j, 0] * ux + moment[j, 1] * uy
                bxi += inv3 * (3.0 * mdotr * ux - moment[j, 0])
                byi += inv3 * (3.0 * mdotr * uy - moment[j, 1])
                bzi += inv3 * (-moment[j, 2])
            norm = sqrt(bxi * bxi + byi * byi + bzi * bzi)
            if norm >= tip:
                s = mom_mag / norm
                moment[i, 0] = bxi * s
                moment[i, 1] = byi * s
                moment[i, 2] = bzi * s
            else:
                moment[i, 0] = 0.0
                moment[i, 1] = 0.0
                moment[i, 2] = mom_mag

    # -- 2. forces --
    for i in range(n):
        forces[i, 0] = moment[i, 0] * gxx
        forces[i, 1] = moment[i, 1] * gyy
        for j in range(n):
            radial[i, j] = 0.0

    for i in range(n):
        for j in range(i + 1, n):
            rx = pos[i, 0] - pos[j, 0]
            ry = pos[i, 1] - pos[j, 1]
            r2 = rx * rx + ry * ry
            if r2 > cutoff2:
                continue
            r = sqrt(r2)
            if r < min_sep:
                return 0, i, j
            ux = rx / r
            uy = ry / r
            mi_r = moment[i, 0] * ux + moment[i, 1] * uy
            mj_r = moment[j, 0] * ux + moment[j, 1] * uy
            mi_mj = (moment[i, 0] * moment[j, 0]
                     + moment[i, 1] * moment[j, 1]
                     + moment[i, 2] * moment[j, 2])
            pref = 3.0 * MU0_4PI / (r2 * r2)
            fx = pref * (mj_r * moment[i, 0] + mi_r * moment[j, 0]
                         + (mi_mj - 5.0 * mi_r * mj_r) * ux)
            fy = pref * (mj_r * moment[i, 1] + mi_r * moment[j, 1]
                         + (mi_mj - 5.0 * mi_r * mj_r) * uy)
            if fx != fx or fy != fy:
                return 0, i, j
            # bonded pairs: mutual pull balanced by the contact normal
            if rel[i, j] != 1:
                forces[i, 0] += fx
                forces[i, 1] += fy
                forces[j, 0] -= fx
                forces[j, 1] -= fy
            rad = fx * ux + fy * uy
            radial[i, j] = rad
            radial[j, i] = rad

    for k in range(m_bonds):
        i = bonds[k, 0]
        j = bonds[k, 1]
        rx = pos[i, 0] - pos[j, 0]
        ry = pos[i, 1] - pos[j, 1]
        d = sqrt(rx * rx + ry * ry)
        if d > contact and d > 0.0:
            f = kbond * (d - contact)
            fx = -f * rx / d
            fy = -f * ry / d
            forces[i, 0] += fx
            forces[i, 1] += fy
            forces[j, 0] -= fx
            forces[j, 1] -= fy

    # -- 2b. bond break flags (pre-move geometry) --
    for k in range(m_bonds):
        i = bonds[k, 0]
        j = bonds[k, 1]
        break_out[k] = 0
        dx = pos[i, 0] - pos[j, 0]
        dy = pos[i, 1] - pos[j, 1]
        d = sqrt(dx * dx + dy * dy)
        if d == 0.0:
            continue
        ax = dx / d
        ay = dy / d
        dot = bx * ax + by * ay
        px = bx - dot * ax
        py = by - dot * ay
        bperp = sqrt(px * px + py * py)
        if bperp >= bond_thresh[k]:
            break_out[k] = 1
        elif radial[i, j] > bond_hold[k]:
            break_out[k] = 1

    # -- 3. stiction + overdamped integration --
    for i in range(n):
        fx = forces[i, 0]
        fy = forces[i, 1]
        fm = sqrt(fx * fx + fy * fy)
        if fm > stiction:
            scale = (fm - stiction) / fm * dt / gamma
            pos[i, 0] += fx * scale
            pos[i, 1] += fy * scale

    # -- 4. contact + bond-slack projection --
    for sweep in range(project_iters):
        for i in range(n):
            for j in range(i + 1, n):
                dx = pos[i, 0] - pos[j, 0]
                dy = pos[i, 1] - pos[j, 1]
                adx = dx if dx >= 0.0 else -dx
                ady = dy if dy >= 0.0 else -dy
                if adx < contact and ady < contact:
                    ox = contact - adx
                    oy = contact - ady
                    if ox <= oy:
                        s = 0.5 * ox if dx >= 0.0 else -0.5 * ox
                        pos[i, 0] += s
                        pos[j, 0] -= s
                    else:
                        s = 0.5 * oy if dy >= 0.0 else -0.5 * oy
                        pos[i, 1] += s
                        pos[j, 1] -= s
        for k in range(m_bonds):
            i = bonds[k, 0]
            j = bonds[k, 1]
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            d = sqrt(dx * dx + dy * dy)
            limit = contact + slack
            if d > limit and d > 0.0:
                s = 0.5 * (d - limit) / d
                pos[i, 0] -= dx * s
                pos[i, 1] -= dy * s
                pos[j, 0] += dx * s
                pos[j, 1] += dy * s

    # -- 5. bond formation candidates --
    n_formed = 0
    max_form = form_out.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if rel[i, j] != 0:
                continue
            if radial[i, j] >= 0.0:
                continue
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            if sqrt(dx * dx + dy * dy) <= form_dist and n_formed < max_form:
                form_out[n_formed, 0] = i
                form_out[n_formed, 1] = j
                n_formed += 1

    return n_formed, -1, -1
