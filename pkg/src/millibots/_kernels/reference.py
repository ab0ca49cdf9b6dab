"""Pure-Python step kernel: the fallback backend.

Mirrors the compiled kernel operation for operation (same expressions, same
evaluation order) so both backends produce identical trajectories. Keep any
change here in lockstep with `_step.pyx`.

One kernel call advances the dipole physics by one timestep:

1. relax free/gripper moments to the local field (Gauss-Seidel sweeps);
   moments rest along +z when the local field is below the tipping
   threshold, fixed-module moments stay locked to the cube heading
2. accumulate gradient forces, pairwise dipole forces and bond springs
3. apply Coulomb stiction and integrate positions (overdamped)
4. project contacts apart (axis-aligned) and clamp bonded separations
5. flag bonds whose perpendicular uniform-field component reaches their
   break threshold, or whose dipole repulsion exceeds the bond hold force
6. list new bond candidates: unbonded, unsuppressed pairs in contact range
   with attractive radial force

Relation codes in `rel`: 0 none, 1 bonded, 2 suppressed (recently broken
pair whose magnets have rotated away; no moment coupling, no re-forming).
"""

from math import cos, sin, sqrt

# params array layout (float64); keep in sync with the compiled kernel
P_MOM_MAG = 0
P_DT = 1
P_GAMMA = 2
P_STICTION = 3
P_TIP = 4
P_CUTOFF = 5
P_CONTACT = 6
P_CONTACT_TOL = 7
P_BOND_SLACK = 8
P_FORM_DIST = 9
P_KBOND = 10
P_MIN_SEP = 11
N_PARAMS = 12

MU0_4PI = 1e-7


def step_kernel(
    pos,  # (N,2) f8, in/out
    heading,  # (N,) f8
    moment,  # (N,3) f8, in/out
    mtype,  # (N,) i32: 0 free, 1 fixed, 2 gripper
    rel,  # (N,N) u8 relation matrix
    couple,  # (N,N) f8 moment-coupling scale (bonded pairs: magnet-gap ratio)
    bonds,  # (M,2) i32
    bond_thresh,  # (M,) f8, T
    bond_hold,  # (M,) f8, N
    bx, by, gx, gy,  # field command: uniform T, gradients T/m
    params,  # (N_PARAMS,) f8
    relax_iters, project_iters,  # int
    forces,  # (N,2) f8 scratch, out: post-step net force
    radial,  # (N,N) f8 scratch: radial pair-force component on i from j
    break_out,  # (M,) u8 out
    form_out,  # (K,2) i32 out
):
    """Advance one timestep. Returns (n_formed, diverged_i, diverged_j)."""
    n = pos.shape[0]
    m_bonds = bonds.shape[0]
    mom_mag = params[P_MOM_MAG]
    dt = params[P_DT]
    gamma = params[P_GAMMA]
    stiction = params[P_STICTION]
    tip = params[P_TIP]
    cutoff = params[P_CUTOFF]
    contact = params[P_CONTACT]
    slack = params[P_BOND_SLACK]
    form_dist = params[P_FORM_DIST]
    kbond = params[P_KBOND]
    min_sep = params[P_MIN_SEP]
    cutoff2 = cutoff * cutoff

    gxx = gx - gy / 2.0
    gyy = -gx / 2.0 + gy

    # -- 1. moment relaxation ------------------------------------------------
    for _ in range(relax_iters):
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

    # -- 2. forces -------------------------------------------------------------
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
            mi_mj = (
                moment[i, 0] * moment[j, 0]
                + moment[i, 1] * moment[j, 1]
                + moment[i, 2] * moment[j, 2]
            )
            pref = 3.0 * MU0_4PI / (r2 * r2)
            fx = pref * (mj_r * moment[i, 0] + mi_r * moment[j, 0]
                         + (mi_mj - 5.0 * mi_r * mj_r) * ux)
            fy = pref * (mj_r * moment[i, 1] + mi_r * moment[j, 1]
                         + (mi_mj - 5.0 * mi_r * mj_r) * uy)
            if fx != fx or fy != fy:  # NaN
                return 0, i, j
            # a bonded pair's mutual pull is balanced by its contact normal;
            # only the radial bookkeeping (break criterion) keeps it
            if rel[i, j] != 1:
                forces[i, 0] += fx
                forces[i, 1] += fy
                forces[j, 0] -= fx
                forces[j, 1] -= fy
            rad = fx * ux + fy * uy  # >0 repulsive, on i
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

    # -- 2b. bond break flags (pre-move geometry, so exact-threshold pulses
    #        applied to an exactly aligned chain register as ties) -----------
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

    # -- 3. stiction + overdamped integration ----------------------------------
    for i in range(n):
        fx = forces[i, 0]
        fy = forces[i, 1]
        fm = sqrt(fx * fx + fy * fy)
        if fm > stiction:
            scale = (fm - stiction) / fm * dt / gamma
            pos[i, 0] += fx * scale
            pos[i, 1] += fy * scale

    # -- 4. contact + bond-slack projection -------------------------------------
    for _ in range(project_iters):
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

    # -- 5. bond formation candidates ---------------------------------------------
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
