"""Numba contact/integration kernels.

All state lives in flat float64 arrays shaped (n_envs, n_bodies, ...). Every
loop runs in a fixed order, with fastmath disabled, so results are
bit-identical for the same inputs regardless of batch width: env e sees the
same instruction sequence whether it is simulated alone or inside a batch.

Contact model: every dynamic body is a collision sphere (its bounding
sphere); the container is five half-space planes (floor plus four walls of
unbounded height); the manipulator contributes six kinematic spheres that
push bodies one-way. Impulses are restitution-free with Coulomb friction,
followed by position projection for penetration recovery. Contacts carry no
torque; angular velocity is integrated but never excited by collisions.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=False)
def _resolve_sphere_pair(vel, inv_m, e, i, j, nx, ny, nz, mu):
    """Normal + friction impulse between bodies i and j (normal i -> j)."""
    rvx = vel[e, j, 0] - vel[e, i, 0]
    rvy = vel[e, j, 1] - vel[e, i, 1]
    rvz = vel[e, j, 2] - vel[e, i, 2]
    vn = rvx * nx + rvy * ny + rvz * nz
    if vn >= 0.0:
        return
    w = inv_m[e, i] + inv_m[e, j]
    if w <= 0.0:
        return
    jn = -vn / w
    vel[e, i, 0] -= jn * inv_m[e, i] * nx
    vel[e, i, 1] -= jn * inv_m[e, i] * ny
    vel[e, i, 2] -= jn * inv_m[e, i] * nz
    vel[e, j, 0] += jn * inv_m[e, j] * nx
    vel[e, j, 1] += jn * inv_m[e, j] * ny
    vel[e, j, 2] += jn * inv_m[e, j] * nz
    # friction against the post-normal-impulse tangential velocity
    rvx = vel[e, j, 0] - vel[e, i, 0]
    rvy = vel[e, j, 1] - vel[e, i, 1]
    rvz = vel[e, j, 2] - vel[e, i, 2]
    vn2 = rvx * nx + rvy * ny + rvz * nz
    tx = rvx - vn2 * nx
    ty = rvy - vn2 * ny
    tz = rvz - vn2 * nz
    vt = np.sqrt(tx * tx + ty * ty + tz * tz)
    if vt > 1e-12:
        jt = vt / w
        jmax = mu * jn
        if jt > jmax:
            jt = jmax
        tx /= vt
        ty /= vt
        tz /= vt
        vel[e, i, 0] += jt * inv_m[e, i] * tx
        vel[e, i, 1] += jt * inv_m[e, i] * ty
        vel[e, i, 2] += jt * inv_m[e, i] * tz
        vel[e, j, 0] -= jt * inv_m[e, j] * tx
        vel[e, j, 1] -= jt * inv_m[e, j] * ty
        vel[e, j, 2] -= jt * inv_m[e, j] * tz


@njit(cache=True, fastmath=False)
def _resolve_static(vel, inv_m, e, i, nx, ny, nz, vsx, vsy, vsz, mu):
    """Impulse on body i against an infinite-mass surface moving at vs."""
    rvx = vel[e, i, 0] - vsx
    rvy = vel[e, i, 1] - vsy
    rvz = vel[e, i, 2] - vsz
    vn = rvx * nx + rvy * ny + rvz * nz
    if vn >= 0.0:
        return
    jn = -vn / inv_m[e, i]
    vel[e, i, 0] += jn * inv_m[e, i] * nx
    vel[e, i, 1] += jn * inv_m[e, i] * ny
    vel[e, i, 2] += jn * inv_m[e, i] * nz
    rvx = vel[e, i, 0] - vsx
    rvy = vel[e, i, 1] - vsy
    rvz = vel[e, i, 2] - vsz
    vn2 = rvx * nx + rvy * ny + rvz * nz
    tx = rvx - vn2 * nx
    ty = rvy - vn2 * ny
    tz = rvz - vn2 * nz
    vt = np.sqrt(tx * tx + ty * ty + tz * tz)
    if vt > 1e-12:
        jt = vt / inv_m[e, i]
        jmax = mu * jn
        if jt > jmax:
            jt = jmax
        vel[e, i, 0] -= jt * inv_m[e, i] * tx / vt
        vel[e, i, 1] -= jt * inv_m[e, i] * ty / vt
        vel[e, i, 2] -= jt * inv_m[e, i] * tz / vt


@njit(cache=True, fastmath=False)
def run_substeps(
    pos, quat, vel, omega, inv_m, coll_r, floor_r, wall_r, active,
    hand_traj, hand_prev, hand_r, hand_on,
    hx, hy, gx, gy, gz, dt, mu, pos_corr, slop,
    vel_iters, pos_iters, damping, bad,
):
    """Advance every env by hand_traj.shape[1] substeps.

    hand_traj: (N, S, 6, 3) hand sphere centers at the END of each substep.
    hand_prev: (N, 6, 3) centers before the first substep; updated in place.
    damping: per-substep velocity retention factor (1.0 = none); scene
    construction uses < 1 to mimic dissipative granular impacts.
    bad: (N,) uint8 out-array, set to 1 where a state went non-finite.
    """
    N, nb = pos.shape[0], pos.shape[1]
    S = hand_traj.shape[1]
    nh = hand_r.shape[0]
    for e in range(N):
        for s in range(S):
            # gravity + damping
            for i in range(nb):
                if active[e, i] != 0 and inv_m[e, i] > 0.0:
                    vel[e, i, 0] = vel[e, i, 0] * damping + gx * dt
                    vel[e, i, 1] = vel[e, i, 1] * damping + gy * dt
                    vel[e, i, 2] = vel[e, i, 2] * damping + gz * dt
            # velocity iterations: planes first ground the support chain,
            # then body pairs, then the kinematic hand spheres
            for _ in range(vel_iters):
                for i in range(nb):
                    if active[e, i] == 0 or inv_m[e, i] == 0.0:
                        continue
                    if pos[e, i, 2] < floor_r[e, i]:
                        _resolve_static(vel, inv_m, e, i, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, mu)
                    r = wall_r[e, i]
                    if pos[e, i, 0] > hx - r:
                        _resolve_static(vel, inv_m, e, i, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, mu)
                    if pos[e, i, 0] < -(hx - r):
                        _resolve_static(vel, inv_m, e, i, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, mu)
                    if pos[e, i, 1] > hy - r:
                        _resolve_static(vel, inv_m, e, i, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, mu)
                    if pos[e, i, 1] < -(hy - r):
                        _resolve_static(vel, inv_m, e, i, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, mu)
                for i in range(nb):
                    if active[e, i] == 0:
                        continue
                    for j in range(i + 1, nb):
                        if active[e, j] == 0:
                            continue
                        if inv_m[e, i] == 0.0 and inv_m[e, j] == 0.0:
                            continue
                        dx = pos[e, j, 0] - pos[e, i, 0]
                        dy = pos[e, j, 1] - pos[e, i, 1]
                        dz = pos[e, j, 2] - pos[e, i, 2]
                        rsum = coll_r[e, i] + coll_r[e, j]
                        d2 = dx * dx + dy * dy + dz * dz
                        if d2 < rsum * rsum and d2 > 1e-16:
                            d = np.sqrt(d2)
                            _resolve_sphere_pair(vel, inv_m, e, i, j, dx / d, dy / d, dz / d, mu)
                if hand_on != 0:
                    for i in range(nb):
                        if active[e, i] == 0 or inv_m[e, i] == 0.0:
                            continue
                        for h in range(nh):
                            dx = pos[e, i, 0] - hand_traj[e, s, h, 0]
                            dy = pos[e, i, 1] - hand_traj[e, s, h, 1]
                            dz = pos[e, i, 2] - hand_traj[e, s, h, 2]
                            rsum = coll_r[e, i] + hand_r[h]
                            d2 = dx * dx + dy * dy + dz * dz
                            if d2 < rsum * rsum and d2 > 1e-16:
                                d = np.sqrt(d2)
                                vsx = (hand_traj[e, s, h, 0] - hand_prev[e, h, 0]) / dt
                                vsy = (hand_traj[e, s, h, 1] - hand_prev[e, h, 1]) / dt
                                vsz = (hand_traj[e, s, h, 2] - hand_prev[e, h, 2]) / dt
                                _resolve_static(vel, inv_m, e, i, dx / d, dy / d, dz / d, vsx, vsy, vsz, mu)
            # position projection
            for _ in range(pos_iters):
                for i in range(nb):
                    if active[e, i] == 0:
                        continue
                    for j in range(i + 1, nb):
                        if active[e, j] == 0:
                            continue
                        w = inv_m[e, i] + inv_m[e, j]
                        if w <= 0.0:
                            continue
                        dx = pos[e, j, 0] - pos[e, i, 0]
                        dy = pos[e, j, 1] - pos[e, i, 1]
                        dz = pos[e, j, 2] - pos[e, i, 2]
                        rsum = coll_r[e, i] + coll_r[e, j]
                        d2 = dx * dx + dy * dy + dz * dz
                        if d2 < rsum * rsum and d2 > 1e-16:
                            d = np.sqrt(d2)
                            pen = rsum - d - slop
                            if pen > 0.0:
                                c = pos_corr * pen / w
                                pos[e, i, 0] -= c * inv_m[e, i] * dx / d
                                pos[e, i, 1] -= c * inv_m[e, i] * dy / d
                                pos[e, i, 2] -= c * inv_m[e, i] * dz / d
                                pos[e, j, 0] += c * inv_m[e, j] * dx / d
                                pos[e, j, 1] += c * inv_m[e, j] * dy / d
                                pos[e, j, 2] += c * inv_m[e, j] * dz / d
                if hand_on != 0:
                    for i in range(nb):
                        if active[e, i] == 0 or inv_m[e, i] == 0.0:
                            continue
                        for h in range(nh):
                            dx = pos[e, i, 0] - hand_traj[e, s, h, 0]
                            dy = pos[e, i, 1] - hand_traj[e, s, h, 1]
                            dz = pos[e, i, 2] - hand_traj[e, s, h, 2]
                            rsum = coll_r[e, i] + hand_r[h]
                            d2 = dx * dx + dy * dy + dz * dz
                            if d2 < rsum * rsum and d2 > 1e-16:
                                d = np.sqrt(d2)
                                pen = rsum - d - slop
                                if pen > 0.0:
                                    c = pos_corr * pen
                                    pos[e, i, 0] += c * dx / d
                                    pos[e, i, 1] += c * dy / d
                                    pos[e, i, 2] += c * dz / d
                for i in range(nb):
                    if active[e, i] == 0 or inv_m[e, i] == 0.0:
                        continue
                    pen = floor_r[e, i] - pos[e, i, 2] - slop
                    if pen > 0.0:
                        pos[e, i, 2] += pos_corr * pen
                    r = wall_r[e, i]
                    pen = pos[e, i, 0] - (hx - r) - slop
                    if pen > 0.0:
                        pos[e, i, 0] -= pos_corr * pen
                    pen = -(hx - r) - pos[e, i, 0] - slop
                    if pen > 0.0:
                        pos[e, i, 0] += pos_corr * pen
                    pen = pos[e, i, 1] - (hy - r) - slop
                    if pen > 0.0:
                        pos[e, i, 1] -= pos_corr * pen
                    pen = -(hy - r) - pos[e, i, 1] - slop
                    if pen > 0.0:
                        pos[e, i, 1] += pos_corr * pen
            # integrate
            for i in range(nb):
                if active[e, i] == 0 or inv_m[e, i] == 0.0:
                    continue
                pos[e, i, 0] += vel[e, i, 0] * dt
                pos[e, i, 1] += vel[e, i, 1] * dt
                pos[e, i, 2] += vel[e, i, 2] * dt
                ox = omega[e, i, 0]
                oy = omega[e, i, 1]
                oz = omega[e, i, 2]
                if ox != 0.0 or oy != 0.0 or oz != 0.0:
                    # first-order quaternion update, then renormalize
                    qw = quat[e, i, 0]
                    qx = quat[e, i, 1]
                    qy = quat[e, i, 2]
                    qz = quat[e, i, 3]
                    hw = 1.0
                    hxq = 0.5 * ox * dt
                    hyq = 0.5 * oy * dt
                    hzq = 0.5 * oz * dt
                    nw = hw * qw - hxq * qx - hyq * qy - hzq * qz
                    nx = hw * qx + hxq * qw + hyq * qz - hzq * qy
                    ny = hw * qy - hxq * qz + hyq * qw + hzq * qx
                    nz = hw * qz + hxq * qy - hyq * qx + hzq * qw
                    nrm = np.sqrt(nw * nw + nx * nx + ny * ny + nz * nz)
                    quat[e, i, 0] = nw / nrm
                    quat[e, i, 1] = nx / nrm
                    quat[e, i, 2] = ny / nrm
                    quat[e, i, 3] = nz / nrm
            for h in range(nh):
                hand_prev[e, h, 0] = hand_traj[e, s, h, 0]
                hand_prev[e, h, 1] = hand_traj[e, s, h, 1]
                hand_prev[e, h, 2] = hand_traj[e, s, h, 2]
        for i in range(nb):
            for k in range(3):
                if not np.isfinite(pos[e, i, k]) or not np.isfinite(vel[e, i, k]):
                    bad[e] = 1
