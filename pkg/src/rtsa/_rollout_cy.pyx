# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled episode rollout kernel.

Operation-for-operation mirror of ``rtsa._rollout_py.rollout``; see that
module for the contract. Keep the arithmetic order in both in sync so the
two backends produce bit-identical trajectories.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, sin, sqrt

cnp.import_array()

POLICY_NOMINAL = 0
POLICY_BASELINE = 1
POLICY_WEIGHTS = 2

OUTCOME_COMPLETED = 1
OUTCOME_EXITED = 2
OUTCOME_GROUNDED = 3
OUTCOME_TIMEOUT = 4

cdef double _GRAVITY = 9.81


def rollout(
    env_min,
    env_max,
    waypoints,
    double arrival_radius,
    double dt,
    double a_max,
    double cruise_speed,
    double lookahead,
    double kp,
    double kd,
    double air_drag,
    double drag_z,
    double drag_xy,
    int max_steps,
    wind_params,
    int policy_mode,
    double delta,
    theta,
    scales,
    double alert_penalty,
):
    cdef double exn0 = env_min[0], exn1 = env_min[1], exn2 = env_min[2]
    cdef double exx0 = env_max[0], exx1 = env_max[1], exx2 = env_max[2]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] wps = np.ascontiguousarray(waypoints, dtype=np.float64)
    cdef int n_seg = wps.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] seg_a = wps[:n_seg].copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=2] seg_d = np.diff(wps, axis=0)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] seg_len2 = np.sum(seg_d * seg_d, axis=1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cum = np.empty(n_seg + 1)
    cdef int i
    cum[0] = 0.0
    for i in range(n_seg):
        cum[i + 1] = cum[i] + sqrt(seg_len2[i])
    cdef double total_len = cum[n_seg]
    cdef double wlx = wps[n_seg, 0], wly = wps[n_seg, 1], wlz = wps[n_seg, 2]

    cdef double bw0 = wind_params[0], bw1 = wind_params[1]
    cdef double ga0 = wind_params[2], ga1 = wind_params[3]
    cdef double gf0 = wind_params[4], gf1 = wind_params[5]
    cdef double gp0 = wind_params[6], gp1 = wind_params[7]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sc = np.ascontiguousarray(scales, dtype=np.float64)

    cdef double px = wps[0, 0], py = wps[0, 1], pz = wps[0, 2]
    cdef double vx = 0.0, vy = 0.0, vz = 0.0
    cdef double t = 0.0
    cdef bint deployed = False
    cdef int deploy_step = -1

    cdef cnp.ndarray[cnp.float64_t, ndim=2] traj = np.empty((max_steps + 1, 9))
    cdef int step_idx = 0
    cdef int outcome = OUTCOME_TIMEOUT

    cdef int action, seg
    cdef bint inside, outside, fresh_deploy
    cdef double wx, wy, d, r
    cdef double f0, f1, f2, f3, f4, f5, f6, f7, q_cont, q_dep
    cdef double ax, ay, az, best_d2, best_s, sax, say, saz, sdx, sdy, sdz
    cdef double tt, cx, cy, cz, d2, s_ahead, frac, tx, ty, tz
    cdef double tox, toy, toz, dist, vdx, vdy, vdz, ux, uy, uz, un, scale
    cdef double nvx, nvy, nvz, npx, npy, npz, dx, dy, dz

    while True:
        wx = bw0 + ga0 * sin(gf0 * t + gp0)
        wy = bw1 + ga1 * sin(gf1 * t + gp1)

        if deployed:
            action = 1
        elif policy_mode == 0:  # nominal
            action = 0
        elif policy_mode == 1:  # baseline
            inside = exn0 <= px <= exx0 and exn1 <= py <= exx1 and exn2 <= pz <= exx2
            if not inside:
                action = 1
            else:
                d = px - exn0
                if exx0 - px < d:
                    d = exx0 - px
                if py - exn1 < d:
                    d = py - exn1
                if exx1 - py < d:
                    d = exx1 - py
                if pz - exn2 < d:
                    d = pz - exn2
                if exx2 - pz < d:
                    d = exx2 - pz
                action = 1 if d <= delta else 0
        else:  # greedy on linear weights
            f0 = min(px - exn0, exx0 - px) / sc[0]
            f1 = min(py - exn1, exx1 - py) / sc[1]
            f2 = min(pz - exn2, exx2 - pz) / sc[2]
            f3 = vx / sc[3]
            f4 = vy / sc[4]
            f5 = vz / sc[5]
            f6 = wx / sc[6]
            f7 = wy / sc[7]
            q_cont = (
                th[0, 0] * f0 + th[1, 0] * f1 + th[2, 0] * f2 + th[3, 0] * f3
                + th[4, 0] * f4 + th[5, 0] * f5 + th[6, 0] * f6 + th[7, 0] * f7
            )
            q_dep = (
                th[0, 1] * f0 + th[1, 1] * f1 + th[2, 1] * f2 + th[3, 1] * f3
                + th[4, 1] * f4 + th[5, 1] * f5 + th[6, 1] * f6 + th[7, 1] * f7
            )
            action = 1 if q_dep > q_cont else 0

        fresh_deploy = action == 1 and not deployed
        if fresh_deploy:
            deploy_step = step_idx

        if action == 1:
            ax = drag_xy * (wx - vx)
            ay = drag_xy * (wy - vy)
            az = -_GRAVITY + drag_z * (0.0 - vz)
        else:
            best_d2 = INFINITY
            best_s = 0.0
            for i in range(n_seg):
                sax = seg_a[i, 0]
                say = seg_a[i, 1]
                saz = seg_a[i, 2]
                sdx = seg_d[i, 0]
                sdy = seg_d[i, 1]
                sdz = seg_d[i, 2]
                tt = ((px - sax) * sdx + (py - say) * sdy + (pz - saz) * sdz) / seg_len2[i]
                if tt < 0.0:
                    tt = 0.0
                elif tt > 1.0:
                    tt = 1.0
                cx = sax + tt * sdx
                cy = say + tt * sdy
                cz = saz + tt * sdz
                d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy) + (pz - cz) * (pz - cz)
                if d2 < best_d2:
                    best_d2 = d2
                    best_s = cum[i] + tt * sqrt(seg_len2[i])
            s_ahead = best_s + lookahead
            if s_ahead < 0.0:
                s_ahead = 0.0
            elif s_ahead > total_len:
                s_ahead = total_len
            seg = n_seg - 1
            for i in range(n_seg):
                if s_ahead < cum[i + 1]:
                    seg = i
                    break
            frac = (s_ahead - cum[seg]) / (cum[seg + 1] - cum[seg])
            tx = seg_a[seg, 0] + frac * seg_d[seg, 0]
            ty = seg_a[seg, 1] + frac * seg_d[seg, 1]
            tz = seg_a[seg, 2] + frac * seg_d[seg, 2]

            tox = tx - px
            toy = ty - py
            toz = tz - pz
            dist = sqrt(tox * tox + toy * toy + toz * toz)
            if dist > 1e-9:
                vdx = cruise_speed * (tox / dist)
                vdy = cruise_speed * (toy / dist)
                vdz = cruise_speed * (toz / dist)
            else:
                vdx = vdy = vdz = 0.0
            ux = kp * tox + kd * (vdx - vx)
            uy = kp * toy + kd * (vdy - vy)
            uz = kp * toz + kd * (vdz - vz)
            un = sqrt(ux * ux + uy * uy + uz * uz)
            if un > a_max:
                scale = a_max / un
                ux *= scale
                uy *= scale
                uz *= scale
            ax = ux + air_drag * (wx - vx)
            ay = uy + air_drag * (wy - vy)
            az = uz + air_drag * (0.0 - vz)

        nvx = vx + dt * ax
        nvy = vy + dt * ay
        nvz = vz + dt * az
        npx = px + dt * nvx
        npy = py + dt * nvy
        npz = pz + dt * nvz
        if npz <= 0.0:
            npz = 0.0
            nvx = nvy = nvz = 0.0

        outside = not (exn0 <= npx <= exx0 and exn1 <= npy <= exx1 and exn2 <= npz <= exx2)
        if outside:
            r = -1.0
        elif fresh_deploy:
            r = -alert_penalty
        else:
            r = 0.0

        traj[step_idx, 0] = t
        traj[step_idx, 1] = px
        traj[step_idx, 2] = py
        traj[step_idx, 3] = pz
        traj[step_idx, 4] = vx
        traj[step_idx, 5] = vy
        traj[step_idx, 6] = vz
        traj[step_idx, 7] = action
        traj[step_idx, 8] = r

        px = npx
        py = npy
        pz = npz
        vx = nvx
        vy = nvy
        vz = nvz
        t += dt
        if action == 1:
            deployed = True
        step_idx += 1

        if outside:
            outcome = OUTCOME_EXITED
            break
        if not deployed:
            dx = px - wlx
            dy = py - wly
            dz = pz - wlz
            if sqrt(dx * dx + dy * dy + dz * dz) <= arrival_radius:
                outcome = OUTCOME_COMPLETED
                break
        if deployed and pz == 0.0:
            outcome = OUTCOME_GROUNDED
            break
        if step_idx >= max_steps:
            outcome = OUTCOME_TIMEOUT
            break

    traj[step_idx, 0] = t
    traj[step_idx, 1] = px
    traj[step_idx, 2] = py
    traj[step_idx, 3] = pz
    traj[step_idx, 4] = vx
    traj[step_idx, 5] = vy
    traj[step_idx, 6] = vz
    traj[step_idx, 7] = 1.0 if deployed else 0.0
    traj[step_idx, 8] = 0.0

    return traj[: step_idx + 1].copy(), outcome, deploy_step
