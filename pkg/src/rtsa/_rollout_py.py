"""Pure-Python episode rollout kernel.

Reference implementation of the hot inner loop: one full episode under a
fixed policy (never-deploy, distance-threshold, or greedy linear weights).
The compiled kernel in ``_rollout_cy`` performs the same arithmetic in the
same order; ``rtsa.fastpath`` picks whichever is available at import time.

Scalar math only in the loop body, so the compiled twin can mirror it
operation for operation.
"""

from __future__ import annotations

import math

import numpy as np

POLICY_NOMINAL = 0
POLICY_BASELINE = 1
POLICY_WEIGHTS = 2

OUTCOME_COMPLETED = 1
OUTCOME_EXITED = 2
OUTCOME_GROUNDED = 3
OUTCOME_TIMEOUT = 4

_GRAVITY = 9.81


def rollout(
    env_min,
    env_max,
    waypoints,
    arrival_radius,
    dt,
    a_max,
    cruise_speed,
    lookahead,
    kp,
    kd,
    air_drag,
    drag_z,
    drag_xy,
    max_steps,
    wind_params,
    policy_mode,
    delta,
    theta,
    scales,
    alert_penalty,
):
    """Run one episode; returns (trajectory, outcome, deploy_step).

    ``wind_params`` is (base_x, base_y, amp_x, amp_y, freq_x, freq_y,
    phase_x, phase_y). The trajectory has one row per step plus a final
    state row: (t, px, py, pz, vx, vy, vz, action, reward). ``deploy_step``
    is -1 if the recovery controller was never deployed.
    """
    exn0, exn1, exn2 = float(env_min[0]), float(env_min[1]), float(env_min[2])
    exx0, exx1, exx2 = float(env_max[0]), float(env_max[1]), float(env_max[2])
    wps = np.asarray(waypoints, dtype=float)
    n_seg = len(wps) - 1
    seg_a = [(float(wps[i, 0]), float(wps[i, 1]), float(wps[i, 2])) for i in range(n_seg)]
    seg_d = [
        (
            float(wps[i + 1, 0] - wps[i, 0]),
            float(wps[i + 1, 1] - wps[i, 1]),
            float(wps[i + 1, 2] - wps[i, 2]),
        )
        for i in range(n_seg)
    ]
    seg_len2 = [d[0] * d[0] + d[1] * d[1] + d[2] * d[2] for d in seg_d]
    cum = [0.0]
    for i in range(n_seg):
        cum.append(cum[i] + math.sqrt(seg_len2[i]))
    total_len = cum[n_seg]
    wlx, wly, wlz = float(wps[-1, 0]), float(wps[-1, 1]), float(wps[-1, 2])

    bw0, bw1, ga0, ga1, gf0, gf1, gp0, gp1 = (float(x) for x in wind_params)
    th = np.asarray(theta, dtype=float)
    sc = [float(x) for x in scales]
    dt = float(dt)
    max_steps = int(max_steps)

    px, py, pz = float(wps[0, 0]), float(wps[0, 1]), float(wps[0, 2])
    vx = vy = vz = 0.0
    t = 0.0
    deployed = False
    deploy_step = -1

    traj = np.empty((max_steps + 1, 9))
    step_idx = 0
    outcome = OUTCOME_TIMEOUT

    while True:
        wx = bw0 + ga0 * math.sin(gf0 * t + gp0)
        wy = bw1 + ga1 * math.sin(gf1 * t + gp1)

        # Meta decision (one-way switch).
        if deployed:
            action = 1
        elif policy_mode == POLICY_NOMINAL:
            action = 0
        elif policy_mode == POLICY_BASELINE:
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
        else:
            f0 = min(px - exn0, exx0 - px) / sc[0]
            f1 = min(py - exn1, exx1 - py) / sc[1]
            f2 = min(pz - exn2, exx2 - pz) / sc[2]
            f3 = vx / sc[3]
            f4 = vy / sc[4]
            f5 = vz / sc[5]
            f6 = wx / sc[6]
            f7 = wy / sc[7]
            # Indicator feature is 0 here: this branch is unreachable once deployed.
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

        # Dynamics.
        if action == 1:
            ax = drag_xy * (wx - vx)
            ay = drag_xy * (wy - vy)
            az = -_GRAVITY + drag_z * (0.0 - vz)
        else:
            # Project onto the path (earliest segment wins ties).
            best_d2 = math.inf
            best_s = 0.0
            for i in range(n_seg):
                sax, say, saz = seg_a[i]
                sdx, sdy, sdz = seg_d[i]
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
                    best_s = cum[i] + tt * math.sqrt(seg_len2[i])
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
            tx = seg_a[seg][0] + frac * seg_d[seg][0]
            ty = seg_a[seg][1] + frac * seg_d[seg][1]
            tz = seg_a[seg][2] + frac * seg_d[seg][2]

            tox = tx - px
            toy = ty - py
            toz = tz - pz
            dist = math.sqrt(tox * tox + toy * toy + toz * toz)
            if dist > 1e-9:
                vdx = cruise_speed * (tox / dist)
                vdy = cruise_speed * (toy / dist)
                vdz = cruise_speed * (toz / dist)
            else:
                vdx = vdy = vdz = 0.0
            ux = kp * tox + kd * (vdx - vx)
            uy = kp * toy + kd * (vdy - vy)
            uz = kp * toz + kd * (vdz - vz)
            un = math.sqrt(ux * ux + uy * uy + uz * uz)
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

        row = traj[step_idx]
        row[0] = t
        row[1] = px
        row[2] = py
        row[3] = pz
        row[4] = vx
        row[5] = vy
        row[6] = vz
        row[7] = action
        row[8] = r

        px, py, pz = npx, npy, npz
        vx, vy, vz = nvx, nvy, nvz
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
            if math.sqrt(dx * dx + dy * dy + dz * dz) <= arrival_radius:
                outcome = OUTCOME_COMPLETED
                break
        if deployed and pz == 0.0:
            outcome = OUTCOME_GROUNDED
            break
        if step_idx >= max_steps:
            outcome = OUTCOME_TIMEOUT
            break

    row = traj[step_idx]
    row[0] = t
    row[1] = px
    row[2] = py
    row[3] = pz
    row[4] = vx
    row[5] = vy
    row[6] = vz
    row[7] = 1.0 if deployed else 0.0
    row[8] = 0.0

    return traj[: step_idx + 1].copy(), outcome, deploy_step
