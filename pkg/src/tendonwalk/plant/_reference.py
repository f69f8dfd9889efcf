"""Pure-Python step kernel; the compiled kernel in _core.pyx mirrors this
line for line so both engines produce identical trajectories."""

from math import cos, isfinite, sin


def rollout(par, q, qd, hip_x, n_sub, pwm_l, pwm_r,
            q_out, qd_out, foot_out, contact_out, limit_out, hipx_out):
    """Integrate n ticks; returns -1 on success or the failing tick index.

    par is a list of floats from PlantParams.flat(); q, qd and pwm_* are
    nested lists mutated/read with plain float arithmetic.  Outputs are
    preallocated numpy arrays filled per control tick.
    """
    l1 = par[0]
    l2 = par[1]
    A = par[2]
    B = par[3]
    C = par[4]
    g1 = par[5]
    g2 = par[6]
    d1 = par[7]
    d2 = par[8]
    kpwm = par[9]
    r00 = par[10]
    r01 = par[11]
    r10 = par[12]
    r11 = par[13]
    r20 = par[14]
    r21 = par[15]
    kg = par[16]
    cg = par[17]
    mu = par[18]
    h = par[19]
    hip_h = par[20]
    hip_lo = par[21]
    hip_hi = par[22]
    knee_lo = par[23]
    knee_hi = par[24]
    qd_max = par[25]
    band = par[26]

    n = len(pwm_l)
    tau = [[0.0, 0.0], [0.0, 0.0]]
    xdot = [0.0, 0.0]
    touching = [False, False]

    for i in range(n):
        for leg in range(2):
            row = pwm_l[i] if leg == 0 else pwm_r[i]
            f0 = kpwm * row[0]
            f1 = kpwm * row[1]
            f2 = kpwm * row[2]
            tau[leg][0] = f0 * r00 + f1 * r10 + f2 * r20
            tau[leg][1] = f0 * r01 + f1 * r11 + f2 * r21

        limit_l = 0
        limit_r = 0
        for _ in range(n_sub):
            for leg in range(2):
                qleg = q[leg]
                qdleg = qd[leg]
                q1 = qleg[0]
                q2 = qleg[1]
                qd1 = qdleg[0]
                qd2 = qdleg[1]

                s1 = sin(q1)
                c1 = cos(q1)
                s2 = sin(q2)
                c2 = cos(q2)
                s12 = sin(q1 - q2)
                c12 = cos(q1 - q2)

                # unilateral ground contact on the foot point
                pen = (l1 * c1 + l2 * c12) - hip_h
                jz1 = -l1 * s1 - l2 * s12
                jz2 = l2 * s12
                if pen > 0.0:
                    nf = kg * pen + cg * (jz1 * qd1 + jz2 * qd2)
                    if nf < 0.0:
                        nf = 0.0
                else:
                    nf = 0.0
                touching[leg] = pen > -band

                m11 = A + B + 2.0 * C * c2
                m12 = -(B + C * c2)
                m22 = B
                b1 = -2.0 * C * s2 * qd1 * qd2 + C * s2 * qd2 * qd2 + g1 * s1 + g2 * s12
                b2 = C * s2 * qd1 * qd1 - g2 * s12
                t1 = tau[leg][0] - jz1 * nf - d1 * qd1 - b1
                t2 = tau[leg][1] - jz2 * nf - d2 * qd2 - b2
                det = m11 * m22 - m12 * m12
                qdd1 = (m22 * t1 - m12 * t2) / det
                qdd2 = (m11 * t2 - m12 * t1) / det

                qd1 = qd1 + qdd1 * h
                qd2 = qd2 + qdd2 * h
                xdot[leg] = (l1 * c1 + l2 * c12) * qd1 - l2 * c12 * qd2
                q1 = q1 + qd1 * h
                q2 = q2 + qd2 * h

                # hard stops: inelastic constraint impulses through the
                # inertia coupling, so stops only remove energy
                if q1 < hip_lo:
                    q1 = hip_lo
                    if qd1 < 0.0:
                        qd2 = qd2 + (m12 / m22) * qd1
                        qd1 = 0.0
                    if leg == 0:
                        limit_l = 1
                    else:
                        limit_r = 1
                elif q1 > hip_hi:
                    q1 = hip_hi
                    if qd1 > 0.0:
                        qd2 = qd2 + (m12 / m22) * qd1
                        qd1 = 0.0
                    if leg == 0:
                        limit_l = 1
                    else:
                        limit_r = 1
                if q2 < knee_lo:
                    q2 = knee_lo
                    if qd2 < 0.0:
                        qd1 = qd1 + (m12 / m11) * qd2
                        qd2 = 0.0
                    if leg == 0:
                        limit_l = 1
                    else:
                        limit_r = 1
                elif q2 > knee_hi:
                    q2 = knee_hi
                    if qd2 > 0.0:
                        qd1 = qd1 + (m12 / m11) * qd2
                        qd2 = 0.0
                    if leg == 0:
                        limit_l = 1
                    else:
                        limit_r = 1

                qleg[0] = q1
                qleg[1] = q2
                qdleg[0] = qd1
                qdleg[1] = qd2

            # stance anchoring: a backward-sweeping foot in contact drags
            # the hip forward; forward-sweeping contact freewheels
            if touching[0] and touching[1]:
                w0 = -xdot[0] if xdot[0] < 0.0 else 0.0
                w1 = -xdot[1] if xdot[1] < 0.0 else 0.0
                hip_x = hip_x + 0.5 * (w0 + w1) * mu * h
            elif touching[0]:
                w0 = -xdot[0] if xdot[0] < 0.0 else 0.0
                hip_x = hip_x + w0 * mu * h
            elif touching[1]:
                w1 = -xdot[1] if xdot[1] < 0.0 else 0.0
                hip_x = hip_x + w1 * mu * h

        bad = 0
        for leg in range(2):
            q1 = q[leg][0]
            q2 = q[leg][1]
            qd1 = qd[leg][0]
            qd2 = qd[leg][1]
            fx = l1 * sin(q1) + l2 * sin(q1 - q2)
            fz = l1 * cos(q1) + l2 * cos(q1 - q2)
            q_out[i, leg, 0] = q1
            q_out[i, leg, 1] = q2
            qd_out[i, leg, 0] = qd1
            qd_out[i, leg, 1] = qd2
            foot_out[i, leg, 0] = fx
            foot_out[i, leg, 1] = fz
            contact_out[i, leg] = 1 if fz - hip_h > -band else 0
            if not (isfinite(qd1) and isfinite(qd2) and isfinite(q1) and isfinite(q2)):
                bad = 1
            if abs(qd1) > qd_max or abs(qd2) > qd_max:
                bad = 1
        limit_out[i, 0] = limit_l
        limit_out[i, 1] = limit_r
        hipx_out[i] = hip_x
        if bad:
            return i
    return -1
