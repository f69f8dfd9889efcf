# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled step kernel; mirrors _reference.rollout line for line."""

from libc.math cimport cos, fabs, isfinite, sin


def rollout(double[::1] par, double[:, ::1] q, double[:, ::1] qd,
            double hip_x, int n_sub,
            double[:, ::1] pwm_l, double[:, ::1] pwm_r,
            double[:, :, ::1] q_out, double[:, :, ::1] qd_out,
            double[:, :, ::1] foot_out,
            unsigned char[:, ::1] contact_out, unsigned char[:, ::1] limit_out,
            double[::1] hipx_out):
    cdef double l1 = par[0]
    cdef double l2 = par[1]
    cdef double A = par[2]
    cdef double B = par[3]
    cdef double C = par[4]
    cdef double g1 = par[5]
    cdef double g2 = par[6]
    cdef double d1 = par[7]
    cdef double d2 = par[8]
    cdef double kpwm = par[9]
    cdef double r00 = par[10]
    cdef double r01 = par[11]
    cdef double r10 = par[12]
    cdef double r11 = par[13]
    cdef double r20 = par[14]
    cdef double r21 = par[15]
    cdef double kg = par[16]
    cdef double cg = par[17]
    cdef double mu = par[18]
    cdef double h = par[19]
    cdef double hip_h = par[20]
    cdef double hip_lo = par[21]
    cdef double hip_hi = par[22]
    cdef double knee_lo = par[23]
    cdef double knee_hi = par[24]
    cdef double qd_max = par[25]
    cdef double band = par[26]

    cdef Py_ssize_t n = pwm_l.shape[0]
    cdef Py_ssize_t i, leg, sub
    cdef double tau[2][2]
    cdef double xdot[2]
    cdef int touching[2]
    cdef double f0, f1, f2
    cdef double q1, q2, qd1, qd2
    cdef double s1, c1, s2, c2, s12, c12
    cdef double pen, jz1, jz2, nf
    cdef double m11, m12, m22, b1, b2, t1, t2, det, qdd1, qdd2
    cdef double w0, w1, fx, fz
    cdef int limit_l, limit_r, bad

    for i in range(n):
        for leg in range(2):
            if leg == 0:
                f0 = kpwm * pwm_l[i, 0]
                f1 = kpwm * pwm_l[i, 1]
                f2 = kpwm * pwm_l[i, 2]
            else:
                f0 = kpwm * pwm_r[i, 0]
                f1 = kpwm * pwm_r[i, 1]
                f2 = kpwm * pwm_r[i, 2]
            tau[leg][0] = f0 * r00 + f1 * r10 + f2 * r20
            tau[leg][1] = f0 * r01 + f1 * r11 + f2 * r21

        limit_l = 0
        limit_r = 0
        for sub in range(n_sub):
            for leg in range(2):
                q1 = q[leg, 0]
                q2 = q[leg, 1]
                qd1 = qd[leg, 0]
                qd2 = qd[leg, 1]

                s1 = sin(q1)
                c1 = cos(q1)
                s2 = sin(q2)
                c2 = cos(q2)
                s12 = sin(q1 - q2)
                c12 = cos(q1 - q2)

                pen = (l1 * c1 + l2 * c12) - hip_h
                jz1 = -l1 * s1 - l2 * s12
                jz2 = l2 * s12
                if pen > 0.0:
                    nf = kg * pen + cg * (jz1 * qd1 + jz2 * qd2)
                    if nf < 0.0:
                        nf = 0.0
                else:
                    nf = 0.0
                touching[leg] = 1 if pen > -band else 0

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

                q[leg, 0] = q1
                q[leg, 1] = q2
                qd[leg, 0] = qd1
                qd[leg, 1] = qd2

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
            q1 = q[leg, 0]
            q2 = q[leg, 1]
            qd1 = qd[leg, 0]
            qd2 = qd[leg, 1]
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
            if fabs(qd1) > qd_max or fabs(qd2) > qd_max:
                bad = 1
        limit_out[i, 0] = limit_l
        limit_out[i, 1] = limit_r
        hipx_out[i] = hip_x
        if bad:
            return i
    return -1
