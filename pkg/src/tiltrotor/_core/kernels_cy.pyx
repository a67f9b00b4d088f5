# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel set; one-to-one mirror of ``kernels_py``.

Same function names, argument orders, and return shapes as the pure-Python
module so the two are interchangeable at import time.
"""

from libc.math cimport cos, exp, fabs, log, sin, sqrt

BACKEND = "cython"


cdef inline double _safe_div(double c) nogil:
    if c == 0.0:
        return 1e-300
    return c


cdef inline void _thrust(double a1, double a2, double a3, double a4,
                         double kf, double* F) nogil:
    cdef double s1 = sin(a1), s2 = sin(a2), s3 = sin(a3), s4 = sin(a4)
    cdef double c1 = cos(a1), c2 = cos(a2), c3 = cos(a3), c4 = cos(a4)
    F[0] = 0.0;        F[1] = kf * s2;  F[2] = 0.0;        F[3] = -kf * s4
    F[4] = kf * s1;    F[5] = 0.0;      F[6] = -kf * s3;   F[7] = 0.0
    F[8] = -kf * c1;   F[9] = kf * c2;  F[10] = -kf * c3;  F[11] = kf * c4


cdef inline void _torque(double a1, double a2, double a3, double a4,
                         double kf, double km, double arm, double* t) nogil:
    cdef double s1 = sin(a1), s2 = sin(a2), s3 = sin(a3), s4 = sin(a4)
    cdef double c1 = cos(a1), c2 = cos(a2), c3 = cos(a3), c4 = cos(a4)
    cdef double lk = arm * kf
    t[0] = 0.0;                  t[1] = lk * c2 - km * s2
    t[2] = 0.0;                  t[3] = -lk * c4 + km * s4
    t[4] = lk * c1 + km * s1;    t[5] = 0.0
    t[6] = -lk * c3 - km * s3;   t[7] = 0.0
    t[8] = lk * s1 - km * c1;    t[9] = -lk * s2 - km * c2
    t[10] = lk * s3 - km * c3;   t[11] = -lk * s4 - km * c4


cdef inline double _minor3(double* t, int c0, int c1, int c2) nogil:
    cdef double a = t[c0], b = t[c1], c = t[c2]
    cdef double d = t[4 + c0], e = t[4 + c1], f = t[4 + c2]
    cdef double g = t[8 + c0], h = t[8 + c1], i = t[8 + c2]
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


cdef inline void _det_coeffs(double a1, double a2, double a3, double a4,
                             double kf, double km, double arm, double* out) nogil:
    cdef double F[12]
    cdef double t[12]
    _thrust(a1, a2, a3, a4, kf, F)
    _torque(a1, a2, a3, a4, kf, km, arm, t)
    cdef double d1 = _minor3(t, 1, 2, 3)
    cdef double d2 = _minor3(t, 0, 2, 3)
    cdef double d3 = _minor3(t, 0, 1, 3)
    cdef double d4 = _minor3(t, 0, 1, 2)
    out[0] = -F[0] * d1 + F[1] * d2 - F[2] * d3 + F[3] * d4
    out[1] = -F[4] * d1 + F[5] * d2 - F[6] * d3 + F[7] * d4
    out[2] = -F[8] * d1 + F[9] * d2 - F[10] * d3 + F[11] * d4
    out[3] = d1; out[4] = d2; out[5] = d3; out[6] = d4


def thrust_entries(double a1, double a2, double a3, double a4, double kf):
    """Row-major 3x4 map from signed squared rotor speeds to body force."""
    cdef double F[12]
    _thrust(a1, a2, a3, a4, kf, F)
    return tuple(F[i] for i in range(12))


def torque_entries(double a1, double a2, double a3, double a4,
                   double kf, double km, double arm):
    """Row-major 3x4 map from signed squared rotor speeds to body torque."""
    cdef double t[12]
    _torque(a1, a2, a3, a4, kf, km, arm, t)
    return tuple(t[i] for i in range(12))


def det_coeffs(double a1, double a2, double a3, double a4,
               double kf, double km, double arm):
    """(A, B, C, D1..D4) of the determinant decomposition; see kernels_py."""
    cdef double out[7]
    _det_coeffs(a1, a2, a3, a4, kf, km, arm, out)
    return (out[0], out[1], out[2], out[3], out[4], out[5], out[6])


def ab_residual(double a1, double a2, double a3, double a4,
                double kf, double km, double arm):
    """Just the (A, B) pair of ``det_coeffs``."""
    cdef double out[7]
    _det_coeffs(a1, a2, a3, a4, kf, km, arm, out)
    return (out[0], out[1])


def newton_ab(double a1, double a2, double s3, double s4,
              double kf, double km, double arm, double tol, int max_iter):
    """Damped 2-D Newton on (A, B); same contract as the Python kernel."""
    cdef double h = 1e-6
    cdef double x0 = s3, x1 = s4
    cdef double out[7]
    cdef double fa, fb, res, ga0, gb0, ga1, gb1
    cdef double j00, j01, j10, j11, det, d0, d1, lam
    cdef double y0 = s3, y1 = s4, na, nb, nres
    cdef int it, bt
    _det_coeffs(a1, a2, x0, x1, kf, km, arm, out)
    fa = out[0]; fb = out[1]
    res = fabs(fa) + fabs(fb)
    for it in range(max_iter):
        if res < tol:
            return (x0, x1, res, 1)
        _det_coeffs(a1, a2, x0 + h, x1, kf, km, arm, out)
        ga0 = out[0]; gb0 = out[1]
        _det_coeffs(a1, a2, x0, x1 + h, kf, km, arm, out)
        ga1 = out[0]; gb1 = out[1]
        j00 = (ga0 - fa) / h
        j10 = (gb0 - fb) / h
        j01 = (ga1 - fa) / h
        j11 = (gb1 - fb) / h
        det = j00 * j11 - j01 * j10
        if det == 0.0:
            return (x0, x1, res, 0)
        d0 = -(j11 * fa - j01 * fb) / det
        d1 = -(-j10 * fa + j00 * fb) / det
        lam = 1.0
        for bt in range(8):
            y0 = x0 + lam * d0
            y1 = x1 + lam * d1
            _det_coeffs(a1, a2, y0, y1, kf, km, arm, out)
            na = out[0]; nb = out[1]
            nres = fabs(na) + fabs(nb)
            if nres <= res:
                break
            lam *= 0.5
        x0 = y0; x1 = y1; fa = na; fb = nb; res = nres
    return (x0, x1, res, 1 if res < tol else 0)


def rotation_entries(double phi, double theta, double psi):
    """Row-major body-to-world rotation matrix for Z-Y-X Euler angles."""
    cdef double cf = cos(phi), sf = sin(phi)
    cdef double ct = cos(theta), st = sin(theta)
    cdef double cp = cos(psi), sp = sin(psi)
    return (
        cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
        sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
        -st, ct * sf, ct * cf,
    )


def euler_rate_entries(double phi, double theta):
    """Row-major map from body rates to Euler-angle rates."""
    cdef double cf = cos(phi), sf = sin(phi)
    cdef double ct = _safe_div(cos(theta))
    cdef double tt = sin(theta) / ct
    return (
        1.0, sf * tt, cf * tt,
        0.0, cf, -sf,
        0.0, sf / ct, cf / ct,
    )


cdef inline void _deriv(double* s, double* al, double* w, double* pp,
                        double* out) nogil:
    cdef double m = pp[0], g = pp[1]
    cdef double F[12]
    cdef double tq[12]
    cdef double fx, fy, fz, tx, ty, tz
    cdef double cf, sf, ct, st, cp, sp, ctd, tt
    _thrust(al[0], al[1], al[2], al[3], pp[2], F)
    _torque(al[0], al[1], al[2], al[3], pp[2], pp[3], pp[4], tq)
    fx = F[0] * w[0] + F[1] * w[1] + F[2] * w[2] + F[3] * w[3]
    fy = F[4] * w[0] + F[5] * w[1] + F[6] * w[2] + F[7] * w[3]
    fz = F[8] * w[0] + F[9] * w[1] + F[10] * w[2] + F[11] * w[3]
    tx = tq[0] * w[0] + tq[1] * w[1] + tq[2] * w[2] + tq[3] * w[3]
    ty = tq[4] * w[0] + tq[5] * w[1] + tq[6] * w[2] + tq[7] * w[3]
    tz = tq[8] * w[0] + tq[9] * w[1] + tq[10] * w[2] + tq[11] * w[3]

    cf = cos(s[6]); sf = sin(s[6])
    ct = cos(s[7]); st = sin(s[7])
    cp = cos(s[8]); sp = sin(s[8])

    out[0] = s[3]; out[1] = s[4]; out[2] = s[5]
    out[3] = ((cp * ct) * fx + (cp * st * sf - sp * cf) * fy + (cp * st * cf + sp * sf) * fz) / m
    out[4] = ((sp * ct) * fx + (sp * st * sf + cp * cf) * fy + (sp * st * cf - cp * sf) * fz) / m
    out[5] = ((-st) * fx + (ct * sf) * fy + (ct * cf) * fz) / m - g

    ctd = _safe_div(ct)
    tt = st / ctd
    out[6] = s[9] + sf * tt * s[10] + cf * tt * s[11]
    out[7] = cf * s[10] - sf * s[11]
    out[8] = (sf * s[10] + cf * s[11]) / ctd

    out[9] = pp[5] * tx + pp[6] * ty + pp[7] * tz
    out[10] = pp[8] * tx + pp[9] * ty + pp[10] * tz
    out[11] = pp[11] * tx + pp[12] * ty + pp[13] * tz


cdef inline void _unpack12(object src, double* dst):
    cdef int i
    for i in range(12):
        dst[i] = src[i]


cdef inline void _unpack4(object src, double* dst):
    cdef int i
    for i in range(4):
        dst[i] = src[i]


def state_derivative(state, alpha, w, pp):
    """Time derivative of the 12-dimensional rigid-body state."""
    cdef double s[12]
    cdef double al[4]
    cdef double wv[4]
    cdef double P[14]
    cdef double out[12]
    cdef int i
    _unpack12(state, s)
    _unpack4(alpha, al)
    _unpack4(w, wv)
    for i in range(14):
        P[i] = pp[i]
    _deriv(s, al, wv, P, out)
    return tuple(out[i] for i in range(12))


def rk4_step(state, alpha_0, alpha_mid, alpha_1, w_0, w_mid, w_1, double dt, pp):
    """One classical Runge-Kutta step with inputs sampled at the stage times."""
    cdef double s[12]
    cdef double a0[4]
    cdef double am[4]
    cdef double a1v[4]
    cdef double w0[4]
    cdef double wm[4]
    cdef double w1v[4]
    cdef double P[14]
    cdef double k1[12]
    cdef double k2[12]
    cdef double k3[12]
    cdef double k4[12]
    cdef double tmp[12]
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef int i
    _unpack12(state, s)
    _unpack4(alpha_0, a0); _unpack4(alpha_mid, am); _unpack4(alpha_1, a1v)
    _unpack4(w_0, w0); _unpack4(w_mid, wm); _unpack4(w_1, w1v)
    for i in range(14):
        P[i] = pp[i]
    _deriv(s, a0, w0, P, k1)
    for i in range(12):
        tmp[i] = s[i] + half * k1[i]
    _deriv(tmp, am, wm, P, k2)
    for i in range(12):
        tmp[i] = s[i] + half * k2[i]
    _deriv(tmp, am, wm, P, k3)
    for i in range(12):
        tmp[i] = s[i] + dt * k3[i]
    _deriv(tmp, a1v, w1v, P, k4)
    return tuple(
        s[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in range(12)
    )


cdef inline double _det4(double* d) nogil:
    cdef double p01 = d[0] * d[5] - d[1] * d[4]
    cdef double p02 = d[0] * d[6] - d[2] * d[4]
    cdef double p03 = d[0] * d[7] - d[3] * d[4]
    cdef double p12 = d[1] * d[6] - d[2] * d[5]
    cdef double p13 = d[1] * d[7] - d[3] * d[5]
    cdef double p23 = d[2] * d[7] - d[3] * d[6]
    cdef double q01 = d[8] * d[13] - d[9] * d[12]
    cdef double q02 = d[8] * d[14] - d[10] * d[12]
    cdef double q03 = d[8] * d[15] - d[11] * d[12]
    cdef double q12 = d[9] * d[14] - d[10] * d[13]
    cdef double q13 = d[9] * d[15] - d[11] * d[13]
    cdef double q23 = d[10] * d[15] - d[11] * d[14]
    return p01 * q23 - p02 * q13 + p03 * q12 + p12 * q03 - p13 * q02 + p23 * q01


def decoupling(double phi, double theta, double p, double q, double r, alpha, pp):
    """Decoupling matrix, drift vector, determinant, and row-norm scale."""
    cdef double al[4]
    cdef double P[14]
    cdef double T[9]
    cdef double tq[12]
    cdef double F[12]
    cdef double d[16]
    cdef int i, j
    _unpack4(alpha, al)
    for i in range(14):
        P[i] = pp[i]
    cdef double m = P[0], g = P[1]
    cdef double cf = cos(phi), sf = sin(phi)
    cdef double ct = cos(theta), st = sin(theta)
    cdef double ctd = _safe_div(ct)
    cdef double tt = st / ctd
    T[0] = 1.0; T[1] = sf * tt; T[2] = cf * tt
    T[3] = 0.0; T[4] = cf;      T[5] = -sf
    T[6] = 0.0; T[7] = sf / ctd; T[8] = cf / ctd

    cdef double m00 = T[0] * P[5] + T[1] * P[8] + T[2] * P[11]
    cdef double m01 = T[0] * P[6] + T[1] * P[9] + T[2] * P[12]
    cdef double m02 = T[0] * P[7] + T[1] * P[10] + T[2] * P[13]
    cdef double m10 = T[3] * P[5] + T[4] * P[8] + T[5] * P[11]
    cdef double m11 = T[3] * P[6] + T[4] * P[9] + T[5] * P[12]
    cdef double m12 = T[3] * P[7] + T[4] * P[10] + T[5] * P[13]
    cdef double m20 = T[6] * P[5] + T[7] * P[8] + T[8] * P[11]
    cdef double m21 = T[6] * P[6] + T[7] * P[9] + T[8] * P[12]
    cdef double m22 = T[6] * P[7] + T[7] * P[10] + T[8] * P[13]

    _torque(al[0], al[1], al[2], al[3], P[2], P[3], P[4], tq)
    _thrust(al[0], al[1], al[2], al[3], P[2], F)

    cdef double c0, c1, c2
    for j in range(4):
        c0 = tq[j]; c1 = tq[4 + j]; c2 = tq[8 + j]
        d[j] = m00 * c0 + m01 * c1 + m02 * c2
        d[4 + j] = m10 * c0 + m11 * c1 + m12 * c2
        d[8 + j] = m20 * c0 + m21 * c1 + m22 * c2

    cdef double r30 = -st, r31 = ct * sf, r32 = ct * cf
    for j in range(4):
        d[12 + j] = (r30 * F[j] + r31 * F[4 + j] + r32 * F[8 + j]) / m

    cdef double dphi = T[0] * p + T[1] * q + T[2] * r
    cdef double dtheta = T[3] * p + T[4] * q + T[5] * r
    cdef double sec2 = 1.0 / (ctd * ctd)
    cdef double td00 = cf * tt * dphi + sf * sec2 * dtheta
    cdef double td01 = -sf * tt * dphi + cf * sec2 * dtheta
    cdef double td10 = -sf * dphi
    cdef double td11 = -cf * dphi
    cdef double td20 = cf / ctd * dphi + sf * st * sec2 * dtheta
    cdef double td21 = -sf / ctd * dphi + cf * st * sec2 * dtheta
    cdef double b0 = td00 * q + td01 * r
    cdef double b1 = td10 * q + td11 * r
    cdef double b2 = td20 * q + td21 * r

    cdef double det = _det4(d)
    cdef double n0 = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3])
    cdef double n1 = sqrt(d[4] * d[4] + d[5] * d[5] + d[6] * d[6] + d[7] * d[7])
    cdef double n2 = sqrt(d[8] * d[8] + d[9] * d[9] + d[10] * d[10] + d[11] * d[11])
    cdef double n3 = sqrt(d[12] * d[12] + d[13] * d[13] + d[14] * d[14] + d[15] * d[15])
    cdef double scale = 0.0
    if n0 > 0.0 and n1 > 0.0 and n2 > 0.0 and n3 > 0.0:
        scale = exp(0.25 * (log(n0) + log(n1) + log(n2) + log(n3)))
    return (
        tuple(d[i] for i in range(16)),
        (b0, b1, b2, -g),
        det,
        scale,
    )


def solve4(dd, rhs):
    """Solve the 4x4 system by Gaussian elimination with partial pivoting."""
    cdef double a[4][5]
    cdef int i, j, col, row, piv
    cdef double best, v, f, s
    for i in range(4):
        for j in range(4):
            a[i][j] = dd[4 * i + j]
        a[i][4] = rhs[i]
    for col in range(4):
        piv = col
        best = fabs(a[col][col])
        for row in range(col + 1, 4):
            v = fabs(a[row][col])
            if v > best:
                best = v; piv = row
        if best == 0.0:
            raise ArithmeticError("singular 4x4 system")
        if piv != col:
            for j in range(5):
                v = a[col][j]; a[col][j] = a[piv][j]; a[piv][j] = v
        for row in range(col + 1, 4):
            f = a[row][col] / a[col][col]
            if f != 0.0:
                for j in range(col, 5):
                    a[row][j] -= f * a[col][j]
    cdef double x[4]
    for row in range(3, -1, -1):
        s = a[row][4]
        for j in range(row + 1, 4):
            s -= a[row][j] * x[j]
        x[row] = s / a[row][row]
    return (x[0], x[1], x[2], x[3])
