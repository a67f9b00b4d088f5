"""Pure-Python kernel set: the hot math of the package.

Every function here operates on plain floats and tuples so the fallback
stays reasonably fast without numpy call overhead.  The compiled module
``kernels_cy`` mirrors this file one-to-one; :mod:`tiltrotor._core`
selects one of the two at import time.

Conventions baked into the kernels:

* Euler angles are Z-Y-X (yaw, pitch, roll), ``R = Rz(psi) @ Ry(theta) @ Rx(phi)``.
* ``state`` is the 12-tuple ``(x, y, z, vx, vy, vz, phi, theta, psi, p, q, r)``.
* ``pp`` is the parameter pack
  ``(m, g, kf, km, arm, i00, i01, i02, i10, i11, i12, i20, i21, i22)``
  with ``i..`` the row-major inverse inertia matrix.
"""

from math import cos, exp, log, sin, sqrt

BACKEND = "python"


def _safe_div(c: float) -> float:
    # keeps 1/cos(theta) finite if an integrator stage lands exactly on pi/2
    if c == 0.0:
        return 1e-300
    return c


def thrust_entries(a1, a2, a3, a4, kf):
    """Row-major 3x4 map from signed squared rotor speeds to body force."""
    s1, s2, s3, s4 = sin(a1), sin(a2), sin(a3), sin(a4)
    c1, c2, c3, c4 = cos(a1), cos(a2), cos(a3), cos(a4)
    return (
        0.0, kf * s2, 0.0, -kf * s4,
        kf * s1, 0.0, -kf * s3, 0.0,
        -kf * c1, kf * c2, -kf * c3, kf * c4,
    )


def torque_entries(a1, a2, a3, a4, kf, km, arm):
    """Row-major 3x4 map from signed squared rotor speeds to body torque."""
    s1, s2, s3, s4 = sin(a1), sin(a2), sin(a3), sin(a4)
    c1, c2, c3, c4 = cos(a1), cos(a2), cos(a3), cos(a4)
    lk = arm * kf
    return (
        0.0, lk * c2 - km * s2, 0.0, -lk * c4 + km * s4,
        lk * c1 + km * s1, 0.0, -lk * c3 - km * s3, 0.0,
        lk * s1 - km * c1, -lk * s2 - km * c2, lk * s3 - km * c3, -lk * s4 - km * c4,
    )


def det_coeffs(a1, a2, a3, a4, kf, km, arm):
    """Attitude-independent coefficients of the decoupling-matrix determinant.

    Returns ``(A, B, C, D1, D2, D3, D4)`` where ``Dj`` is the 3x3 minor of
    the torque map with column ``j`` removed and ``A``, ``B``, ``C`` are the
    cofactor sums of the three thrust-map rows against those minors.
    """
    F = thrust_entries(a1, a2, a3, a4, kf)
    t = torque_entries(a1, a2, a3, a4, kf, km, arm)

    def minor3(c0, c1, c2):
        # det of the 3x3 whose columns are torque columns c0, c1, c2
        a, b, c = t[0 + c0], t[0 + c1], t[0 + c2]
        d, e, f = t[4 + c0], t[4 + c1], t[4 + c2]
        g, h, i = t[8 + c0], t[8 + c1], t[8 + c2]
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    d1 = minor3(1, 2, 3)
    d2 = minor3(0, 2, 3)
    d3 = minor3(0, 1, 3)
    d4 = minor3(0, 1, 2)
    A = -F[0] * d1 + F[1] * d2 - F[2] * d3 + F[3] * d4
    B = -F[4] * d1 + F[5] * d2 - F[6] * d3 + F[7] * d4
    C = -F[8] * d1 + F[9] * d2 - F[10] * d3 + F[11] * d4
    return A, B, C, d1, d2, d3, d4


def ab_residual(a1, a2, a3, a4, kf, km, arm):
    """Just the (A, B) pair of ``det_coeffs`` (hot path of the branch solver)."""
    out = det_coeffs(a1, a2, a3, a4, kf, km, arm)
    return out[0], out[1]


def newton_ab(a1, a2, s3, s4, kf, km, arm, tol, max_iter):
    """Damped 2-D Newton for A(a3, a4) = B(a3, a4) = 0 at fixed (a1, a2).

    Finite-difference Jacobian with a 1e-6 rad step; step backtracking
    halves up to 8 times while |A| + |B| does not decrease.

    Returns ``(a3, a4, residual, converged)`` with ``residual = |A| + |B|``.
    """
    h = 1e-6
    x0, x1 = s3, s4
    fa, fb = ab_residual(a1, a2, x0, x1, kf, km, arm)
    res = abs(fa) + abs(fb)
    for _ in range(max_iter):
        if res < tol:
            return x0, x1, res, 1
        ga0, gb0 = ab_residual(a1, a2, x0 + h, x1, kf, km, arm)
        ga1, gb1 = ab_residual(a1, a2, x0, x1 + h, kf, km, arm)
        j00 = (ga0 - fa) / h
        j10 = (gb0 - fb) / h
        j01 = (ga1 - fa) / h
        j11 = (gb1 - fb) / h
        det = j00 * j11 - j01 * j10
        if det == 0.0:
            return x0, x1, res, 0
        d0 = -(j11 * fa - j01 * fb) / det
        d1 = -(-j10 * fa + j00 * fb) / det
        lam = 1.0
        for _ in range(8):
            y0, y1 = x0 + lam * d0, x1 + lam * d1
            na, nb = ab_residual(a1, a2, y0, y1, kf, km, arm)
            nres = abs(na) + abs(nb)
            if nres <= res:
                break
            lam *= 0.5
        x0, x1, fa, fb, res = y0, y1, na, nb, nres
    return x0, x1, res, 1 if res < tol else 0


def rotation_entries(phi, theta, psi):
    """Row-major body-to-world rotation matrix for Z-Y-X Euler angles."""
    cf, sf = cos(phi), sin(phi)
    ct, st = cos(theta), sin(theta)
    cp, sp = cos(psi), sin(psi)
    return (
        cp * ct, cp * st * sf - sp * cf, cp * st * cf + sp * sf,
        sp * ct, sp * st * sf + cp * cf, sp * st * cf - cp * sf,
        -st, ct * sf, ct * cf,
    )


def euler_rate_entries(phi, theta):
    """Row-major map from body rates to Euler-angle rates (yaw-independent)."""
    cf, sf = cos(phi), sin(phi)
    ct = _safe_div(cos(theta))
    tt = sin(theta) / ct
    return (
        1.0, sf * tt, cf * tt,
        0.0, cf, -sf,
        0.0, sf / ct, cf / ct,
    )


def state_derivative(state, alpha, w, pp):
    """Time derivative of the 12-dimensional rigid-body state."""
    m, g = pp[0], pp[1]
    kf, km, arm = pp[2], pp[3], pp[4]
    vx, vy, vz = state[3], state[4], state[5]
    phi, theta, psi = state[6], state[7], state[8]
    p, q, r = state[9], state[10], state[11]
    w1, w2, w3, w4 = w

    F = thrust_entries(alpha[0], alpha[1], alpha[2], alpha[3], kf)
    fx = F[0] * w1 + F[1] * w2 + F[2] * w3 + F[3] * w4
    fy = F[4] * w1 + F[5] * w2 + F[6] * w3 + F[7] * w4
    fz = F[8] * w1 + F[9] * w2 + F[10] * w3 + F[11] * w4

    R = rotation_entries(phi, theta, psi)
    ax = (R[0] * fx + R[1] * fy + R[2] * fz) / m
    ay = (R[3] * fx + R[4] * fy + R[5] * fz) / m
    az = (R[6] * fx + R[7] * fy + R[8] * fz) / m - g

    T = euler_rate_entries(phi, theta)
    dphi = T[0] * p + T[1] * q + T[2] * r
    dtheta = T[3] * p + T[4] * q + T[5] * r
    dpsi = T[6] * p + T[7] * q + T[8] * r

    tq = torque_entries(alpha[0], alpha[1], alpha[2], alpha[3], kf, km, arm)
    tx = tq[0] * w1 + tq[1] * w2 + tq[2] * w3 + tq[3] * w4
    ty = tq[4] * w1 + tq[5] * w2 + tq[6] * w3 + tq[7] * w4
    tz = tq[8] * w1 + tq[9] * w2 + tq[10] * w3 + tq[11] * w4
    dp = pp[5] * tx + pp[6] * ty + pp[7] * tz
    dq = pp[8] * tx + pp[9] * ty + pp[10] * tz
    dr = pp[11] * tx + pp[12] * ty + pp[13] * tz

    return (vx, vy, vz, ax, ay, az, dphi, dtheta, dpsi, dp, dq, dr)


def rk4_step(state, alpha_0, alpha_mid, alpha_1, w_0, w_mid, w_1, dt, pp):
    """One classical Runge-Kutta step with inputs sampled at the stage times."""
    half = 0.5 * dt
    k1 = state_derivative(state, alpha_0, w_0, pp)
    s2 = tuple(state[i] + half * k1[i] for i in range(12))
    k2 = state_derivative(s2, alpha_mid, w_mid, pp)
    s3 = tuple(state[i] + half * k2[i] for i in range(12))
    k3 = state_derivative(s3, alpha_mid, w_mid, pp)
    s4 = tuple(state[i] + dt * k3[i] for i in range(12))
    k4 = state_derivative(s4, alpha_1, w_1, pp)
    sixth = dt / 6.0
    return tuple(
        state[i] + sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in range(12)
    )


def decoupling(phi, theta, p, q, r, alpha, pp):
    """Decoupling matrix, drift vector, determinant, and row-norm scale.

    Returns ``(delta, b, det, scale)`` where ``delta`` is the row-major 4x4
    matrix mapping signed squared rotor speeds to (roll'', pitch'', yaw'',
    altitude'') contributions, ``b`` is the matching drift 4-vector, and
    ``scale`` is the geometric mean of the four row norms of ``delta``.
    """
    m, g = pp[0], pp[1]
    kf, km, arm = pp[2], pp[3], pp[4]
    T = euler_rate_entries(phi, theta)
    # M = T @ inv(I_B)
    m00 = T[0] * pp[5] + T[1] * pp[8] + T[2] * pp[11]
    m01 = T[0] * pp[6] + T[1] * pp[9] + T[2] * pp[12]
    m02 = T[0] * pp[7] + T[1] * pp[10] + T[2] * pp[13]
    m10 = T[3] * pp[5] + T[4] * pp[8] + T[5] * pp[11]
    m11 = T[3] * pp[6] + T[4] * pp[9] + T[5] * pp[12]
    m12 = T[3] * pp[7] + T[4] * pp[10] + T[5] * pp[13]
    m20 = T[6] * pp[5] + T[7] * pp[8] + T[8] * pp[11]
    m21 = T[6] * pp[6] + T[7] * pp[9] + T[8] * pp[12]
    m22 = T[6] * pp[7] + T[7] * pp[10] + T[8] * pp[13]

    tq = torque_entries(alpha[0], alpha[1], alpha[2], alpha[3], kf, km, arm)
    F = thrust_entries(alpha[0], alpha[1], alpha[2], alpha[3], kf)

    d = [0.0] * 16
    for j in range(4):
        c0, c1, c2 = tq[j], tq[4 + j], tq[8 + j]
        d[j] = m00 * c0 + m01 * c1 + m02 * c2
        d[4 + j] = m10 * c0 + m11 * c1 + m12 * c2
        d[8 + j] = m20 * c0 + m21 * c1 + m22 * c2

    # fourth row: world vertical acceleration per unit input
    sf, cf = sin(phi), cos(phi)
    st, ct = sin(theta), cos(theta)
    r30, r31, r32 = -st, ct * sf, ct * cf
    for j in range(4):
        d[12 + j] = (r30 * F[j] + r31 * F[4 + j] + r32 * F[8 + j]) / m

    # drift: Tdot(eta, etadot) @ omega with etadot = T @ omega, plus gravity
    dphi = T[0] * p + T[1] * q + T[2] * r
    dtheta = T[3] * p + T[4] * q + T[5] * r
    ctd = _safe_div(ct)
    tt = st / ctd
    sec2 = 1.0 / (ctd * ctd)
    td00 = cf * tt * dphi + sf * sec2 * dtheta
    td01 = -sf * tt * dphi + cf * sec2 * dtheta
    td10 = -sf * dphi
    td11 = -cf * dphi
    td20 = cf / ctd * dphi + sf * st * sec2 * dtheta
    td21 = -sf / ctd * dphi + cf * st * sec2 * dtheta
    b = (
        td00 * q + td01 * r,
        td10 * q + td11 * r,
        td20 * q + td21 * r,
        -g,
    )

    det = _det4(d)
    n0 = sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + d[3] * d[3])
    n1 = sqrt(d[4] * d[4] + d[5] * d[5] + d[6] * d[6] + d[7] * d[7])
    n2 = sqrt(d[8] * d[8] + d[9] * d[9] + d[10] * d[10] + d[11] * d[11])
    n3 = sqrt(d[12] * d[12] + d[13] * d[13] + d[14] * d[14] + d[15] * d[15])
    if n0 > 0.0 and n1 > 0.0 and n2 > 0.0 and n3 > 0.0:
        scale = exp(0.25 * (log(n0) + log(n1) + log(n2) + log(n3)))
    else:
        scale = 0.0
    return tuple(d), b, det, scale


def _det4(d):
    # Laplace expansion over the first two rows (2x2 complementary minors)
    p01 = d[0] * d[5] - d[1] * d[4]
    p02 = d[0] * d[6] - d[2] * d[4]
    p03 = d[0] * d[7] - d[3] * d[4]
    p12 = d[1] * d[6] - d[2] * d[5]
    p13 = d[1] * d[7] - d[3] * d[5]
    p23 = d[2] * d[7] - d[3] * d[6]
    q01 = d[8] * d[13] - d[9] * d[12]
    q02 = d[8] * d[14] - d[10] * d[12]
    q03 = d[8] * d[15] - d[11] * d[12]
    q12 = d[9] * d[14] - d[10] * d[13]
    q13 = d[9] * d[15] - d[11] * d[13]
    q23 = d[10] * d[15] - d[11] * d[14]
    return p01 * q23 - p02 * q13 + p03 * q12 + p12 * q03 - p13 * q02 + p23 * q01


def solve4(d, rhs):
    """Solve the 4x4 system ``d @ x = rhs`` by Gaussian elimination.

    Partial pivoting; raises ``ArithmeticError`` on an exactly zero pivot.
    """
    a = [
        [d[0], d[1], d[2], d[3], rhs[0]],
        [d[4], d[5], d[6], d[7], rhs[1]],
        [d[8], d[9], d[10], d[11], rhs[2]],
        [d[12], d[13], d[14], d[15], rhs[3]],
    ]
    for col in range(4):
        piv = col
        best = abs(a[col][col])
        for row in range(col + 1, 4):
            v = abs(a[row][col])
            if v > best:
                best, piv = v, row
        if best == 0.0:
            raise ArithmeticError("singular 4x4 system")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        prow = a[col]
        inv = 1.0 / prow[col]
        for row in range(col + 1, 4):
            f = a[row][col] * inv
            if f != 0.0:
                arow = a[row]
                for k in range(col, 5):
                    arow[k] -= f * prow[k]
    x = [0.0] * 4
    for row in (3, 2, 1, 0):
        s = a[row][4]
        for k in range(row + 1, 4):
            s -= a[row][k] * x[k]
        x[row] = s / a[row][row]
    return tuple(x)
