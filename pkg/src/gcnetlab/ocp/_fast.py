"""Jitted augmented dynamics and adaptive integration for the shooting
solver.

Problems are dispatched by an integer code (0 transfer, 1 landing) so a
single compiled integrator serves both. Augmented state layouts:

    transfer (12): r(0:3) v(3:6) lam_r(6:9) lam_v(9:12)
    landing  (14): r(0:3) v(3:6) m(6) lam_r(7:10) lam_v(10:13) lam_m(13)

Parameter packs:

    transfer: [mu, spin, gamma]
    landing:  [mu, omega, c1, exhaust, eps_h]

The thrust direction is the primer direction -lam_v/|lam_v|. The landing
throttle is the smoothed switching law
``clamp(-SF/(2 eps_h) + 1/2, 0, 1)``, degenerating to bang-bang at
eps_h = 0. A vanishing primer or non-positive mass poisons the state
with NaNs, which the integrator reports as a failure.
"""

import numpy as np
from numba import njit

TRANSFER = 0
LANDING = 1

# integrator status codes
OK = 0
NONFINITE = 1
STEP_UNDERFLOW = 2
MAX_STEPS = 3


@njit(cache=True)
def _norm3(a, b, c):
    return np.sqrt(a * a + b * b + c * c)


@njit(cache=True)
def landing_throttle(sf, eps_h):
    if eps_h > 0.0:
        u = -sf / (2.0 * eps_h) + 0.5
        if u < 0.0:
            return 0.0
        if u > 1.0:
            return 1.0
        return u
    return 1.0 if sf < 0.0 else 0.0


@njit(cache=True)
def landing_switching(y, pars):
    exhaust = pars[3]
    m = y[6]
    nv = _norm3(y[10], y[11], y[12])
    return (1.0 - y[13]) / exhaust - nv / m


@njit(cache=True)
def rhs(problem, y, pars):
    out = np.empty_like(y)
    rx, ry, rz = y[0], y[1], y[2]
    vx, vy, vz = y[3], y[4], y[5]
    rn = _norm3(rx, ry, rz)
    if rn == 0.0:
        out[:] = np.nan
        return out
    rn3 = rn * rn * rn
    rn5 = rn3 * rn * rn
    mu = pars[0]
    spin = pars[1]

    if problem == TRANSFER:
        lrx, lry, lrz = y[6], y[7], y[8]
        lvx, lvy, lvz = y[9], y[10], y[11]
        nv = _norm3(lvx, lvy, lvz)
        if nv < 1e-300:
            out[:] = np.nan
            return out
        gamma = pars[2]
        ax = gamma * (-lvx / nv)
        ay = gamma * (-lvy / nv)
        az = gamma * (-lvz / nv)
        mass_ofs = 0
    else:
        m = y[6]
        if m <= 0.0:
            out[:] = np.nan
            return out
        lrx, lry, lrz = y[7], y[8], y[9]
        lvx, lvy, lvz = y[10], y[11], y[12]
        nv = _norm3(lvx, lvy, lvz)
        if nv < 1e-300:
            out[:] = np.nan
            return out
        c1 = pars[2]
        exhaust = pars[3]
        eps_h = pars[4]
        sf = (1.0 - y[13]) / exhaust - nv / m
        u = landing_throttle(sf, eps_h)
        scale = u * c1 / m
        ax = scale * (-lvx / nv)
        ay = scale * (-lvy / nv)
        az = scale * (-lvz / nv)
        out[6] = -u * c1 / exhaust
        out[13] = -u * c1 * nv / (m * m)
        mass_ofs = 1

    # state derivatives
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = -mu * rx / rn3 + 2.0 * spin * vy + spin * spin * rx + ax
    out[4] = -mu * ry / rn3 - 2.0 * spin * vx + spin * spin * ry + ay
    out[5] = -mu * rz / rn3 + az

    # costates
    lvdotr = lvx * rx + lvy * ry + lvz * rz
    b = 6 + mass_ofs
    out[b + 0] = mu * (lvx / rn3 - 3.0 * lvdotr * rx / rn5) - spin * spin * lvx
    out[b + 1] = mu * (lvy / rn3 - 3.0 * lvdotr * ry / rn5) - spin * spin * lvy
    out[b + 2] = mu * (lvz / rn3 - 3.0 * lvdotr * rz / rn5)
    out[b + 3] = -lrx + 2.0 * spin * lvy
    out[b + 4] = -lry - 2.0 * spin * lvx
    out[b + 5] = -lrz
    return out


@njit(cache=True)
def hamiltonian(problem, y, pars):
    rx, ry, rz = y[0], y[1], y[2]
    vx, vy, vz = y[3], y[4], y[5]
    rn = _norm3(rx, ry, rz)
    rn3 = rn * rn * rn
    mu = pars[0]
    spin = pars[1]
    a0x = -mu * rx / rn3 + 2.0 * spin * vy + spin * spin * rx
    a0y = -mu * ry / rn3 - 2.0 * spin * vx + spin * spin * ry
    a0z = -mu * rz / rn3
    if problem == TRANSFER:
        lr = y[6:9]
        lv = y[9:12]
        nv = _norm3(lv[0], lv[1], lv[2])
        gamma = pars[2]
        return (lr[0] * vx + lr[1] * vy + lr[2] * vz
                + lv[0] * a0x + lv[1] * a0y + lv[2] * a0z
                - gamma * nv + 1.0)
    m = y[6]
    lr = y[7:10]
    lv = y[10:13]
    nv = _norm3(lv[0], lv[1], lv[2])
    c1 = pars[2]
    exhaust = pars[3]
    sf = (1.0 - y[13]) / exhaust - nv / m
    u = landing_throttle(sf, pars[4])
    return (lr[0] * vx + lr[1] * vy + lr[2] * vz
            + lv[0] * a0x + lv[1] * a0y + lv[2] * a0z
            + u * c1 * sf)


@njit(cache=True)
def control_of(problem, y, pars):
    """Optimal control at an augmented state: direction for the
    transfer, (throttle, direction) for the landing."""
    if problem == TRANSFER:
        lv = y[9:12]
        nv = _norm3(lv[0], lv[1], lv[2])
        out = np.empty(3)
        out[0] = -lv[0] / nv
        out[1] = -lv[1] / nv
        out[2] = -lv[2] / nv
        return out
    lv = y[10:13]
    nv = _norm3(lv[0], lv[1], lv[2])
    sf = landing_switching(y, pars)
    out = np.empty(4)
    out[0] = landing_throttle(sf, pars[4])
    out[1] = -lv[0] / nv
    out[2] = -lv[1] / nv
    out[3] = -lv[2] / nv
    return out


@njit(cache=True)
def _rhs_dir(problem, y, pars, sign):
    out = rhs(problem, y, pars)
    if sign < 0.0:
        return -out
    return out


@njit(cache=True)
def _landing_rhs_frozen(y, pars, u, sign):
    """Landing RHS with the throttle frozen at the current arc value."""
    out = np.empty(14)
    rx, ry, rz = y[0], y[1], y[2]
    vx, vy, vz = y[3], y[4], y[5]
    m = y[6]
    rn = _norm3(rx, ry, rz)
    if rn == 0.0 or m <= 0.0:
        out[:] = np.nan
        return out
    rn3 = rn * rn * rn
    rn5 = rn3 * rn * rn
    mu = pars[0]
    spin = pars[1]
    c1 = pars[2]
    exhaust = pars[3]
    lrx, lry, lrz = y[7], y[8], y[9]
    lvx, lvy, lvz = y[10], y[11], y[12]
    nv = _norm3(lvx, lvy, lvz)
    if nv < 1e-300:
        out[:] = np.nan
        return out
    scale = u * c1 / m
    out[0] = vx
    out[1] = vy
    out[2] = vz
    out[3] = -mu * rx / rn3 + 2.0 * spin * vy + spin * spin * rx + scale * (-lvx / nv)
    out[4] = -mu * ry / rn3 - 2.0 * spin * vx + spin * spin * ry + scale * (-lvy / nv)
    out[5] = -mu * rz / rn3 + scale * (-lvz / nv)
    out[6] = -u * c1 / exhaust
    lvdotr = lvx * rx + lvy * ry + lvz * rz
    out[7] = mu * (lvx / rn3 - 3.0 * lvdotr * rx / rn5) - spin * spin * lvx
    out[8] = mu * (lvy / rn3 - 3.0 * lvdotr * ry / rn5) - spin * spin * lvy
    out[9] = mu * (lvz / rn3 - 3.0 * lvdotr * rz / rn5)
    out[10] = -lrx + 2.0 * spin * lvy
    out[11] = -lry - 2.0 * spin * lvx
    out[12] = -lrz
    out[13] = -u * c1 * nv / (m * m)
    if sign < 0.0:
        return -out
    return out


@njit(cache=True)
def _landing_step(y, h, pars, u, sign):
    """One Dormand-Prince 5(4) trial step of the frozen-throttle landing.

    Returns (ynew, scaled error norm); err = inf when non-finite."""
    k1 = _landing_rhs_frozen(y, pars, u, sign)
    k2 = _landing_rhs_frozen(y + h * (k1 / 5.0), pars, u, sign)
    k3 = _landing_rhs_frozen(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), pars, u, sign)
    k4 = _landing_rhs_frozen(y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3),
                             pars, u, sign)
    k5 = _landing_rhs_frozen(y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                                      + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4),
                             pars, u, sign)
    k6 = _landing_rhs_frozen(y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2
                                      + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
                                      - 5103.0 / 18656.0 * k5), pars, u, sign)
    ynew = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                    - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
    k7 = _landing_rhs_frozen(ynew, pars, u, sign)
    return ynew, k1, k3, k4, k5, k6, k7


@njit(cache=True)
def _landing_step_err(y, ynew, k1, k3, k4, k5, k6, k7, h, rtol, atol):
    errsum = 0.0
    for i in range(14):
        if not np.isfinite(ynew[i]):
            return np.inf
        e = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i]
                 - 17253.0 / 339200.0 * k5[i] + 22.0 / 525.0 * k6[i] - k7[i] / 40.0)
        ya = abs(y[i])
        yb = abs(ynew[i])
        sc = atol + rtol * (ya if ya > yb else yb)
        errsum += (e / sc) ** 2
    return np.sqrt(errsum / 14.0)


@njit(cache=True)
def integrate_landing_bangbang(y0, pars, t_out, rtol, atol, sign=1.0):
    """Event-aware integration of the exact bang-bang landing extremal.

    The throttle is frozen along each arc; a sign change of the
    switching function across an accepted step triggers a secant search
    that lands a step on the root before flipping the throttle. Without
    the event location, undetected jumps inside stage gaps bias the
    effective switch times by the local step size.
    """
    n_out = t_out.shape[0]
    ys = np.empty((n_out, 14))
    t = 0.0
    y = y0.copy()
    idx = 0
    while idx < n_out and t_out[idx] <= t:
        ys[idx] = y
        idx += 1
    if idx >= n_out:
        return ys, OK
    tf = t_out[n_out - 1]
    span = tf - t
    h_ctrl = span / 1000.0
    hmin = span * 1e-15
    max_steps = 100_000
    steps = 0
    sf = landing_switching(y, pars)
    u = 1.0 if sf < 0.0 else 0.0
    n_events = 0
    while idx < n_out:
        if h_ctrl < hmin:
            return ys, STEP_UNDERFLOW
        steps += 1
        if steps > max_steps:
            return ys, MAX_STEPS
        h = h_ctrl
        hit_output = False
        if t + h >= t_out[idx] - 1e-14 * span:
            h = t_out[idx] - t
            hit_output = True
        ynew, k1, k3, k4, k5, k6, k7 = _landing_step(y, h, pars, u, sign)
        err = _landing_step_err(y, ynew, k1, k3, k4, k5, k6, k7, h, rtol, atol)
        if not np.isfinite(err):
            h_ctrl = h * 0.25
            continue
        if err > 0.0:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        else:
            fac = 5.0
        if err > 1.0:
            h_ctrl = h * fac
            continue
        sf_new = landing_switching(ynew, pars)
        crossed = (sf_new < 0.0) != (u > 0.5) and abs(sf_new) > 1e-13
        if crossed:
            # secant on g(h) = SF(step(h)); the arc's RHS is smooth
            n_events += 1
            if n_events > 256:
                return ys, MAX_STEPS
            h_a = 0.0
            g_a = landing_switching(y, pars)
            h_b = h
            g_b = sf_new
            h_root = h
            for _ in range(80):
                if g_b == g_a:
                    break
                h_try = h_b - g_b * (h_b - h_a) / (g_b - g_a)
                if h_try <= 0.0 or h_try >= h:
                    h_try = 0.5 * (h_a + h_b)
                y_try, q1, q3, q4, q5, q6, q7 = _landing_step(y, h_try, pars, u, sign)
                g_try = landing_switching(y_try, pars)
                if abs(g_try) < 1e-14 or abs(h_b - h_a) < 1e-16 * max(1.0, t):
                    ynew = y_try
                    h_root = h_try
                    break
                if (g_try < 0.0) == (g_b < 0.0):
                    h_b, g_b = h_try, g_try
                else:
                    h_a, g_a = h_try, g_try
                ynew = y_try
                h_root = h_try
            t = t + h_root
            y = ynew
            u = 1.0 - u
            # h_ctrl unchanged; the next arc restarts from the controller step
            if hit_output and t >= t_out[idx] - 1e-14 * span:
                ys[idx] = y
                idx += 1
            continue
        t = t + h
        y = ynew
        if hit_output:
            ys[idx] = y
            idx += 1
            while idx < n_out and t_out[idx] <= t + 1e-14 * span:
                ys[idx] = y
                idx += 1
            if h * fac > h_ctrl:
                h_ctrl = h * fac
        else:
            h_ctrl = h * fac
    return ys, OK


@njit(cache=True)
def integrate_to(problem, y0, pars, t_out, rtol, atol, sign=1.0):
    """Adaptive Dormand-Prince 5(4) from t=0 through every time in the
    strictly increasing array ``t_out``; steps land exactly on each
    output time. ``sign=-1`` integrates the time-reversed system (t_out
    then measures time before the terminal point). Returns (states at
    t_out, status)."""
    dim = y0.shape[0]
    n_out = t_out.shape[0]
    ys = np.empty((n_out, dim))
    t = 0.0
    y = y0.copy()
    idx = 0
    # outputs at (or before) the start
    while idx < n_out and t_out[idx] <= t:
        ys[idx] = y
        idx += 1
    if idx >= n_out:
        return ys, OK
    tf = t_out[n_out - 1]
    span = tf - t
    h_ctrl = span / 1000.0
    hmin = span * 1e-14
    # generous for genuine extremals, small enough that near-singular
    # residual probes fail fast instead of stalling the line search
    max_steps = 100_000
    steps = 0
    while idx < n_out:
        if h_ctrl < hmin:
            return ys, STEP_UNDERFLOW
        steps += 1
        if steps > max_steps:
            return ys, MAX_STEPS
        h = h_ctrl
        hit_output = False
        if t + h >= t_out[idx] - 1e-14 * span:
            h = t_out[idx] - t
            hit_output = True
        k1 = _rhs_dir(problem, y, pars, sign)
        k2 = _rhs_dir(problem, y + h * (k1 / 5.0), pars, sign)
        k3 = _rhs_dir(problem, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2), pars, sign)
        k4 = _rhs_dir(problem, y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3), pars, sign)
        k5 = _rhs_dir(problem, y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                                        + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4), pars, sign)
        k6 = _rhs_dir(problem, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2
                                        + 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4
                                        - 5103.0 / 18656.0 * k5), pars, sign)
        ynew = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                        - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
        k7 = _rhs_dir(problem, ynew, pars, sign)
        finite = True
        for i in range(dim):
            if not np.isfinite(ynew[i]) or not np.isfinite(k7[i]):
                finite = False
                break
        if not finite:
            # retry with a smaller step; bail out once h underflows
            h_ctrl = h * 0.25
            continue
        errsum = 0.0
        for i in range(dim):
            e = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i]
                     - 17253.0 / 339200.0 * k5[i] + 22.0 / 525.0 * k6[i] - k7[i] / 40.0)
            ya = abs(y[i])
            yb = abs(ynew[i])
            sc = atol + rtol * (ya if ya > yb else yb)
            errsum += (e / sc) ** 2
        err = np.sqrt(errsum / dim)
        if err > 0.0:
            fac = 0.9 * err ** -0.2
            if fac < 0.2:
                fac = 0.2
            elif fac > 5.0:
                fac = 5.0
        else:
            fac = 5.0
        if err <= 1.0:
            t = t + h
            y = ynew
            if hit_output:
                ys[idx] = y
                idx += 1
                while idx < n_out and t_out[idx] <= t + 1e-14 * span:
                    ys[idx] = y
                    idx += 1
                # keep the controller step; the clipped step says nothing new
                if h * fac > h_ctrl:
                    h_ctrl = h * fac
            else:
                h_ctrl = h * fac
        else:
            h_ctrl = h * fac
    return ys, OK
