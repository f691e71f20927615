"""Scalar numeric kernels.

Everything here takes and returns plain floats/ints (or 1-d float arrays for
the batch helpers) so that it can be compiled by numba; see ``_accel``.
Failures are reported through integer status codes, never exceptions; the
public wrappers in ``core`` and ``flow`` turn them into exceptions.

Linear system in Lienard form: x' = T x - y, y' = D x - a, with
W(y) = D y^2 - a T y + a^2.
"""
import math

import numpy as np

from ._accel import njit

OK = 0
NO_BRACKET = 1
MAX_ITER = 2
NO_RETURN = 3
NONFINITE = 4
TANGENT_START = 5

EPS = 2.220446049250313e-16
DEFAULT_XTOL = 1e-12
DEFAULT_MAXITER = 200

# objective selectors for ``brent``
_Y1_SLOT = 0      # p = (T, D, a, cT, y0, _): integral(y1 -> y0) - cT, unknown y1
_Y0_SLOT = 1      # p = (T, D, a, cT, y1, _): integral(y1 -> y0) - cT, unknown y0
_ZONE_H = 2       # p = (T, D, a, s0, side, direction): side * x(direction * t)
_ZONE_HDOT = 3    # time derivative of the above


# --------------------------------------------------------------------------
# the quadratic W


@njit
def w_value(T, D, a, y):
    return D * y * y - a * T * y + a * a


@njit
def w_roots(T, D, a):
    """Real roots of W as ``(count, r1, r2)`` with ``r1 <= r2``.

    ``count`` is the number of distinct roots; a double root (or the single
    root of a linear W) is returned in both slots.
    """
    if D == 0.0:
        if a * T == 0.0:
            return 0, math.nan, math.nan
        r = a / T
        return 1, r, r
    if a == 0.0:
        return 1, 0.0, 0.0
    disc = T * T - 4.0 * D
    if disc < 0.0:
        return 0, math.nan, math.nan
    if disc == 0.0:
        r = a * T / (2.0 * D)
        return 1, r, r
    sq = abs(a) * math.sqrt(disc)
    b = -a * T
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / D
    r2 = a * a / q
    if r1 > r2:
        r1, r2 = r2, r1
    return 2, r1, r2


@njit
def w_factored(T, D, a, y):
    """W(y) evaluated from its factorisation when real roots exist.

    Keeps relative accuracy close to a root, where the expanded form cancels.
    """
    n, r1, r2 = w_roots(T, D, a)
    if n == 0:
        return w_value(T, D, a, y)
    if D == 0.0:
        return -a * T * (y - r1)
    return D * (y - r1) * (y - r2)


# --------------------------------------------------------------------------
# the integral of -y/W(y), a != 0


@njit
def _log(x):
    # -inf at 0 and nan below, as compiled code does
    if x > 0.0:
        return math.log(x)
    return -math.inf if x == 0.0 else math.nan


@njit
def _log1p(x):
    if x > -1.0:
        return math.log1p(x)
    return -math.inf if x == -1.0 else math.nan


@njit
def _log_abs_w(T, D, a, y):
    """log W(y) without overflow for huge |y| (W(y) > 0 assumed)."""
    if abs(y) > 1e100:
        return 2.0 * _log(abs(y)) + _log(D - a * T / y + a * a / (y * y))
    return _log(w_factored(T, D, a, y))


@njit
def _log_ratio(x0, x1, dx):
    """log(x0 / x1) for same-signed x0, x1 with dx = x0 - x1."""
    q = dx / x1
    if abs(q) < 0.5:
        return _log1p(q)
    return _log(abs(x0)) - _log(abs(x1))


@njit
def _root_modulus(T, D, a):
    """Smallest modulus of a (real or complex) root of W; inf if none."""
    if D == 0.0:
        return math.inf if T == 0.0 else abs(a / T)
    n, r1, r2 = w_roots(T, D, a)
    if n == 0:
        return abs(a) / math.sqrt(abs(D))
    return min(abs(r1), abs(r2))


@njit
def _integral_series(T, D, a, y1, y0, ratio):
    """Term-by-term integral of -y/W from 1/W = sum c_k y^k, for |y| well inside the roots."""
    inv = 1.0 / (a * a)
    c_prev = 0.0
    c = inv
    p0 = y0 * y0
    p1 = y1 * y1
    acc = 0.0
    # coefficients can vanish individually, so bound the count by the ratio
    n = 3
    if ratio > 0.0:
        n = int(math.log(1e-19) / math.log(ratio)) + 3
    for k in range(n):
        acc += c * (p0 - p1) / (k + 2)
        c, c_prev = (a * T * c - D * c_prev) * inv, c
        p0 *= y0
        p1 *= y1
    return -acc


@njit
def _h_small(v):
    """v + log(1 - v) = -sum_{k>=2} v^k / k for |v| <= 1/2."""
    acc = 0.0
    p = v * v
    for k in range(2, 64):
        acc -= p / k
        p *= v
    return acc


@njit
def _delta_h(y0, y1, r):
    """h(y0/r) - h(y1/r) for h(v) = v + log(1 - v), without cancelling the linear part.

    1 - y/r is formed as (r - y)/r, which stays exact next to the root.
    """
    v0 = y0 / r
    v1 = y1 / r
    if max(abs(v0), abs(v1)) <= 0.5:
        return _h_small(v0) - _h_small(v1)
    return (v0 - v1) + _log_ratio(r - y0, r - y1, y1 - y0)


@njit
def _root_log_term(y0, y1, r, near):
    """r log((r - y0)/(r - y1)), plus y0 - y1 when ``near`` (then computed as r dh)."""
    if near:
        return r * (_h_small(y0 / r) - _h_small(y1 / r))
    return r * _log_ratio(r - y0, r - y1, y1 - y0)


@njit
def integral_diff(T, D, a, y1, y0):
    """Integral of -y/W(y) from y1 to y0 for a != 0.

    The caller guarantees W > 0 on the closed interval between y1 and y0.
    Written as differences (log1p / atan2 of the increment) so that short
    intervals near the tangency keep their absolute accuracy.
    """
    dy = y0 - y1
    if dy == 0.0:
        return 0.0
    m = max(abs(y0), abs(y1))
    if m <= 0.1 * _root_modulus(T, D, a):
        return _integral_series(T, D, a, y1, y0, m / _root_modulus(T, D, a))
    if D == 0.0:
        if T == 0.0:
            return -dy * (y0 + y1) / (2.0 * a * a)
        # W is linear with root a/T
        return _delta_h(y0, y1, a / T) / (T * T)
    # log W(y0) - log W(y1)
    q = dy * (D * (y0 + y1) - a * T) / w_factored(T, D, a, y1)
    if abs(q) < 0.5:
        dlog = _log1p(q)
    else:
        dlog = _log_abs_w(T, D, a, y0) - _log_abs_w(T, D, a, y1)
    disc = T * T - 4.0 * D
    if disc < 0.0:
        k = abs(a) * math.sqrt(-disc)
        u0 = (2.0 * D * y0 - a * T) / k
        u1 = (2.0 * D * y1 - a * T) / k
        j = 2.0 / k * math.atan2(2.0 * D * dy / k, 1.0 + u0 * u1)
    elif disc > 0.0:
        # partial fractions; the log-W form cancels when one root is far away (small D)
        # partial fractions: S = r1 log((r1-y0)/(r1-y1)) - r2 log((r2-y0)/(r2-y1)).
        # Next to the origin each term is r dh(y/r) - dy and the dy parts cancel
        # analytically, so there the h-form is used; far out the logs are.
        n, r1, r2 = w_roots(T, D, a)
        near1 = m <= 0.5 * abs(r1)
        near2 = m <= 0.5 * abs(r2)
        s = _root_log_term(y0, y1, r1, near1) - _root_log_term(y0, y1, r2, near2)
        if near1 and not near2:
            s -= dy
        elif near2 and not near1:
            s += dy
        return s / (D * (r2 - r1))
    else:
        r = a * T / (2.0 * D)
        j = dy / (D * (y0 - r) * (y1 - r))
    return -dlog / (2.0 * D) - a * T / (2.0 * D) * j


# --------------------------------------------------------------------------
# closed-form flow


# plain Python raises OverflowError where compiled code returns inf; saturate instead
_EXP_MAX = 709.78


@njit
def _exp(x):
    return math.inf if x > _EXP_MAX else math.exp(x)


@njit
def _expm1(x):
    return math.inf if x > _EXP_MAX else math.expm1(x)


@njit
def _cosh(x):
    return math.inf if abs(x) > _EXP_MAX + 0.69 else math.cosh(x)


@njit
def _sinh(x):
    if abs(x) > _EXP_MAX + 0.69:
        return math.copysign(math.inf, x)
    return math.sinh(x)


@njit
def _short_step(T, D, a, x0, y0, t):
    """X0 + sum t^k A^(k-1) F(X0) / k! for |t| |A| <= 1: no cancellation against the equilibrium."""
    vx = (T * x0 - y0) * t
    vy = (D * x0 - a) * t
    sx = vx
    sy = vy
    for k in range(2, 40):
        vx, vy = (T * vx - vy) * t / k, D * vx * t / k
        sx += vx
        sy += vy
        if abs(vx) + abs(vy) <= 1e-17 * (abs(sx) + abs(sy)):
            break
    return x0 + sx, y0 + sy


@njit
def _squared_steps(T, D, a, x0, y0, t, norm):
    """The affine flow map over t as 2^s short steps, composed by repeated squaring."""
    s = 0
    h = t
    while abs(h) * norm > 0.5:
        h *= 0.5
        s += 1
    # one step X -> E X + g; columns of E are the steps of the unit vectors without drift
    e11, e21 = _short_step(T, D, 0.0, 1.0, 0.0, h)
    e12, e22 = _short_step(T, D, 0.0, 0.0, 1.0, h)
    gx, gy = _short_step(T, D, a, 0.0, 0.0, h)
    for _ in range(s):
        gx, gy = e11 * gx + e12 * gy + gx, e21 * gx + e22 * gy + gy
        e11, e12, e21, e22 = (e11 * e11 + e12 * e21, e11 * e12 + e12 * e22,
                              e21 * e11 + e22 * e21, e21 * e12 + e22 * e22)
    return e11 * x0 + e12 * y0 + gx, e21 * x0 + e22 * y0 + gy


@njit
def flow_state(T, D, a, x0, y0, t):
    """State at time ``t`` (any sign) of the orbit through ``(x0, y0)``."""
    norm = max(abs(T) + 1.0, abs(D))
    if abs(t) * norm <= 1.0:
        return _short_step(T, D, a, x0, y0, t)
    # the closed forms pivot on a/D (or a/T^2 when D = 0); far from the orbit they cancel
    pivot = abs(D) if D != 0.0 else T * T
    if abs(a) > 1e4 * pivot * (abs(x0) + abs(y0) + abs(a)):
        return _squared_steps(T, D, a, x0, y0, t, norm)
    if D == 0.0:
        y = y0 - a * t
        if T == 0.0:
            x = x0 - y0 * t + 0.5 * a * t * t
        else:
            beta = -a / T
            alpha = (y0 + beta) / T
            x = x0 + beta * t + (x0 - alpha) * _expm1(T * t)
        return x, y
    xe = a / D
    ye = T * xe
    u = x0 - xe
    v = y0 - ye
    half = 0.5 * T
    disc4 = 4.0 * D - T * T
    if disc4 > 0.0:
        w = 0.5 * math.sqrt(disc4)
        c = math.cos(w * t)
        s = math.sin(w * t) / w
    elif disc4 < 0.0:
        m = 0.5 * math.sqrt(-disc4)
        c = _cosh(m * t)
        s = _sinh(m * t) / m
    else:
        c = 1.0
        s = t
    g = _exp(half * t)
    un = g * (c * u + s * (half * u - v))
    vn = g * (c * v + s * (D * u - half * v))
    return xe + un, ye + vn


@njit
def flow_states(T, D, a, x0, y0, ts):
    out = np.empty((ts.shape[0], 2))
    for i in range(ts.shape[0]):
        x, y = flow_state(T, D, a, x0, y0, ts[i])
        out[i, 0] = x
        out[i, 1] = y
    return out


@njit
def _zone_h(t, p):
    T, D, a, s0, side, direction = p
    x, y = flow_state(T, D, a, 0.0, s0, direction * t)
    return side * x


@njit
def _zone_hdot(t, p):
    T, D, a, s0, side, direction = p
    x, y = flow_state(T, D, a, 0.0, s0, direction * t)
    return side * direction * (T * x - y)


# --------------------------------------------------------------------------
# Brent's method (after scipy's brentq.c)


@njit
def _objective(mode, x, p):
    if mode == _Y1_SLOT:
        return integral_diff(p[0], p[1], p[2], x, p[4]) - p[3]
    if mode == _Y0_SLOT:
        return integral_diff(p[0], p[1], p[2], p[4], x) - p[3]
    if mode == _ZONE_H:
        return _zone_h(x, p)
    return _zone_hdot(x, p)


@njit
def brent(mode, xa, xb, fa, fb, p, xtol, rtol, maxiter):
    """Root of objective ``mode`` bracketed by ``[xa, xb]``.

    Returns ``(root, status, iterations)``.
    """
    xpre = xa
    xcur = xb
    fpre = fa
    fcur = fb
    xblk = 0.0
    fblk = 0.0
    spre = 0.0
    scur = 0.0
    if fpre == 0.0:
        return xpre, OK, 0
    if fcur == 0.0:
        return xcur, OK, 0
    if (fpre < 0.0) == (fcur < 0.0):
        return math.nan, NO_BRACKET, 0
    for i in range(maxiter):
        if fpre != 0.0 and fcur != 0.0 and ((fpre < 0.0) != (fcur < 0.0)):
            xblk = xpre
            fblk = fpre
            spre = xcur - xpre
            scur = spre
        if abs(fblk) < abs(fcur):
            xpre = xcur
            xcur = xblk
            xblk = xpre
            fpre = fcur
            fcur = fblk
            fblk = fpre
        delta = 0.5 * (xtol + rtol * abs(xcur))
        sbis = 0.5 * (xblk - xcur)
        if fcur == 0.0 or abs(sbis) < delta:
            return xcur, OK, i
        if abs(spre) > delta and abs(fcur) < abs(fpre):
            if xpre == xblk:
                stry = -fcur * (xcur - xpre) / (fcur - fpre)
            else:
                dpre = (fpre - fcur) / (xpre - xcur)
                dblk = (fblk - fcur) / (xblk - xcur)
                stry = -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            if 2.0 * abs(stry) < min(abs(spre), 3.0 * abs(sbis) - delta):
                spre = scur
                scur = stry
            else:
                spre = sbis
                scur = sbis
        else:
            spre = sbis
            scur = sbis
        xpre = xcur
        fpre = fcur
        if abs(scur) > delta:
            xcur += scur
        elif sbis > 0.0:
            xcur += delta
        else:
            xcur -= delta
        fcur = _objective(mode, xcur, p)
    return xcur, MAX_ITER, maxiter


# --------------------------------------------------------------------------
# half-map solvers


@njit
def _polish(mode, x, p, lo, hi):
    # Newton steps on the monotone objective; d/dx = x/W(x) (y1 slot) or -x/W(x) (y0 slot)
    T, D, a = p[0], p[1], p[2]
    fx = _objective(mode, x, p)
    for _ in range(3):
        if fx == 0.0:
            break
        w = w_factored(T, D, a, x)
        d = x / w if mode == _Y1_SLOT else -x / w
        if d == 0.0 or not math.isfinite(d):
            break
        xn = x - fx / d
        if not (lo <= xn <= hi):
            break
        fn = _objective(mode, xn, p)
        if not abs(fn) < abs(fx):
            break
        x = xn
        fx = fn
    return x


@njit
def solve_y1(T, D, a, cT, y0, lower, lower_is_root, xtol, maxiter):
    """P(y0) for a != 0: the root in y1 <= 0 of integral(y1 -> y0) = cT.

    ``lower`` is the open lower end of the image (a root of W) when
    ``lower_is_root``; otherwise the image is unbounded below.
    """
    p = (T, D, a, cT, y0, 0.0)
    hi = 0.0
    fhi = _objective(_Y1_SLOT, hi, p)
    if fhi == 0.0:
        return 0.0, OK
    if fhi > 0.0 or not math.isfinite(fhi):
        return math.nan, NO_BRACKET
    if lower_is_root:
        # approach the root of W from inside the image
        lo = 0.5 * lower
        flo = _objective(_Y1_SLOT, lo, p)
        k = 1
        while not flo > 0.0:
            k += 1
            cand = lower - lower * 0.5 ** k
            if cand == lower or k > 1100:
                return lo, OK
            hi = lo
            fhi = flo
            lo = cand
            flo = _objective(_Y1_SLOT, lo, p)
    else:
        lo = -2.0 * max(1.0, y0)
        flo = _objective(_Y1_SLOT, lo, p)
        while not flo > 0.0:
            if lo < -1e300:
                return math.nan, NO_BRACKET
            hi = lo
            fhi = flo
            lo *= 2.0
            flo = _objective(_Y1_SLOT, lo, p)
    x, status, _ = brent(_Y1_SLOT, lo, hi, flo, fhi, p, xtol, 4.0 * EPS, maxiter)
    if status != OK:
        return x, status
    return _polish(_Y1_SLOT, x, p, lo, hi), OK


@njit
def solve_y0(T, D, a, cT, y1, lower, upper, upper_is_root, xtol, maxiter):
    """P^{-1}(y1): the root in y0 >= lower of integral(y1 -> y0) = cT."""
    p = (T, D, a, cT, y1, 0.0)
    lo = lower
    flo = _objective(_Y0_SLOT, lo, p)
    if flo == 0.0:
        return lo, OK
    if flo < 0.0 or not math.isfinite(flo):
        return math.nan, NO_BRACKET
    if upper_is_root:
        hi = lo + 0.5 * (upper - lo)
        fhi = _objective(_Y0_SLOT, hi, p)
        k = 1
        while not fhi < 0.0:
            k += 1
            cand = upper - (upper - lo) * 0.5 ** k
            if cand == upper or k > 1100:
                return hi, OK
            lo = hi
            flo = fhi
            hi = cand
            fhi = _objective(_Y0_SLOT, hi, p)
    else:
        hi = max(2.0 * lo, 2.0 * max(1.0, -y1))
        fhi = _objective(_Y0_SLOT, hi, p)
        while not fhi < 0.0:
            if hi > 1e300:
                return math.nan, NO_BRACKET
            lo = hi
            flo = fhi
            hi *= 2.0
            fhi = _objective(_Y0_SLOT, hi, p)
    x, status, _ = brent(_Y0_SLOT, lo, hi, flo, fhi, p, xtol, 4.0 * EPS, maxiter)
    if status != OK:
        return x, status
    return _polish(_Y0_SLOT, x, p, lo, hi), OK


@njit
def solve_y1_batch(T, D, a, cT, y0s, lower, lower_is_root, xtol, maxiter):
    out = np.empty(y0s.shape[0])
    status = np.empty(y0s.shape[0], dtype=np.int64)
    for i in range(y0s.shape[0]):
        out[i], status[i] = solve_y1(T, D, a, cT, y0s[i], lower, lower_is_root, xtol, maxiter)
    return out, status


# --------------------------------------------------------------------------
# first return of the flow to x = 0


@njit
def zone_return(T, D, a, s0, side, direction, t_budget, dt_max, arc_budget, graze_tol):
    """First return to the section of the orbit through ``(0, s0)``.

    The zone is ``side * x > 0`` and time runs in ``direction``; with
    ``h(t) = side * x(direction * t)`` the orbit must leave with h' > 0 and
    come back to h = 0. ``x(t)`` is sampled with ``dt <= dt_max`` (which the
    caller sizes so that h' has at most one zero per step); extrema between
    samples are located on h' so that short excursions are not skipped.

    Returns ``(tau, exit_y, status, grazing)``.
    """
    p = (T, D, a, s0, side, direction)
    hd0 = _zone_hdot(0.0, p)
    if hd0 <= 0.0:
        return math.nan, math.nan, TANGENT_START, False
    rate = max(abs(T), math.sqrt(abs(D)))
    if rate > 0.0:
        dt = 1e-3 / rate
    else:
        dt = 1e-3 * max(1.0, abs(s0) / max(abs(a), 1e-300))
    dt = min(dt, dt_max)
    t_prev = 0.0
    hd_prev = hd0
    x_prev = 0.0
    y_prev = s0
    arc = 0.0
    while t_prev < t_budget:
        t = t_prev + dt
        x, y = flow_state(T, D, a, 0.0, s0, direction * t)
        if not (math.isfinite(x) and math.isfinite(y)):
            return math.nan, math.nan, NONFINITE, False
        if a == 0.0 and math.hypot(x, y) <= 1e-12 * abs(s0):
            # collapsed onto the equilibrium at the origin, which lies on the section
            return math.nan, math.nan, NO_RETURN, False
        h = side * x
        hd = side * direction * (T * x - y)
        arc += math.hypot(x - x_prev, y - y_prev)
        lo = -1.0
        hi = t
        if h <= 0.0:
            lo = t_prev
            if t_prev == 0.0:
                # need an interior point with h > 0; h' > 0 at the start
                lo = 0.5 * t
                k = 0
                while not _zone_h(lo, p) > 0.0:
                    lo *= 0.5
                    k += 1
                    if k > 1100:
                        return 0.0, s0, OK, True
        elif hd_prev < 0.0 and hd > 0.0:
            tm, st, _ = brent(_ZONE_HDOT, t_prev, t, hd_prev, hd, p, 0.0, 4.0 * EPS, 200)
            hm = _zone_h(tm, p)
            if hm <= 0.0:
                lo = t_prev
                hi = tm
            elif hm <= graze_tol:
                xm, ym = flow_state(T, D, a, 0.0, s0, direction * tm)
                if abs(ym) <= 1e-10:
                    return tm, ym, OK, True
        if lo >= 0.0:
            hlo = _zone_h(lo, p)
            hhi = _zone_h(hi, p)
            tau, st, _ = brent(_ZONE_H, lo, hi, hlo, hhi, p, 0.0, 4.0 * EPS, 400)
            xe, ye = flow_state(T, D, a, 0.0, s0, direction * tau)
            return tau, ye, OK, abs(ye) <= 1e-10
        if arc > arc_budget:
            break
        t_prev = t
        hd_prev = hd
        x_prev = x
        y_prev = y
        dt = min(1.5 * dt, dt_max)
    return math.nan, math.nan, NO_RETURN, False
