"""Jets of the half-map at its four natural anchors.

Every jet is produced by undetermined coefficients on the first-order ODE

    y1 W(y0) dy1 - y0 W(y1) dy0 = 0

that P satisfies, after a change of the independent variable suited to the
anchor. The unknown coefficient c_k enters one residual coefficient linearly,
so it is found by evaluating that residual coefficient at c_k = 0 and c_k = 1.

Arithmetic is exact (``fractions.Fraction``) when every parameter is an int
or a Fraction and the anchor itself is rational; otherwise it runs in a
private 40-digit mpmath context and the result is rounded to float.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .core import LienardParams, domain_interval
from .errors import InvalidParams, NotInvertible, PreconditionViolated, WrongSide

__all__ = [
    "Anchor",
    "PowerSeries",
    "InfinityInversionJet",
    "TAYLOR_ORDER_CAP",
    "PUISEUX_ORDER_CAP",
    "INFINITY_ORDER_CAP",
    "taylor_origin",
    "taylor_origin_shifted",
    "inverse_taylor_at_tangency",
    "puiseux_at_hat_y0",
    "infinity_jet",
    "infinity_jet_recurrence",
    "taylor_infinity",
    "series_eval",
    "series_invert",
    "series_compose",
    "ode_residual",
]

TAYLOR_ORDER_CAP = 20
PUISEUX_ORDER_CAP = 24      # terms in z = (y0 - hat_y0)^(1/2)
INFINITY_ORDER_CAP = 4

_MP = mpmath.MPContext()
_MP.dps = 40


class Anchor(enum.Enum):
    ORIGIN = "origin"
    ORIGIN_SHIFTED = "origin-shifted"
    INVERSE_SHIFTED = "inverse-shifted"
    INVERSE = "inverse"
    PUISEUX = "puiseux"
    INFINITY = "infinity"


@dataclass(frozen=True)
class PowerSeries:
    """Truncated expansion sum_k c_k u^(start + k*step) about ``center``.

    ``u`` is y - center for Taylor anchors, side*(y - center) for half-integer
    steps (only side*(y - center) >= 0 is valid), and y itself at infinity.
    Coefficients are Fractions on the exact path and floats otherwise.
    """

    anchor: Anchor
    center: float
    start: Fraction
    step: Fraction
    coefficients: tuple
    order: int
    side: int = 1

    @property
    def exponents(self) -> tuple[Fraction, ...]:
        return tuple(self.start + k * self.step for k in range(len(self.coefficients)))

    def terms(self) -> list[tuple[Fraction, object]]:
        return list(zip(self.exponents, self.coefficients))

    def coefficient(self, exponent) -> object:
        exponent = Fraction(exponent)
        for e, c in self.terms():
            if e == exponent:
                return c
        return 0

    def floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coefficients)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coefficients)


@dataclass(frozen=True)
class InfinityInversionJet:
    """Right derivatives at 0 of Y -> 1/P(1/Y)."""

    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3, self.alpha4)


# --------------------------------------------------------------------------
# truncated polynomial arithmetic on coefficient lists


def _mul(p, q, n):
    out = [p[0] * 0] * n
    for i, pi in enumerate(p[:n]):
        if pi == 0:
            continue
        for j, qj in enumerate(q[: n - i]):
            out[i + j] += pi * qj
    return out


def _deriv(p):
    return [k * p[k] for k in range(1, len(p))] + [p[0] * 0]


def _quad_series(s, c2, c1, c0, n):
    sq = _mul(s, s, n)
    out = [c2 * sq[k] + c1 * s[k] for k in range(n)]
    out[0] += c0
    return out


def _w_series(s, T, D, a, n):
    return _quad_series(s, D, -a * T, a * a, n)


def ode_residual(y0s, y1s, T, D, a, n):
    """Coefficients of y1 W(y0) y1' - y0 W(y1) y0' as series in the jet variable."""
    y0s = list(y0s) + [y0s[0] * 0] * (n + 1 - len(y0s))
    y1s = list(y1s) + [y1s[0] * 0] * (n + 1 - len(y1s))
    lhs = _mul(_mul(y1s, _w_series(y0s, T, D, a, n), n), _deriv(y1s), n)
    rhs = _mul(_mul(y0s, _w_series(y1s, T, D, a, n), n), _deriv(y0s), n)
    return [lhs[k] - rhs[k] for k in range(n)]


def _undetermined(coeffs, ks, pivot_shift, residual):
    """Fill ``coeffs[k]`` for k in ``ks``; c_k is linear in residual[k + shift]."""
    zero = coeffs[0] * 0
    one = zero + 1
    for k in ks:
        coeffs[k] = zero
        r0 = residual(coeffs)[k + pivot_shift]
        coeffs[k] = one
        r1 = residual(coeffs)[k + pivot_shift]
        coeffs[k] = r0 / (r0 - r1)
    return coeffs


# --------------------------------------------------------------------------
# number fields


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _exact_params(params: LienardParams):
    if all(_is_rational(v) for v in (params.T, params.D, params.a)):
        return Fraction(params.T), Fraction(params.D), Fraction(params.a)
    return None


def _to_mp(v):
    if _is_rational(v):
        v = Fraction(v)
        return _MP.mpf(v.numerator) / v.denominator
    return _MP.mpf(float(v))


def _mp_params(params: LienardParams):
    return tuple(_to_mp(v) for v in (params.T, params.D, params.a))


def _out(coeffs):
    if all(isinstance(c, Fraction) for c in coeffs):
        return tuple(coeffs)
    return tuple(float(c) + 0.0 for c in coeffs)


def _check_order(order, cap, what):
    if isinstance(order, bool) or not isinstance(order, int):
        raise InvalidParams(f"order must be an integer, got {order!r}")
    if order < 1 or order > cap:
        raise InvalidParams(f"{what} order must lie in [1, {cap}], got {order}")


# --------------------------------------------------------------------------
# anchors


def taylor_origin(params: LienardParams, order: int) -> PowerSeries:
    """Taylor jet sum_{k=1..order} c_k y0^k of the involutive half-map at 0."""
    _check_order(order, TAYLOR_ORDER_CAP, "Taylor")
    if params.a == 0:
        raise PreconditionViolated("the origin jet requires a != 0")
    info = domain_interval(params)
    if not info.exists:
        raise PreconditionViolated(f"the origin jet requires a half-map: {info.reason}")
    if not info.involutive:
        raise PreconditionViolated("the origin jet requires 0 in I and P(0)=0 (fails for a<0, T!=0)")
    exact = _exact_params(params)
    T, D, a = exact if exact is not None else _mp_params(params)
    one = T * 0 + 1
    n = order + 1
    # index 0 is the (zero) constant term
    c = [one * 0] * (n + 1)
    c[1] = -one
    x = [one * 0, one]
    _undetermined(c, range(2, n), 0, lambda cc: ode_residual(x, cc, T, D, a, n))
    return PowerSeries(Anchor.ORIGIN, 0.0, Fraction(1), Fraction(1), _out(c[1:n]), order)


def _shifted_jet(T, D, a, h, order):
    """Taylor jet of the solution through (0, h) with h != 0, degrees 0..order."""
    n = order + 1
    c = [h * 0] * (n + 1)
    c[0] = h
    x = [h * 0, h * 0 + 1]
    _undetermined(c, range(1, n), -1, lambda cc: ode_residual(x, cc, T, D, a, n))
    c[1] = h * 0
    return c[:n]


def taylor_origin_shifted(params: LienardParams, order: int) -> PowerSeries:
    """Taylor jet of P at 0 when P(0) = hat_y1 < 0; degrees 0..order."""
    _check_order(order, TAYLOR_ORDER_CAP, "Taylor")
    info = domain_interval(params)
    if not info.exists or info.hat_y1 is None:
        raise PreconditionViolated("the shifted origin jet requires P(0)=hat_y1<0, i.e. a<0, T>0 and 4D-T^2>0")
    T, D, a = _mp_params(params)
    c = _shifted_jet(T, D, a, _MP.mpf(info.hat_y1), order)
    return PowerSeries(Anchor.ORIGIN_SHIFTED, 0.0, Fraction(0), Fraction(1), _out(c), order)


def inverse_taylor_at_tangency(params: LienardParams, order: int) -> PowerSeries:
    """Taylor jet of P^-1 in y1 at y1 = 0 when P(hat_y0) = 0; degrees 0..order.

    The ODE is symmetric in (y0, y1), so this is the shifted jet with hat_y0
    in place of hat_y1.
    """
    _check_order(order, TAYLOR_ORDER_CAP, "Taylor")
    info = domain_interval(params)
    if not info.exists or info.hat_y0 is None:
        raise PreconditionViolated("the inverse jet requires P(hat_y0)=0 with hat_y0>0, i.e. a<0, T<0 and 4D-T^2>0")
    T, D, a = _mp_params(params)
    c = _shifted_jet(T, D, a, _MP.mpf(info.hat_y0), order)
    return PowerSeries(Anchor.INVERSE_SHIFTED, 0.0, Fraction(0), Fraction(1), _out(c), order)


def puiseux_at_hat_y0(params: LienardParams, order: int) -> PowerSeries:
    """Newton-Puiseux jet sum_{k=1..order} q_k (y0 - hat_y0)^(k/2), nonpositive branch.

    Computed as the Taylor jet of Q(z) = P(hat_y0 + z^2).
    """
    _check_order(order, PUISEUX_ORDER_CAP, "Puiseux")
    info = domain_interval(params)
    if not info.exists or info.hat_y0 is None:
        raise PreconditionViolated("the Puiseux jet requires P(hat_y0)=0 with hat_y0>0, i.e. a<0, T<0 and 4D-T^2>0")
    T, D, a = _mp_params(params)
    h = _MP.mpf(info.hat_y0)
    wh = D * h * h - a * T * h + a * a
    n = order + 1
    q = [h * 0] * (n + 1)
    # Q Q' W(h) = 2 h a^2 z + ...; a < 0 picks the nonpositive root
    q[1] = a * _MP.sqrt(2 * h / wh)
    y0s = [h, h * 0, h * 0 + 1]
    _undetermined(q, range(2, n), 0, lambda qq: ode_residual(y0s, qq, T, D, a, n))
    return PowerSeries(Anchor.PUISEUX, info.hat_y0, Fraction(1, 2), Fraction(1, 2),
                       _out(q[1:n]), order, side=1)


def _require_focus(params: LienardParams):
    T, D, _ = params.floats()
    if not 4.0 * D - T * T > 0.0:
        raise PreconditionViolated(f"the expansion at infinity requires 4D-T^2>0 (got {4.0 * D - T * T!r})")


def infinity_jet(params: LienardParams) -> InfinityInversionJet:
    """alpha_1..alpha_4 from their closed forms in E = exp(pi T / sqrt(4D - T^2))."""
    _require_focus(params)
    T, D, a = _mp_params(params)
    E = _MP.exp(_MP.pi * T / _MP.sqrt(4 * D - T * T))
    a1 = -1 / E
    a2 = -(2 * a * T / D) * (E + 1) / E ** 2
    a3 = (3 * a * a / D ** 2) * (E + 1) * (-2 * T * T * E + D * E - D - 2 * T * T) / E ** 3
    a4 = (4 * a ** 3 * T / D ** 3) * (1 + E) ** 2 * (-8 * D + 7 * D * E - 6 * T * T - 6 * T * T * E) / E ** 4
    return InfinityInversionJet(float(a1), float(a2), float(a3), float(a4))


def infinity_jet_recurrence(params: LienardParams, count: int = 4) -> tuple[float, ...]:
    """alpha_1..alpha_count from the reciprocal ODE, given only alpha_1.

    With V(Y) = a^2 Y^2 - a T Y + D the map Y0 -> Y1 = 1/P(1/Y0) satisfies
    V(Y0) Y0 dY1 = V(Y1) Y1 dY0; alpha_k = k! times the k-th Taylor coefficient.
    """
    _require_focus(params)
    if count < 1 or count > TAYLOR_ORDER_CAP:
        raise InvalidParams(f"count must lie in [1, {TAYLOR_ORDER_CAP}]")
    T, D, a = _mp_params(params)
    n = count + 1
    b = [T * 0] * (n + 1)
    b[1] = -1 / _MP.exp(_MP.pi * T / _MP.sqrt(4 * D - T * T))
    X = [T * 0, T * 0 + 1] + [T * 0] * n

    def residual(bb):
        vx = _quad_series(X, a * a, -a * T, D, n)
        vy = _quad_series(bb, a * a, -a * T, D, n)
        lhs = _mul(_mul(vx, X, n), _deriv(bb), n)
        rhs = _mul(_mul(vy, bb, n), _deriv(X), n)
        return [lhs[k] - rhs[k] for k in range(n)]

    _undetermined(b, range(2, n), 0, residual)
    return tuple(float(math.factorial(k) * b[k]) for k in range(1, n))


def taylor_infinity(params: LienardParams, order: int = 4) -> PowerSeries:
    """Leading terms of P at infinity: exponents 1, 0, -1, -2 (zeros kept)."""
    _check_order(order, INFINITY_ORDER_CAP, "infinity")
    _require_focus(params)
    j = infinity_jet(params)
    a1, a2, a3, a4 = j.as_tuple()
    terms = (
        1.0 / a1,
        -a2 / (2.0 * a1 * a1),
        (3.0 * a2 * a2 - 2.0 * a1 * a3) / (12.0 * a1 ** 3),
        -(3.0 * a2 ** 3 - 4.0 * a1 * a2 * a3 + a1 * a1 * a4) / (24.0 * a1 ** 4),
    )
    terms = tuple(t + 0.0 for t in terms)
    return PowerSeries(Anchor.INFINITY, math.inf, Fraction(1), Fraction(-1), terms[:order], order)


# --------------------------------------------------------------------------
# evaluation and inversion


def series_eval(s: PowerSeries, y: float) -> float:
    """Evaluate the truncated jet at ``y`` by Horner's rule in the base variable."""
    y = float(y)
    coeffs = s.floats()
    if s.anchor is Anchor.INFINITY:
        if not y > 0.0:
            raise WrongSide(f"the expansion at infinity requires y0>0, got {y!r}")
        u = 1.0 / y
    elif s.step == Fraction(1, 2):
        d = s.side * (y - s.center)
        if d < 0.0:
            raise WrongSide(f"the half-integer jet is valid only for {'y>=' if s.side > 0 else 'y<='}{s.center!r}, got {y!r}")
        u = math.sqrt(d)
    else:
        u = y - s.center
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * u + c
    lead = s.start / s.step
    if lead == 0:
        return acc
    return acc * u ** int(lead)


def _taylor_parts(s: PowerSeries):
    if s.step != 1 or s.start < 0 or s.start.denominator != 1:
        raise NotInvertible(f"only Taylor jets with nonnegative integer exponents can be inverted (anchor {s.anchor.value})")
    full = [0] * int(s.start) + list(s.coefficients)
    exact = all(isinstance(c, (int, Fraction)) for c in full)
    if exact:
        return [Fraction(c) for c in full], True
    return [_MP.mpf(float(c)) for c in full], False


def _compose(outer, inner, n):
    """outer(inner(u)) truncated to n terms; inner has zero constant term."""
    out = [inner[0] * 0] * n
    power = [inner[0] * 0 + 1] + [inner[0] * 0] * (n - 1)
    for k, ck in enumerate(outer):
        if k >= n:
            break
        if k > 0:
            power = _mul(power, inner, n)
        if ck != 0:
            for i in range(n):
                out[i] += ck * power[i]
    return out


def series_invert(s: PowerSeries) -> PowerSeries:
    """Compositional inverse of a Taylor jet x -> s(x) about its center.

    With s(x) = s0 + s1 (x-c) + ..., s1 != 0 gives an ordinary Taylor inverse
    in (y - s0). With s1 = 0 and s2 != 0 the inverse has half-integer steps
    in sigma (y - s0), sigma = sign(s2); the branch with nonpositive values
    of x - c is returned.
    """
    coeffs, exact = _taylor_parts(s)
    s0 = coeffs[0]
    s1 = coeffs[1] if len(coeffs) > 1 else 0
    s2 = coeffs[2] if len(coeffs) > 2 else 0
    zero = coeffs[0] * 0
    m = len(coeffs)
    shifted = [zero] + coeffs[1:]
    x_center = s.center
    if s1 != 0:
        n = m
        b = [zero] * (n + 1)
        b[1] = 1 / s1

        def residual(bb):
            r = _compose(shifted, bb, n)
            r[1] -= 1
            return r

        _undetermined(b, range(2, n), 0, residual)
        out = b[1:n]
        start = Fraction(1)
        if x_center != 0:
            out = [x_center] + out
            start = Fraction(0)
        return PowerSeries(Anchor.INVERSE, float(s0), start, Fraction(1), _out(out), len(out))
    if s2 == 0:
        raise NotInvertible("inversion requires a nonzero linear or quadratic coefficient")
    sigma = 1 if s2 > 0 else -1
    if exact:
        # the square root of s2 is irrational in general
        shifted = [_to_mp(c) for c in shifted]
        zero = _MP.mpf(0)
        s2 = shifted[2]
    n = m - 1
    b = [zero] * (n + 2)
    b[1] = -1 / _MP.sqrt(abs(s2))

    def residual(bb):
        r = _compose(shifted, bb, n + 1)
        r[2] -= sigma
        return r

    _undetermined(b, range(2, n), 1, residual)
    out = list(b[1:n])
    start = Fraction(1, 2)
    if x_center != 0:
        out = [x_center] + out
        start = Fraction(0)
    return PowerSeries(Anchor.PUISEUX, float(s0), start, Fraction(1, 2), _out(out), len(out), side=sigma)


def series_compose(outer: PowerSeries, inner: PowerSeries) -> PowerSeries:
    """Jet of outer(inner(x)) for Taylor jets at 0 with zero constant terms."""
    po, eo = _taylor_parts(outer)
    pi, ei = _taylor_parts(inner)
    if po[0] != 0 or pi[0] != 0 or outer.center != 0 or inner.center != 0:
        raise InvalidParams("composition is implemented for jets fixing 0 only")
    if eo != ei:
        po = [_MP.mpf(float(c)) for c in po]
        pi = [_MP.mpf(float(c)) for c in pi]
    n = min(len(po), len(pi))
    out = _compose(po[:n], pi[:n], n)
    return PowerSeries(Anchor.ORIGIN, 0.0, Fraction(1), Fraction(1), _out(out[1:n]), n - 1)
