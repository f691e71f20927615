"""Left Poincare half-map of a planar linear system in Lienard form.

The system is x' = T x - y, y' = D x - a and the section is x = 0. For
y0 >= 0 in the definition interval I, the half-map value P(y0) <= 0 is the
unique root y1 of

    PV integral_{y1}^{y0} -y / W(y) dy = c T,    W(y) = D y^2 - a T y + a^2,

with c = 0 (a > 0), pi / (D sqrt(4D - T^2)) (a = 0) or twice that (a < 0).
No orbit is integrated: the integral has closed-form antiderivatives and the
root is bracketed (the left-hand side is monotone in y1).
"""
from __future__ import annotations

import enum
import functools
import math
import os
from dataclasses import dataclass
from numbers import Real

from scipy.optimize import brentq

from . import kernels
from .errors import (
    DomainError,
    InvalidParams,
    NoConvergence,
    NonexistentHalfMap,
    OutOfDomain,
    PreconditionViolated,
    PvUndefined,
    TangencyPoint,
)

__all__ = [
    "LienardParams",
    "QuadraticW",
    "EndpointKind",
    "Endpoint",
    "DomainInfo",
    "PvConstant",
    "eval_w",
    "quadratic_w",
    "c_constant",
    "antiderivative_h",
    "integral_value",
    "domain_interval",
    "half_map",
    "half_map_inverse",
    "involution",
    "half_map_offset",
    "half_map_inverse_offset",
    "derivative1",
    "derivative2",
    "bisector_position",
    "max_iterations",
]

INF = math.inf

# below this |y0| (times |a|/max(1,|T|)) the origin series replaces root-finding
TANGENCY_RADIUS = 1e-4
TANGENCY_SERIES_ORDER = 6


def max_iterations() -> int:
    """Solver iteration cap; ``HALFMAP_MAX_ITERS`` overrides the default."""
    raw = os.environ.get("HALFMAP_MAX_ITERS")
    if raw is None:
        return kernels.DEFAULT_MAXITER
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParams(f"HALFMAP_MAX_ITERS must be an integer, got {raw!r}") from None
    if value < 1:
        raise InvalidParams("HALFMAP_MAX_ITERS must be >= 1")
    return value


@dataclass(frozen=True)
class LienardParams:
    """One linear zone: trace ``T``, determinant ``D`` and offset ``a``.

    Fields may be ints or ``fractions.Fraction`` (kept exact for the series
    code) or floats.
    """

    T: Real
    D: Real
    a: Real

    def __post_init__(self):
        for name in ("T", "D", "a"):
            v = getattr(self, name)
            if not isinstance(v, Real) or isinstance(v, bool):
                raise InvalidParams(f"{name} must be a real number, got {v!r}")
            if not math.isfinite(float(v)):
                raise InvalidParams(f"{name} must be finite, got {v!r}")
        if self.a == 0 and self.D == 0:
            raise InvalidParams("requires a^2+D^2 != 0 (a continuum of equilibria otherwise)")

    def floats(self) -> tuple[float, float, float]:
        return float(self.T), float(self.D), float(self.a)

    @property
    def focus_discriminant(self) -> float:
        """4D - T^2 (positive for a focus or a center)."""
        T, D, _ = self.floats()
        return 4.0 * D - T * T

    def reflected(self) -> "LienardParams":
        """Parameters of the mirror zone under (x, y, a) -> (-x, -y, -a) and time reversal.

        Used for backward half-maps of a right zone: (T, D, a) -> (-T, D, -a).
        """
        return LienardParams(-self.T, self.D, -self.a)


@dataclass(frozen=True)
class QuadraticW:
    """W(y) = D y^2 - a T y + a^2 with its real roots (ascending)."""

    coefficients: tuple[float, float, float]   # (y^2, y^1, y^0)
    roots: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __call__(self, y: float) -> float:
        c2, c1, c0 = self.coefficients
        return (c2 * y + c1) * y + c0


class EndpointKind(enum.Enum):
    CLOSED = "closed-at-value"
    OPEN_ROOT = "open-at-root-of-W"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Endpoint:
    value: float
    kind: EndpointKind

    def to_dict(self) -> dict:
        return {"value": self.value, "kind": self.kind.value}


@dataclass(frozen=True)
class DomainInfo:
    """Definition interval I of P and its image P(I).

    ``i_lower`` is always closed (0 or the preimage of the tangency),
    ``image_upper`` is closed (0 or P(0)); the other two ends are either open
    at a root of W or unbounded.
    """

    exists: bool
    i_lower: Endpoint | None = None
    i_upper: Endpoint | None = None
    image_lower: Endpoint | None = None
    image_upper: Endpoint | None = None
    hat_y0: float | None = None
    hat_y1: float | None = None
    reason: str = ""

    def contains(self, y0: float) -> bool:
        if not self.exists:
            return False
        if y0 < self.i_lower.value:
            return False
        if self.i_upper.kind is EndpointKind.UNBOUNDED:
            return y0 < INF
        return y0 < self.i_upper.value

    def interior_contains(self, y0: float) -> bool:
        return self.contains(y0) and y0 > self.i_lower.value

    def image_contains(self, y1: float) -> bool:
        if not self.exists:
            return False
        if y1 > self.image_upper.value:
            return False
        if self.image_lower.kind is EndpointKind.UNBOUNDED:
            return y1 > -INF
        return y1 > self.image_lower.value

    @property
    def involutive(self) -> bool:
        """True when P(0) = 0 with W(0) > 0, i.e. P extends to an involution."""
        return self.exists and self.i_lower.value == 0.0 and self.image_upper.value == 0.0

    def to_dict(self) -> dict:
        if not self.exists:
            return {"exists": False, "reason": self.reason}
        return {
            "exists": True,
            "I": [self.i_lower.to_dict(), self.i_upper.to_dict()],
            "image": [self.image_lower.to_dict(), self.image_upper.to_dict()],
            "hat_y0": self.hat_y0,
            "hat_y1": self.hat_y1,
        }


@dataclass(frozen=True)
class PvConstant:
    c: float
    case: str    # "a>0", "a=0" or "a<0"


# --------------------------------------------------------------------------


def eval_w(params: LienardParams, y: float) -> float:
    T, D, a = params.T, params.D, params.a
    return D * y * y - a * T * y + a * a


def quadratic_w(params: LienardParams) -> QuadraticW:
    T, D, a = params.floats()
    n, r1, r2 = kernels.w_roots(T, D, a)
    if n == 0:
        roots, mult = (), ()
    elif n == 2:
        roots, mult = (r1, r2), (1, 1)
    else:
        roots, mult = (r1,), ((2,) if D != 0.0 else (1,))
    return QuadraticW((D, -a * T, a * a), roots, mult)


def _requires_focus(params: LienardParams, what: str) -> None:
    if params.focus_discriminant <= 0.0:
        raise NonexistentHalfMap(f"{what} requires 4D-T^2>0 (got 4D-T^2={params.focus_discriminant!r})")


def c_constant(params: LienardParams) -> PvConstant:
    T, D, a = params.floats()
    if a > 0.0:
        return PvConstant(0.0, "a>0")
    _requires_focus(params, "a<=0")
    base = math.pi / (D * math.sqrt(4.0 * D - T * T))
    if a == 0.0:
        return PvConstant(base, "a=0")
    return PvConstant(2.0 * base, "a<0")


def antiderivative_h(params: LienardParams, y: float) -> float:
    """A primitive of -y/W(y), continuous on each connected component of {W > 0}."""
    T, D, a = params.floats()
    if a == 0.0:
        raise DomainError("the primitive requires a != 0 (W(0)=a^2 vanishes otherwise)")
    w = kernels.w_value(T, D, a, y)
    if not w > 0.0:
        raise DomainError(f"requires W(y)>0, got W({y!r})={w!r}")
    if D == 0.0:
        if T == 0.0:
            return -y * y / (2.0 * a * a)
        return y / (a * T) + math.log(w) / (T * T)
    disc = T * T - 4.0 * D
    if disc < 0.0:
        k = abs(a) * math.sqrt(-disc)
        j = 2.0 / k * math.atan((2.0 * D * y - a * T) / k)
    elif disc > 0.0:
        _, r1, r2 = kernels.w_roots(T, D, a)
        j = math.log(abs((y - r2) / (y - r1))) / (D * (r2 - r1))
    else:
        r = a * T / (2.0 * D)
        j = -1.0 / (D * (y - r))
    return -math.log(w) / (2.0 * D) - a * T / (2.0 * D) * j


def integral_value(params: LienardParams, y1: float, y0: float) -> float:
    """PV integral of -y/W(y) from y1 to y0, for y1 <= 0 <= y0."""
    T, D, a = params.floats()
    y1 = float(y1)
    y0 = float(y0)
    if not (y1 <= 0.0 <= y0):
        raise DomainError(f"requires y1<=0<=y0, got y1={y1!r}, y0={y0!r}")
    if a == 0.0:
        if y1 == 0.0 and y0 == 0.0:
            return 0.0
        if y1 == 0.0 or y0 == 0.0:
            raise PvUndefined("the principal value with a=0 requires y1<0<y0 (or y1=y0=0)")
        if not D > 0.0:
            raise DomainError("requires W(y)=D y^2>0 away from 0, i.e. D>0")
        return math.log(-y1 / y0) / D
    n, r1, r2 = kernels.w_roots(T, D, a)
    for r in (r1, r2)[: max(n, 0)] if n else ():
        if y1 <= r <= y0:
            raise DomainError(f"W vanishes at y={r!r} inside [{y1!r}, {y0!r}]")
    if n == 1 and y1 <= r1 <= y0:
        raise DomainError(f"W vanishes at y={r1!r} inside [{y1!r}, {y0!r}]")
    return kernels.integral_diff(T, D, a, y1, y0)


# --------------------------------------------------------------------------
# domain


def _xtol() -> float:
    return kernels.DEFAULT_XTOL


@functools.lru_cache(maxsize=4096)
def domain_interval(params: LienardParams) -> DomainInfo:
    T, D, a = params.floats()
    disc4 = 4.0 * D - T * T
    closed0 = Endpoint(0.0, EndpointKind.CLOSED)
    if a > 0.0:
        n, r1, r2 = kernels.w_roots(T, D, a)
        roots = sorted({r1, r2}) if n else []
        pos = [r for r in roots if r > 0.0]
        neg = [r for r in roots if r < 0.0]
        upper = Endpoint(min(pos), EndpointKind.OPEN_ROOT) if pos else Endpoint(INF, EndpointKind.UNBOUNDED)
        lower = Endpoint(max(neg), EndpointKind.OPEN_ROOT) if neg else Endpoint(-INF, EndpointKind.UNBOUNDED)
        return DomainInfo(True, closed0, upper, lower, closed0)
    if disc4 <= 0.0:
        return DomainInfo(False, reason=f"a<=0 requires 4D-T^2>0 (got 4D-T^2={disc4!r})")
    unbounded_up = Endpoint(INF, EndpointKind.UNBOUNDED)
    unbounded_down = Endpoint(-INF, EndpointKind.UNBOUNDED)
    if a == 0.0 or T == 0.0:
        return DomainInfo(True, closed0, unbounded_up, unbounded_down, closed0)
    cT = c_constant(params).c * T
    maxiter = max_iterations()
    if T > 0.0:
        hat_y1, status = kernels.solve_y1(T, D, a, cT, 0.0, -INF, False, _xtol(), maxiter)
        if status != kernels.OK:
            raise NoConvergence(f"could not solve for P(0) (status {status})")
        return DomainInfo(True, closed0, unbounded_up, unbounded_down,
                          Endpoint(hat_y1, EndpointKind.CLOSED), hat_y1=hat_y1)
    hat_y0, status = kernels.solve_y0(T, D, a, cT, 0.0, 0.0, INF, False, _xtol(), maxiter)
    if status != kernels.OK:
        raise NoConvergence(f"could not solve for the preimage of 0 (status {status})")
    return DomainInfo(True, Endpoint(hat_y0, EndpointKind.CLOSED), unbounded_up, unbounded_down,
                      closed0, hat_y0=hat_y0)


def _existing_domain(params: LienardParams) -> DomainInfo:
    info = domain_interval(params)
    if not info.exists:
        raise NonexistentHalfMap(f"no left half-map for {params}: {info.reason}")
    return info


def _tangency_radius(params: LienardParams) -> float:
    T, _, a = params.floats()
    return TANGENCY_RADIUS * abs(a) / max(1.0, abs(T))


@functools.lru_cache(maxsize=1024)
def _origin_coefficients(params: LienardParams) -> tuple[float, ...]:
    from .series import taylor_origin

    return tuple(float(c) for c in taylor_origin(params, TANGENCY_SERIES_ORDER).coefficients)


def _origin_series(params: LienardParams, y: float) -> float:
    acc = 0.0
    for c in reversed(_origin_coefficients(params)):
        acc = (acc + c) * y
    return acc


def _focus_ratio(params: LienardParams) -> float:
    """exp(pi T / sqrt(4D - T^2)): the slope of -P for a = 0 and at infinity."""
    T, D, _ = params.floats()
    return math.exp(math.pi * T / math.sqrt(4.0 * D - T * T))


def half_map(params: LienardParams, y0: float) -> float:
    """P(y0) for y0 in the definition interval."""
    info = _existing_domain(params)
    y0 = float(y0)
    if not info.contains(y0):
        raise OutOfDomain(f"y0={y0!r} is outside I={_interval_str(info)}")
    T, D, a = params.floats()
    if T == 0.0:
        return -y0
    if a == 0.0:
        return -_focus_ratio(params) * y0
    if y0 == 0.0:
        return info.image_upper.value
    if info.hat_y0 is not None and y0 == info.hat_y0:
        return 0.0
    if info.involutive and y0 < _tangency_radius(params):
        return _origin_series(params, y0)
    lower = info.image_lower
    y1, status = kernels.solve_y1(
        T, D, a, c_constant(params).c * T, y0,
        lower.value, lower.kind is EndpointKind.OPEN_ROOT, _xtol(), max_iterations(),
    )
    if status != kernels.OK:
        raise NoConvergence(f"root-finding for P({y0!r}) failed with status {status} for {params}")
    return y1


def half_map_inverse(params: LienardParams, y1: float) -> float:
    """P^{-1}(y1) for y1 in P(I)."""
    info = _existing_domain(params)
    y1 = float(y1)
    if not info.image_contains(y1):
        raise OutOfDomain(f"y1={y1!r} is outside P(I)={_image_str(info)}")
    T, D, a = params.floats()
    if T == 0.0:
        return -y1
    if a == 0.0:
        return -y1 / _focus_ratio(params)
    if y1 == 0.0 and info.hat_y0 is not None:
        return info.hat_y0
    if y1 == info.image_upper.value:
        return info.i_lower.value
    if info.involutive and -y1 < _tangency_radius(params):
        # P is an involution near the tangency, so its series also inverts it
        return _origin_series(params, y1)
    upper = info.i_upper
    y0, status = kernels.solve_y0(
        T, D, a, c_constant(params).c * T, y1, info.i_lower.value,
        upper.value, upper.kind is EndpointKind.OPEN_ROOT, _xtol(), max_iterations(),
    )
    if status != kernels.OK:
        raise NoConvergence(f"root-finding for P^-1({y1!r}) failed with status {status} for {params}")
    return y0


def involution(params: LienardParams, y: float) -> float:
    """The involution extending P when P(0)=0: P on y >= 0 and P^{-1} on y < 0."""
    info = _existing_domain(params)
    if not info.involutive:
        raise PreconditionViolated("the involution requires a != 0, 0 in I and P(0)=0")
    y = float(y)
    return half_map(params, y) if y >= 0.0 else half_map_inverse(params, y)


def _interior_value(params: LienardParams, y0: float) -> float:
    info = _existing_domain(params)
    y0 = float(y0)
    if not info.interior_contains(y0):
        raise OutOfDomain(f"y0={y0!r} is not in the interior of I={_interval_str(info)}")
    y1 = half_map(params, y0)
    if y1 == 0.0:
        raise TangencyPoint(f"P({y0!r})=0: the derivative is unbounded at the tangency")
    return y1


def _root_primitive(r, c, D, s):
    """A primitive of -y/W(y) in s = y - r, where W(r) = 0 and W'(r) = c."""
    if c == 0.0:
        return r / (D * s) - math.log(s) / D
    k = r / c
    if D == 0.0:
        return -k * math.log(s) - s / c
    return -k * math.log(s) - (1.0 - k * D) / D * math.log(abs(c + D * s))


def half_map_offset(params: LienardParams, y0: float) -> tuple[float, float]:
    """P(y0) as (r, d) with P = r + d, r the root of W bounding P(I) (0 if none).

    Near r the value of P carries too few digits to resolve W(P); d is then
    solved for in log scale, so it keeps full relative precision.
    """
    info = _existing_domain(params)
    y1 = half_map(params, y0)
    lower = info.image_lower
    if lower.kind is not EndpointKind.OPEN_ROOT:
        return 0.0, y1
    r = lower.value
    d = y1 - r
    if d > 1e-3 * abs(r):
        return r, d
    T, D, a = params.floats()
    c = 2.0 * D * r - a * T
    m = 0.5 * r
    target = _root_primitive(r, c, D, m - r) + kernels.integral_diff(T, D, a, m, float(y0)) \
        - c_constant(params).c * T

    def g(u):
        return _root_primitive(r, c, D, math.exp(u)) - target

    hi = math.log(m - r)
    lo = math.log(max(d, 1e-300)) - 1.0
    floor = math.log(5e-324)
    while g(lo) > 0.0 and lo > floor:
        lo = max(2.0 * lo - hi, floor)
    if g(lo) > 0.0:
        return r, 0.0    # below the smallest subnormal
    u = brentq(g, lo, hi, xtol=1e-15, rtol=4.0 * 2.0 ** -52, maxiter=max_iterations())
    return r, math.exp(u)


def half_map_inverse_offset(params: LienardParams, d: float) -> float:
    """P^{-1}(r + d), with r as in half_map_offset; keeps precision for tiny d."""
    info = _existing_domain(params)
    lower = info.image_lower
    if lower.kind is not EndpointKind.OPEN_ROOT:
        return half_map_inverse(params, d)
    r = lower.value
    if not d > 0.0:
        raise OutOfDomain(f"the offset d={d!r} must be positive")
    if d > 1e-3 * abs(r):
        return half_map_inverse(params, r + d)
    T, D, a = params.floats()
    c = 2.0 * D * r - a * T
    m = 0.5 * r
    target = c_constant(params).c * T - _root_primitive(r, c, D, m - r) + _root_primitive(r, c, D, d)

    def g(y0):
        return kernels.integral_diff(T, D, a, m, y0) - target

    lo = info.i_lower.value
    upper = info.i_upper
    if upper.kind is EndpointKind.UNBOUNDED:
        hi = max(1.0, 2.0 * lo)
        while g(hi) > 0.0:
            lo, hi = hi, 2.0 * hi
    else:
        hi = upper.value
        if g(hi) > 0.0:
            return hi
    return brentq(g, lo, hi, xtol=1e-15, rtol=4.0 * 2.0 ** -52, maxiter=max_iterations())


def _w_at_image(params: LienardParams, y0: float, y1: float) -> float:
    T, D, a = params.floats()
    r, d = half_map_offset(params, y0) if y1 < 0.0 else (0.0, y1)
    if r == 0.0:
        return kernels.w_value(T, D, a, y1)
    # W(r + d) = d (W'(r) + D d) keeps its relative precision as d -> 0
    return d * (2.0 * D * r - a * T + D * d)


def derivative1(params: LienardParams, y0: float) -> float:
    """dP/dy0 = y0 W(P) / (P W(y0))."""
    y1 = _interior_value(params, y0)
    T, D, a = params.floats()
    y0 = float(y0)
    return y0 * _w_at_image(params, y0, y1) / (y1 * kernels.w_value(T, D, a, y0))


def derivative2(params: LienardParams, y0: float) -> float:
    """d2P/dy0^2 = -a^2 (y0^2 - P^2) W(P) / (P^3 W(y0)^2)."""
    y1 = _interior_value(params, y0)
    T, D, a = params.floats()
    y0 = float(y0)
    w0 = kernels.w_value(T, D, a, y0)
    # (y0 - P)(y0 + P) keeps the sign of y0 + P exact
    return -a * a * (y0 - y1) * (y0 + y1) * _w_at_image(params, y0, y1) / (y1 ** 3 * w0 * w0) + 0.0


def bisector_position(params: LienardParams, y0: float) -> int:
    """sign(y0 + P(y0)): position of the graph relative to y1 = -y0."""
    info = _existing_domain(params)
    y0 = float(y0)
    if not info.contains(y0):
        raise OutOfDomain(f"y0={y0!r} is outside I={_interval_str(info)}")
    if params.T == 0:
        return 0
    if y0 == 0.0 and info.image_upper.value == 0.0:
        raise OutOfDomain("y0=0 is excluded when P(0)=0 and T != 0")
    s = y0 + half_map(params, y0)
    return (s > 0.0) - (s < 0.0)


def _interval_str(info: DomainInfo) -> str:
    hi = info.i_upper
    right = "+inf)" if hi.kind is EndpointKind.UNBOUNDED else f"{hi.value!r})"
    return f"[{info.i_lower.value!r}, {right}"


def _image_str(info: DomainInfo) -> str:
    lo = info.image_lower
    left = "(-inf" if lo.kind is EndpointKind.UNBOUNDED else f"({lo.value!r}"
    return f"{left}, {info.image_upper.value!r}]"
