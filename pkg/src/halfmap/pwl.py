"""Crossing periodic orbits of two-zone piecewise linear systems.

The system in canonical form is

    x' = T_L x - y,     y' = D_L x - a_L     (x < 0)
    x' = T_R x - y + b, y' = D_R x - a_R     (x > 0)

Its crossing periodic orbits are the intersections of the forward half-map
y_L(y0) = P_L(y0) with the backward half-map y_R(y0) = P_R*(y0 - b) + b,
where P_R* is the left half-map of (-T_R, D_R, -a_R).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import (
    EndpointKind,
    LienardParams,
    derivative1,
    domain_interval,
    half_map,
)
from .errors import OutOfDomain, SearchBudgetExceeded
from .flow import first_return, first_return_backward, right_zone_backward, right_zone_forward
from .series import taylor_infinity

__all__ = [
    "PwlSystem",
    "SlidingSegment",
    "Certificate",
    "CrossingOrbit",
    "CrossingOrbitReport",
    "SearchConfig",
    "forward_map",
    "backward_map",
    "displacement",
    "common_interval",
    "corollary_certificates",
    "find_crossing_orbits",
    "orbit_closure_error",
]

# certificate names
ZERO_TRACES = "zero-traces"
BISECTOR_SEPARATION = "bisector-separation"
CONCAVITY_BOUND = "concavity-bound"
NO_LIMIT_CYCLES = "no-limit-cycles"


@dataclass(frozen=True)
class PwlSystem:
    left: LienardParams
    right: LienardParams
    b: float = 0.0

    @property
    def sewing(self) -> bool:
        return self.b == 0

    @property
    def reflected_right(self) -> LienardParams:
        return self.right.reflected()

    @property
    def sliding_segment(self) -> "SlidingSegment":
        return SlidingSegment(min(0.0, float(self.b)), max(0.0, float(self.b)))


@dataclass(frozen=True)
class SlidingSegment:
    """Open segment of the section between the tangency points (0, 0) and (0, b)."""

    lower: float
    upper: float

    @property
    def empty(self) -> bool:
        return self.lower == self.upper

    def contains(self, y: float) -> bool:
        return self.lower < y < self.upper

    def closure_contains(self, y: float) -> bool:
        return self.lower <= y <= self.upper


@dataclass(frozen=True)
class Certificate:
    name: str
    conclusion: str        # "none", "continuum", "none-or-continuum" or "at-most-2-limit-cycles"
    bound: int | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "conclusion": self.conclusion, "bound": self.bound}


@dataclass(frozen=True)
class CrossingOrbit:
    y0: float
    y1: float
    multiplier: float
    stability: str
    tangential: bool = False

    def to_dict(self) -> dict:
        return {"y0": self.y0, "y1": self.y1, "multiplier": self.multiplier,
                "stability": self.stability, "tangential": self.tangential}


@dataclass(frozen=True)
class CrossingOrbitReport:
    classification: str          # "none", "continuum" or "finite"
    orbits: tuple[CrossingOrbit, ...] = ()
    certificate: str | None = None
    certificates: tuple[Certificate, ...] = ()
    interval: tuple[float, float] | None = None
    samples: tuple[tuple[float, float], ...] = ()
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "classification": self.classification,
            "certificate": self.certificate,
            "orbits": [o.to_dict() for o in self.orbits],
            "certificates": [c.to_dict() for c in self.certificates],
            "interval": list(self.interval) if self.interval else None,
            "note": self.note,
        }


@dataclass(frozen=True)
class SearchConfig:
    grid_points: int = 400
    root_xtol: float = 1e-11
    tangential_tol: float = 1e-9
    continuum_samples: int = 64
    continuum_tol: float = 1e-12
    nonhyperbolic_band: float = 1e-6
    tail_factor: float = 1e3         # the grid covers up to lo + tail_factor * scale
    tail_points_per_decade: int = 20
    tail_cap_decades: int = 12
    use_certificates: bool = True
    keep_samples: bool = False


# --------------------------------------------------------------------------
# maps


def forward_map(sys: PwlSystem, y0: float) -> float:
    return half_map(sys.left, y0)


def backward_map(sys: PwlSystem, y0: float) -> float:
    b = float(sys.b)
    return half_map(sys.reflected_right, float(y0) - b) + b


def common_interval(sys: PwlSystem):
    """(lo, hi) = interior of I_L and I_R in y0, or None when empty or missing."""
    left = domain_interval(sys.left)
    right = domain_interval(sys.reflected_right)
    if not (left.exists and right.exists):
        return None
    b = float(sys.b)
    lo = max(left.i_lower.value, right.i_lower.value + b)
    hi = min(left.i_upper.value, right.i_upper.value + b)
    if not lo < hi:
        return None
    return lo, hi


def displacement(sys: PwlSystem, y0: float) -> float:
    span = common_interval(sys)
    y0 = float(y0)
    if span is None or not span[0] < y0 < span[1]:
        raise OutOfDomain(f"y0={y0!r} is not in the interior of I_L and I_R ({span})")
    return forward_map(sys, y0) - backward_map(sys, y0)


# --------------------------------------------------------------------------
# analytic conclusions


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def corollary_certificates(sys: PwlSystem) -> list[Certificate]:
    """Every analytic conclusion whose hypotheses hold, from T_L, T_R and b alone
    (the zero-trace continuum case also needs the two domains to overlap)."""
    tl, tr, b = sys.left.T, sys.right.T, sys.b
    out = []
    if tl == 0 and tr == 0:
        if b != 0:
            out.append(Certificate(ZERO_TRACES, "none"))
        elif common_interval(sys) is not None:
            out.append(Certificate(ZERO_TRACES, "continuum"))
        else:
            out.append(Certificate(ZERO_TRACES, "none"))
    if tl * tr >= 0 and ((tl != 0 and tl * b >= 0) or (tr != 0 and tr * b >= 0)):
        out.append(Certificate(BISECTOR_SEPARATION, "none"))
    if tl * tr > 0:
        out.append(Certificate(CONCAVITY_BOUND, "at-most-2-limit-cycles", 2))
    if tl * tr >= 0 and tl * b >= 0:
        out.append(Certificate(NO_LIMIT_CYCLES, "none-or-continuum"))
    return out


# --------------------------------------------------------------------------
# numeric search


def _zone_scale(p: LienardParams) -> float:
    T, D, a = p.floats()
    rate = max(math.sqrt(abs(D)), abs(T))
    return abs(a) / rate if rate > 0.0 else abs(a)


def _scale(sys: PwlSystem) -> float:
    s = max(_zone_scale(sys.left), _zone_scale(sys.right), abs(float(sys.b)))
    return s if s > 0.0 else 1.0


def _grid(lo: float, hi: float, scale: float, cfg: SearchConfig) -> np.ndarray:
    n = cfg.grid_points
    if math.isfinite(hi):
        # dense near both endpoints
        s = np.linspace(-11.5, 11.5, n)
        pts = lo + (hi - lo) * 0.5 * (1.0 + np.tanh(s))
    else:
        pts = lo + scale * np.logspace(-10.0, math.log10(cfg.tail_factor), n)
    pts = pts[(pts > lo) & (pts < hi)]
    return np.unique(pts)


def _classify(m: float, band: float) -> str:
    if abs(m) < 1.0 - band:
        return "stable"
    if abs(m) > 1.0 + band:
        return "unstable"
    return "nonhyperbolic"


def _make_orbit(sys: PwlSystem, y0: float, cfg: SearchConfig, tangential: bool) -> CrossingOrbit:
    b = float(sys.b)
    y1 = forward_map(sys, y0)
    m = derivative1(sys.left, y0) / derivative1(sys.reflected_right, y0 - b)
    stability = "nonhyperbolic" if tangential else _classify(m, cfg.nonhyperbolic_band)
    return CrossingOrbit(float(y0), float(y1), float(m), stability, tangential)


class _Scan:
    """Displacement samples with root bracketing, kept sorted by y0."""

    def __init__(self, sys, lo, hi, scale, cfg):
        self.sys, self.lo, self.hi, self.scale, self.cfg = sys, lo, hi, scale, cfg
        self.ys: list[float] = []
        self.ds: list[float] = []

    def d(self, y):
        return displacement(self.sys, y)

    def add(self, ys):
        for y in ys:
            y = float(y)
            if self.ys and y <= self.ys[-1]:
                continue
            self.ys.append(y)
            self.ds.append(self.d(y))

    def _tangential_tol(self, y):
        # absolute in units of the system, plus what rounding of the two maps leaves in d
        noise = 16.0 * np.finfo(float).eps * (abs(forward_map(self.sys, y)) + abs(backward_map(self.sys, y)))
        return self.cfg.tangential_tol * self.scale + noise

    def roots(self):
        ys, ds = self.ys, self.ds
        cfg = self.cfg
        found = []
        for i in range(len(ys)):
            if ds[i] == 0.0:
                found.append((ys[i], False))
        for i in range(len(ys) - 1):
            if ds[i] * ds[i + 1] < 0.0:
                r = brentq(self.d, ys[i], ys[i + 1], xtol=cfg.root_xtol, rtol=4 * np.finfo(float).eps,
                           maxiter=200)
                found.append((r, False))
        # tangential zeros: local minima of |d| without a sign change
        for i in range(1, len(ys) - 1):
            di = abs(ds[i])
            if di == 0.0 or not (di <= abs(ds[i - 1]) and di <= abs(ds[i + 1])):
                continue
            if di == abs(ds[i - 1]) and di == abs(ds[i + 1]):
                continue
            if _sign(ds[i - 1]) != _sign(ds[i]) or _sign(ds[i + 1]) != _sign(ds[i]):
                continue
            sgn = _sign(ds[i])
            res = minimize_scalar(lambda y: sgn * self.d(y), bounds=(ys[i - 1], ys[i + 1]),
                                  method="bounded", options={"xatol": 1e-14 * max(1.0, ys[i])})
            y = float(res.x)
            if abs(self.d(y)) <= self._tangential_tol(y) and y - self.lo >= 1e-6 * self.scale:
                found.append((y, True))
        found.sort()
        merged = []
        for y, tang in found:
            if merged and abs(y - merged[-1][0]) <= 1e-9 * (1.0 + abs(y)):
                continue
            merged.append((y, tang))
        return merged


def _asymptote(sys: PwlSystem):
    """Slope and intercept of d(y0) at infinity when both zones are foci."""
    try:
        left = taylor_infinity(sys.left, 2).floats()
        right = taylor_infinity(sys.reflected_right, 2).floats()
    except Exception:
        return None
    b = float(sys.b)
    # y_R(y) = A_R (y - b) + B_R + b + o(1)
    slope = left[0] - right[0]
    icpt = left[1] - (right[1] + b - right[0] * b)
    return slope, icpt


def _tail_certified(scan: _Scan, asym) -> bool:
    y, d = scan.ys[-1], scan.ds[-1]
    if asym is not None:
        slope, icpt = asym
        lin = slope * y + icpt
        tol = 1e-9 * (1.0 + abs(y))
        if abs(slope) > 1e-12 * (1.0 + abs(icpt) / y) and _sign(lin) == _sign(slope) and _sign(d) == _sign(slope):
            return abs(d - lin) <= 0.5 * abs(lin)
        if abs(slope) <= 1e-12 and abs(icpt) > tol:
            return _sign(d) == _sign(icpt) and abs(d - icpt) <= 0.5 * abs(icpt)
        return False
    # real spectra: require the sign and d/y to have settled over the last three decades
    k = 3 * scan.cfg.tail_points_per_decade
    if len(scan.ds) < k:
        return False
    tail = scan.ds[-k:]
    if any(_sign(v) != _sign(d) for v in tail) or d == 0.0:
        return False
    # either d/y0 or d itself has settled
    prev = -scan.cfg.tail_points_per_decade
    r1 = scan.ds[-1] / scan.ys[-1]
    r0 = scan.ds[prev] / scan.ys[prev]
    return abs(r1 - r0) <= 1e-3 * abs(r1) or abs(d - scan.ds[prev]) <= 1e-3 * abs(d)


def _is_continuum(scan: _Scan, cfg: SearchConfig) -> bool:
    n = len(scan.ys)
    if n == 0:
        return False
    idx = np.unique(np.linspace(0, n - 1, min(cfg.continuum_samples, n)).astype(int))
    return all(abs(scan.ds[i]) <= cfg.continuum_tol * (1.0 + abs(scan.ys[i])) for i in idx)


def find_crossing_orbits(sys: PwlSystem, config: SearchConfig | None = None) -> CrossingOrbitReport:
    cfg = config or SearchConfig()
    certs = tuple(corollary_certificates(sys))
    span = common_interval(sys)
    if span is None:
        return CrossingOrbitReport("none", certificates=certs,
                                   note="the half-maps do not exist or their domains do not overlap")
    lo, hi = span
    if cfg.use_certificates:
        for c in certs:
            if c.name == ZERO_TRACES or c.name == BISECTOR_SEPARATION:
                return CrossingOrbitReport(c.conclusion, certificate=c.name, certificates=certs, interval=span)

    scale = _scale(sys)
    scan = _Scan(sys, lo, hi, scale, cfg)
    scan.add(_grid(lo, hi, scale, cfg))
    if not math.isfinite(hi) and not _is_continuum(scan, cfg):
        asym = _asymptote(sys)
        y = scan.ys[-1]
        cap = y * 10.0 ** cfg.tail_cap_decades
        if asym is not None and asym[0] != 0.0:
            # the linear asymptote must be past its own zero
            cap = max(cap, 100.0 * abs(asym[1] / asym[0]))
        while not _tail_certified(scan, asym):
            if y >= cap:
                partial = _report(sys, scan, cfg, certs, span, "tail of the displacement unresolved")
                raise SearchBudgetExceeded(
                    f"no sign certificate for the displacement beyond y0={y!r} (scale {scale!r})", partial)
            scan.add(y * np.logspace(0.0, 1.0, cfg.tail_points_per_decade + 1)[1:])
            y = scan.ys[-1]
    return _report(sys, scan, cfg, certs, span, "")


def _report(sys, scan, cfg, certs, span, note) -> CrossingOrbitReport:
    samples = tuple(zip(scan.ys, scan.ds)) if cfg.keep_samples else ()
    if _is_continuum(scan, cfg):
        return CrossingOrbitReport("continuum", certificates=certs, interval=span, samples=samples, note=note)
    seg = sys.sliding_segment
    orbits = []
    for y0, tang in scan.roots():
        o = _make_orbit(sys, y0, cfg, tang)
        # intersection points on the closed sliding segment are not crossing orbits
        if (not seg.empty and seg.closure_contains(o.y1)) or (seg.empty and o.y1 == seg.lower):
            continue
        orbits.append(o)
    cls = "finite" if orbits else "none"
    return CrossingOrbitReport(cls, tuple(orbits), None, certs, span, samples, note)


def orbit_closure_error(sys: PwlSystem, y0: float, multiplier: float = 1.0) -> float:
    """|y0 - y0'| after one left and one right passage of the flow oracle.

    The circuit runs forward in time when the orbit attracts (|multiplier| <= 1)
    and backward otherwise, so rounding is damped rather than amplified.
    """
    b = float(sys.b)
    if abs(multiplier) <= 1.0:
        y1 = first_return(sys.left, y0).exit_y
        back = right_zone_forward(sys.right, b, y1).exit_y
    else:
        y1 = right_zone_backward(sys.right, b, y0).exit_y
        back = first_return_backward(sys.left, y1).exit_y
    return abs(back - float(y0))
