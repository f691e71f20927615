import math
import random

import numpy as np
import pytest
from scipy.optimize import brentq

from halfmap import (
    LienardParams,
    PwlSystem,
    SearchConfig,
    backward_map,
    corollary_certificates,
    displacement,
    find_crossing_orbits,
    forward_map,
    oracle_half_map,
)
from halfmap.errors import OutOfDomain
from halfmap.flow import right_zone_backward
from halfmap.pwl import common_interval, orbit_closure_error

from oracles import frozen

P = LienardParams
UNSTABLE_CYCLE = PwlSystem(P(1.9, 0.5, 1.5), P(-0.8, 1.25, -0.4), 0.0)


def _names(sys):
    return {(c.name, c.conclusion, c.bound) for c in corollary_certificates(sys)}


def test_certificates_same_trace_sign():
    got = _names(PwlSystem(P(1, 1, 1), P(2, 1, 1), 0))
    assert ("bisector-separation", "none", None) in got
    assert ("concavity-bound", "at-most-2-limit-cycles", 2) in got


def test_certificates_zero_traces():
    assert ("zero-traces", "continuum", None) in _names(PwlSystem(P(0, 1, 0), P(0, 1, 0), 0))
    assert ("zero-traces", "none", None) in _names(PwlSystem(P(0, 1, 0), P(0, 1, 0), 1))


def test_certificates_opposite_traces():
    assert corollary_certificates(PwlSystem(P(1, 1, 1), P(-1, 1, 1), 0)) == []


def test_forward_map_examples():
    sys = PwlSystem(P(0, 1, 1), P(1, 1, 1), 0)
    assert forward_map(sys, 2.5) == -2.5
    sys = PwlSystem(P(1, 1, 1), P(1, 1, 1), 0)
    assert forward_map(sys, 1.0) == pytest.approx(frozen.P_T1_D1_A1_AT_1, rel=1e-12)
    assert forward_map(sys, 1.0) == pytest.approx(oracle_half_map(P(1, 1, 1), 1.0), rel=1e-8)


def test_backward_map_examples():
    sys = PwlSystem(P(1, 1, 1), P(0, 2, 1), 0.5)
    assert backward_map(sys, 3.0) == pytest.approx(-3.0 + 1.0, abs=1e-12)
    sys = PwlSystem(P(1, 1, 1), P(0, 1, 0), 0)
    assert backward_map(sys, 1.0) == pytest.approx(-1.0, abs=1e-12)
    with pytest.raises(OutOfDomain):
        backward_map(PwlSystem(P(1, 1, 1), P(1, 1, 1), 2.0), 1.0)


@pytest.mark.parametrize("seed", range(10))
def test_reduction_identity(seed):
    rng = random.Random(seed)
    right = P(rng.uniform(-2, 2), rng.uniform(0.5, 3), rng.uniform(-2, 2))
    b = rng.uniform(-1, 1)
    sys = PwlSystem(P(1, 1, 1), right, b)
    for y0 in (b + 0.3, b + 1.7, b + 6.0):
        try:
            got = backward_map(sys, y0)
        except OutOfDomain:
            continue
        want = right_zone_backward(right, b, y0).exit_y
        assert abs(got - want) <= 1e-8 * (1 + abs(want))


@pytest.mark.parametrize("tl,tr,b", [(1, 0, 0), (0.5, 2, 0.3), (1.5, 1, 1), (1e-3, 0.2, 0)])
def test_bisector_chain(tl, tr, b):
    sys = PwlSystem(P(tl, 1.0, 0.7), P(tr, 1.3, -0.4), b)
    lo, hi = common_interval(sys)
    for y0 in lo + np.logspace(-2, 2, 15):
        if not y0 < hi:
            continue
        yl, yr = forward_map(sys, y0), backward_map(sys, y0)
        assert yl < -y0 <= -y0 + 2 * b <= yr + 1e-12 * (1 + abs(yr))


def test_displacement_examples():
    sys = PwlSystem(P(0, 1, 1), P(0, 2, -1), 0)
    for y0 in (0.1, 1.0, 30.0):
        assert displacement(sys, y0) == 0.0
    sys = PwlSystem(P(1, 1, 1), P(1, 1, 1), 0)
    lo, _ = common_interval(sys)
    assert lo == pytest.approx(frozen.HAT_Y0_TM1_D1_AM1, rel=1e-12)
    assert all(displacement(sys, y0) < 0 for y0 in lo + np.logspace(-3, 3, 25))
    with pytest.raises(OutOfDomain):
        displacement(sys, 1.0)


def test_find_examples():
    r = find_crossing_orbits(PwlSystem(P(0, 1, 0), P(0, 1, 0), 1))
    assert r.classification == "none"
    assert r.certificate == "zero-traces"
    r = find_crossing_orbits(PwlSystem(P(0, 1, 0), P(0, 1, 0), 0))
    assert r.classification == "continuum"
    r = find_crossing_orbits(PwlSystem(P(1, 1, 1), P(1, 1, 1), 0))
    assert r.classification == "none"
    assert r.certificate == "bisector-separation"


def test_numeric_continuum_without_certificates():
    r = find_crossing_orbits(PwlSystem(P(0, 1, 1), P(0, 2, -1), 0), SearchConfig(use_certificates=False))
    assert r.classification == "continuum"


def test_empty_overlap_is_none():
    r = find_crossing_orbits(PwlSystem(P(1, -1, 1), P(1, -1, 1), 5.0))
    assert r.classification == "none"
    assert r.orbits == ()


def _oracle_displacement(sys, y0):
    return oracle_half_map(sys.left, y0) - right_zone_backward(sys.right, sys.b, y0).exit_y


def test_finite_orbit_matches_oracle():
    r = find_crossing_orbits(UNSTABLE_CYCLE)
    assert r.classification == "finite"
    assert len(r.orbits) == 1
    o = r.orbits[0]
    assert o.stability == "unstable"
    assert o.multiplier > 1
    want = brentq(lambda y: _oracle_displacement(UNSTABLE_CYCLE, y), 0.3, 0.9, xtol=1e-13)
    assert o.y0 == pytest.approx(want, abs=1e-8)
    assert abs(forward_map(UNSTABLE_CYCLE, o.y0) - backward_map(UNSTABLE_CYCLE, o.y0)) <= 1e-9 * (1 + o.y0)
    assert orbit_closure_error(UNSTABLE_CYCLE, o.y0, o.multiplier) <= 1e-7


def test_report_serialises():
    d = find_crossing_orbits(UNSTABLE_CYCLE).to_dict()
    assert set(d) == {"classification", "certificate", "orbits", "certificates", "interval", "note"}
    assert d["orbits"][0]["stability"] == "unstable"


def test_samples_kept_on_request():
    r = find_crossing_orbits(UNSTABLE_CYCLE, SearchConfig(keep_samples=True))
    ys = [y for y, _ in r.samples]
    assert len(ys) > 100
    assert ys == sorted(ys)


@pytest.mark.parametrize("seed", range(8))
def test_orbit_residuals_on_random_focus_pairs(seed):
    rng = random.Random(100 + seed)
    left = P(rng.uniform(0.1, 2), rng.uniform(0.5, 2), rng.uniform(0.2, 2))
    right = P(-rng.uniform(0.1, 2), rng.uniform(0.5, 2), -rng.uniform(0.2, 2))
    sys = PwlSystem(left, right, rng.choice([0.0, rng.uniform(-1, 1)]))
    r = find_crossing_orbits(sys)
    for o in r.orbits:
        assert abs(forward_map(sys, o.y0) - backward_map(sys, o.y0)) <= 1e-9 * (1 + abs(o.y0))
        assert orbit_closure_error(sys, o.y0, o.multiplier) <= 1e-7
        assert math.isfinite(o.multiplier)
