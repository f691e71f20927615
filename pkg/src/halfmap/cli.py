"""Command-line front end.

    halfmap eval   SPEC [--y0 ... | --range LO:HI:STEPS] [--oracle] [--tol X]
    halfmap series SPEC --anchor origin|shifted|puiseux|infinity [--order N]
    halfmap orbits SPEC [--oracle] [--samples PATH]
    halfmap sample SPEC --range LO:HI:STEPS [--trace Y0]
    halfmap reduce SPEC

SPEC is a JSON document (a path, ``-`` for stdin, or the literal text).
Numbers may be JSON numbers or strings such as ``"2/3"``; strings are kept
exact, which selects rational arithmetic in the series code.

Exit codes: 0 success, 2 invalid spec, 3 nonexistent half-map (or a jet whose
anchor does not exist), 4 search budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

from . import __version__
from .core import (
    LienardParams,
    bisector_position,
    derivative1,
    derivative2,
    domain_interval,
    half_map,
)
from .errors import (
    HalfMapError,
    InvalidParams,
    NonexistentHalfMap,
    PreconditionViolated,
    SearchBudgetExceeded,
)
from .flow import oracle_half_map, sample_orbit
from .pwl import PwlSystem, SearchConfig, displacement, find_crossing_orbits, orbit_closure_error
from .series import (
    puiseux_at_hat_y0,
    taylor_infinity,
    taylor_origin,
    taylor_origin_shifted,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONEXISTENT = 3
EXIT_BUDGET = 4


class SpecError(InvalidParams):
    pass


# --------------------------------------------------------------------------
# spec parsing


def parse_number(v, name="value"):
    if isinstance(v, bool):
        raise SpecError(f"{name}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        if not math.isfinite(v):
            raise SpecError(f"{name}: must be finite")
        return v
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise SpecError(f"{name}: cannot parse {v!r} as a decimal or p/q") from None
    raise SpecError(f"{name}: expected a number, got {v!r}")


def reduce_raw(A, bvec):
    """Lienard parameters of x' = A x + b (observable, a12 != 0)."""
    try:
        (a11, a12), (a21, a22) = A
        b1, b2 = bvec
    except (TypeError, ValueError):
        raise SpecError("raw system needs A as [[a11,a12],[a21,a22]] and b as [b1,b2]") from None
    a11, a12, a21, a22 = (parse_number(v, "A") for v in (a11, a12, a21, a22))
    b1, b2 = parse_number(b1, "b"), parse_number(b2, "b")
    if a12 == 0:
        raise SpecError("the reduction requires the observability condition a12 != 0")
    return LienardParams(a11 + a22, a11 * a22 - a12 * a21, a12 * b2 - a22 * b1)


def _zone(d, name):
    if not isinstance(d, dict):
        raise SpecError(f"{name}: expected an object")
    if "raw" in d:
        raw = d["raw"]
        return reduce_raw(raw.get("A"), raw.get("b"))
    if "A" in d:
        return reduce_raw(d.get("A"), d.get("b"))
    try:
        return LienardParams(*(parse_number(d[k], f"{name}.{k}") for k in ("T", "D", "a")))
    except KeyError as e:
        raise SpecError(f"{name}: missing field {e.args[0]!r}") from None


def load_spec(text_or_path: str) -> dict:
    if text_or_path == "-":
        text = sys.stdin.read()
    elif text_or_path.lstrip().startswith("{"):
        text = text_or_path
    else:
        try:
            with open(text_or_path) as fh:
                text = fh.read()
        except OSError as e:
            raise SpecError(f"cannot read spec {text_or_path!r}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"spec is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise SpecError("spec must be a JSON object")
    return doc


def zone_from_spec(doc: dict) -> LienardParams:
    if "zone" in doc:
        return _zone(doc["zone"], "zone")
    if "raw" in doc:
        return _zone(doc, "raw")
    return _zone(doc, "spec")


def system_from_spec(doc: dict) -> PwlSystem:
    if "left" not in doc or "right" not in doc:
        raise SpecError("a piecewise system needs 'left', 'right' and optionally 'b'")
    b = parse_number(doc.get("b", 0), "b")
    return PwlSystem(_zone(doc["left"], "left"), _zone(doc["right"], "right"), float(b))


def parse_range(text: str):
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(Fraction(lo)), float(Fraction(hi)), int(steps)
    except (ValueError, ZeroDivisionError):
        raise SpecError(f"range must be LO:HI:STEPS, got {text!r}") from None
    if steps < 1:
        raise SpecError("range needs STEPS >= 1")
    if steps == 1:
        return [lo]
    return [lo + (hi - lo) * k / (steps - 1) for k in range(steps)]


def _points(args, doc):
    if args.y0:
        return [float(parse_number(v, "y0")) for v in args.y0]
    if args.range:
        return parse_range(args.range)
    if "y0" in doc:
        vals = doc["y0"] if isinstance(doc["y0"], list) else [doc["y0"]]
        return [float(parse_number(v, "y0")) for v in vals]
    if "range" in doc:
        return parse_range(doc["range"])
    raise SpecError("no evaluation points: give --y0, --range or a 'y0'/'range' field")


# --------------------------------------------------------------------------
# output


def _num(v):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else float(v)
    if isinstance(v, float):
        return v + 0.0
    return v


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v + 0.0)
    return str(v)


def _emit(rows, header, fmt, out):
    if fmt == "json":
        payload = [dict(zip(header, (_num(v) for v in r))) for r in rows]
        out.write(json.dumps(_finite(payload), indent=2) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])


def _open_out(path):
    if path in (None, "-"):
        return io.StringIO(), True
    return open(path, "w", newline=""), False


# --------------------------------------------------------------------------
# commands


def cmd_eval(args, doc, out):
    params = zone_from_spec(doc)
    header = ["y0", "P", "dP", "d2P", "bisector_sign", "error"]
    if args.oracle:
        header += ["oracle_P", "oracle_agrees"]
    rows = []
    for y0 in _points(args, doc):
        row = [y0]
        try:
            p = half_map(params, y0)
            row.append(p)
            try:
                row += [derivative1(params, y0), derivative2(params, y0)]
            except HalfMapError:
                row += [None, None]
            try:
                row.append(bisector_position(params, y0))
            except HalfMapError:
                row.append(None)
            row.append("")
        except NonexistentHalfMap:
            raise
        except HalfMapError as e:
            p = None
            row += [None, None, None, None, f"{type(e).__name__}: {e}"]
        if args.oracle:
            if p is None:
                row += [None, None]
            else:
                try:
                    q = oracle_half_map(params, y0)
                    row += [q, abs(q - p) <= args.tol * (1.0 + abs(p))]
                except HalfMapError as e:
                    row += [None, False]
                    row[5] = f"oracle {type(e).__name__}: {e}"
        rows.append(row)
    _emit(rows, header, args.format or "csv", out)
    return EXIT_OK


_ANCHORS = {
    "origin": taylor_origin,
    "shifted": taylor_origin_shifted,
    "puiseux": puiseux_at_hat_y0,
    "infinity": taylor_infinity,
}


def cmd_series(args, doc, out):
    params = zone_from_spec(doc)
    anchor = args.anchor or doc.get("anchor", "origin")
    if anchor not in _ANCHORS:
        raise SpecError(f"anchor must be one of {sorted(_ANCHORS)}, got {anchor!r}")
    order = args.order if args.order is not None else int(doc.get("order", 4 if anchor == "infinity" else 6))
    s = _ANCHORS[anchor](params, order)
    terms = [[_num(e), _num(c)] for e, c in s.terms()]
    if (args.format or "json") == "csv":
        _emit(terms, ["exponent", "coefficient"], "csv", out)
        return EXIT_OK
    payload = {"anchor": s.anchor.value, "center": None if math.isinf(s.center) else s.center,
               "order": s.order, "terms": terms}
    if s.is_exact:
        payload["exact"] = [[_num(e), str(c)] for e, c in s.terms()]
    out.write(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _report_payload(sys_, report, args):
    payload = report.to_dict()
    if args.oracle:
        for o, d in zip(report.orbits, payload["orbits"]):
            err = orbit_closure_error(sys_, o.y0, o.multiplier)
            d["closure_error"] = err
            d["oracle_agrees"] = err <= args.tol
    return payload


def cmd_orbits(args, doc, out):
    sys_ = system_from_spec(doc)
    cfg = SearchConfig(keep_samples=bool(args.samples), use_certificates=not args.numeric)
    code = EXIT_OK
    try:
        report = find_crossing_orbits(sys_, cfg)
        payload = _report_payload(sys_, report, args)
    except SearchBudgetExceeded as e:
        report = e.partial
        payload = _report_payload(sys_, report, args) if report is not None else {}
        payload["partial"] = True
        payload["error"] = str(e)
        code = EXIT_BUDGET
    if args.samples and report is not None:
        with open(args.samples, "w", newline="") as fh:
            rows = report.samples
            if not rows and report.interval is not None:
                rows = _fallback_samples(sys_, report.interval)
            _emit(rows, ["y0", "displacement"], "csv", fh)
    if (args.format or "json") == "csv":
        rows = [[o["y0"], o["y1"], o["multiplier"], o["stability"]] for o in payload.get("orbits", [])]
        _emit(rows, ["y0", "y1", "multiplier", "stability"], "csv", out)
    else:
        out.write(json.dumps(_finite(payload), indent=2) + "\n")
    return code


def _fallback_samples(sys_, interval, n=200):
    lo, hi = interval
    top = hi if math.isfinite(hi) else lo + 100.0 * max(1.0, abs(lo))
    rows = []
    for k in range(1, n + 1):
        y = lo + (top - lo) * k / (n + 1)
        try:
            rows.append((y, displacement(sys_, y)))
        except HalfMapError:
            rows.append((y, None))
    return rows


def cmd_sample(args, doc, out):
    params = zone_from_spec(doc)
    if args.trace is not None:
        s = sample_orbit(params, float(parse_number(args.trace, "trace")), args.steps)
        rows = [[float(t), float(x), float(y)] for t, (x, y) in zip(s.times, s.states)]
        _emit(rows, ["t", "x", "y"], args.format or "csv", out)
        return EXIT_OK
    info = domain_interval(params)
    if not info.exists:
        raise NonexistentHalfMap(f"no left half-map for {params}: {info.reason}")
    rows = []
    for y0 in _points(args, doc):
        try:
            rows.append([y0, half_map(params, y0)])
        except HalfMapError:
            rows.append([y0, None])
    _emit(rows, ["y0", "P"], args.format or "csv", out)
    return EXIT_OK


def cmd_reduce(args, doc, out):
    p = zone_from_spec(doc)
    payload = {"T": _num(p.T), "D": _num(p.D), "a": _num(p.a)}
    if any(isinstance(v, Fraction) and v.denominator != 1 for v in (p.T, p.D, p.a)):
        payload["exact"] = {k: str(v) for k, v in zip("TDa", (p.T, p.D, p.a))}
    payload["domain"] = domain_interval(p).to_dict()
    out.write(json.dumps(_finite(payload), indent=2) + "\n")
    return EXIT_OK


def _finite(obj):
    # JSON has no infinity; unbounded ends become null with kind "unbounded"
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


COMMANDS = {
    "eval": cmd_eval,
    "series": cmd_series,
    "orbits": cmd_orbits,
    "sample": cmd_sample,
    "reduce": cmd_reduce,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="halfmap", description="Poincare half-maps of planar linear systems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("spec", help="JSON spec: a path, '-' for stdin, or literal JSON")
        p.add_argument("--out", help="write the main output here instead of stdout")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--tol", type=float, default=1e-8, help="cross-check tolerance (default 1e-8)")
        return p

    p = common(sub.add_parser("eval", help="P, P', P'' and sign(y0+P) at points"))
    p.add_argument("--y0", nargs="+")
    p.add_argument("--range", help="LO:HI:STEPS")
    p.add_argument("--oracle", action="store_true", help="cross-check against the flow oracle")

    p = common(sub.add_parser("series", help="jet at an anchor as (exponent, coefficient) pairs"))
    p.add_argument("--anchor", choices=sorted(_ANCHORS))
    p.add_argument("--order", type=int)

    p = common(sub.add_parser("orbits", help="crossing periodic orbits of a two-zone system"))
    p.add_argument("--oracle", action="store_true", help="close each orbit with the flow oracle")
    p.add_argument("--samples", help="CSV path for displacement samples")
    p.add_argument("--numeric", action="store_true", help="skip the analytic short-cuts")

    p = common(sub.add_parser("sample", help="plot data (y0, P(y0)) or one orbit trace"))
    p.add_argument("--range", help="LO:HI:STEPS")
    p.add_argument("--y0", nargs="+")
    p.add_argument("--trace", help="emit (t, x, y) of the left passage from this y0")
    p.add_argument("--steps", type=int, default=200)

    common(sub.add_parser("reduce", help="Lienard parameters of a raw 2x2 system"))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out, to_stdout = _open_out(args.out)
    try:
        doc = load_spec(args.spec)
        code = COMMANDS[args.command](args, doc, out)
    except (NonexistentHalfMap, PreconditionViolated) as e:
        print(f"halfmap: {e}", file=sys.stderr)
        return EXIT_NONEXISTENT
    except SearchBudgetExceeded as e:
        print(f"halfmap: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidParams, ValueError) as e:
        print(f"halfmap: invalid spec: {e}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        if not to_stdout:
            out.close()
    if to_stdout:
        sys.stdout.write(out.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
