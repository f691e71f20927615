"""Compiled vs pure-Python kernels.

Runs the same workloads in two child processes, one with HALFMAP_NUMBA=1 and
one with HALFMAP_NUMBA=0 (the flag is read at import), then prints timings
and checks that both produced the same numbers.

    python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 3]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _workloads(n):
    from halfmap import LienardParams, c_constant, domain_interval
    from halfmap import kernels
    from halfmap.flow import GRAZE_TOL, _budgets

    T, D, a = 0.7, 1.3, 0.4
    p = LienardParams(T, D, a)
    cT = c_constant(p).c * T
    lower = domain_interval(p).image_lower
    y0s = np.logspace(-2, 3, n)

    def integral():
        return [kernels.integral_diff(T, D, a, -y, y) for y in y0s]

    def solve_scalar():
        return [kernels.solve_y1(T, D, a, cT, y, lower.value, False, 1e-15, 200)[0] for y in y0s]

    def solve_batch():
        return list(kernels.solve_y1_batch(T, D, a, cT, y0s, lower.value, False, 1e-15, 200)[0])

    def flow():
        return [kernels.flow_state(T, D, a, 0.0, y, 1.7)[1] for y in y0s]

    def first_return():
        out = []
        for y in y0s[:: max(1, n // 200)]:
            tb, dt, arc = _budgets(p, y)
            out.append(kernels.zone_return(T, D, a, y, -1.0, 1.0, tb, dt, arc, GRAZE_TOL)[1])
        return out

    return {
        "integral_diff": integral,
        "solve_y1": solve_scalar,
        "solve_y1_batch": solve_batch,
        "flow_state": flow,
        "zone_return": first_return,
    }


def child(n, repeat):
    from halfmap._accel import NUMBA_ENABLED

    out = {"numba": NUMBA_ENABLED, "times": {}, "values": {}}
    for name, fn in _workloads(n).items():
        values = fn()    # warm-up, includes compilation or cache load
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["times"][name] = best
        out["values"][name] = [float(v) for v in values]
    json.dump(out, sys.stdout)


def run(flag, n, repeat):
    env = dict(os.environ, HALFMAP_NUMBA=flag)
    res = subprocess.run([sys.executable, __file__, "--child", "--n", str(n), "--repeat", str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        child(args.n, args.repeat)
        return 0

    fast = run("1", args.n, args.repeat)
    slow = run("0", args.n, args.repeat)
    if not fast["numba"]:
        print("numba is not importable: both runs are pure Python")
    print(f"{'kernel':<16}{'numba [ms]':>12}{'python [ms]':>13}{'speedup':>10}{'max rel diff':>15}")
    worst = 0.0
    for name in fast["times"]:
        tf, ts = fast["times"][name], slow["times"][name]
        a = np.asarray(fast["values"][name])
        b = np.asarray(slow["values"][name])
        diff = float(np.max(np.abs(a - b) / np.maximum(1e-300, np.abs(b))))
        worst = max(worst, diff)
        print(f"{name:<16}{1e3 * tf:>12.3f}{1e3 * ts:>13.3f}{ts / tf:>10.1f}{diff:>15.2e}")
    return 0 if worst <= 1e-10 else 1


if __name__ == "__main__":
    sys.exit(main())
