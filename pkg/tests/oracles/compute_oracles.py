"""Regenerates the frozen reference values in ``frozen.py``.

Independent of the package: quadrature and root-finding in mpmath at 30
digits for the integral relation, and mpmath's Taylor ODE solver for the flow.
Run by hand; the tests only import the frozen numbers.
"""
import mpmath as mp

mp.mp.dps = 30


def W(T, D, a, y):
    return D * y * y - a * T * y + a * a


def c_times_T(T, D, a):
    if a > 0:
        return mp.mpf(0)
    c = mp.pi / (D * mp.sqrt(4 * D - T * T))
    return (c if a == 0 else 2 * c) * T


def integral(T, D, a, y1, y0):
    f = lambda y: -y / W(T, D, a, y)
    return mp.quad(f, [y1, 0, y0])


def hat_y1(T, D, a):
    target = c_times_T(T, D, a)
    return mp.findroot(lambda y1: mp.quad(lambda y: -y / W(T, D, a, y), [y1, 0]) - target, (-30, -1), solver="anderson")


def hat_y0(T, D, a):
    target = c_times_T(T, D, a)
    return mp.findroot(lambda y0: mp.quad(lambda y: -y / W(T, D, a, y), [0, y0]) - target, (1, 30), solver="anderson")


def half_map_quad(T, D, a, y0, lo, hi):
    target = c_times_T(T, D, a)
    return mp.findroot(lambda y1: integral(T, D, a, y1, y0) - target, (lo, hi), solver="anderson")


def flow_return(T, D, a, y0, t_guess):
    # x' = T x - y, y' = D x - a from (0, y0); return time is the zero of x(t) near t_guess
    sol = mp.odefun(lambda t, u: [T * u[0] - u[1], D * u[0] - a], 0, [mp.mpf(0), mp.mpf(y0)])
    tau = mp.findroot(lambda t: sol(t)[0], t_guess)
    return tau, sol(tau)[1]


if __name__ == "__main__":
    print("HAT_Y1_T1_D1_AM1 =", mp.nstr(hat_y1(1, 1, -1), 20))
    print("HAT_Y0_TM1_D1_AM1 =", mp.nstr(hat_y0(-1, 1, -1), 20))
    print("P_T1_D1_A1_AT_1 =", mp.nstr(half_map_quad(1, 1, 1, 1, -3, -1.5), 20))
    tau, y = flow_return(1, 1, 1, 1, 2.0)
    print("FLOW_T1_D1_A1_AT_1 =", mp.nstr(y, 20), "tau", mp.nstr(tau, 20))
    print("P_T05_DM1_A1_AT_03 =", mp.nstr(half_map_quad(0.5, -1, 1, 0.3, -0.5, -0.2), 20))
    print("INT_T1_D1_A1 =", mp.nstr(mp.quad(lambda y: -y / (y * y - y + 1), [-1, 1]), 20))
    print("INT_T2_D0_AM1 =", mp.nstr(mp.quad(lambda y: -y / (2 * y + 1), [-0.25, 0]), 20))
    tau, y = flow_return(mp.mpf(2), 2, 0, 1, 3.0)
    print("FLOW_T2_D2_A0 tau =", mp.nstr(tau, 20), "exit", mp.nstr(y, 20))
