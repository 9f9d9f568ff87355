"""Independent closed-form recursion for the scalar linear problem.

V = H = R, A = alpha, B = b, j = 0, load f(t) = sum_k c_k t^k.  Uses exact
polynomial antiderivatives and plain floats; shares no code with the package.

Usage: python scalar_recursion.py alpha b u0 w0 T N c0 [c1 ...] > out.csv
"""

import sys


def integral(c, a, b):
    return sum(ck * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, ck in enumerate(c))


def recursion(alpha, b, u0, w0, T, N, c):
    tau = T / N
    t = [n * tau for n in range(N + 1)]
    t[-1] = T
    u, w = [u0], [w0]
    for n in range(1, N + 1):
        last = integral(c, t[n - 1], t[n])
        if n == 1:
            f = last / tau
            wn = (tau * f + w0 - tau * b * u0) / (1 + tau * alpha + tau ** 2 * b)
            un = tau * wn + u0
        else:
            f = 1.5 / tau * last - 0.5 / tau * integral(c, t[n - 2], t[n - 1])
            rhs = tau * f + 2 * w[-1] - 0.5 * w[-2] - tau * b * (4 / 3 * u[-1] - 1 / 3 * u[-2])
            wn = rhs / (1.5 + tau * alpha + 2 / 3 * tau ** 2 * b)
            un = 2 / 3 * (tau * wn + 2 * u[-1] - 0.5 * u[-2])
        u.append(un)
        w.append(wn)
    return t, u, w


def main(argv):
    alpha, b, u0, w0, T = map(float, argv[:5])
    N = int(argv[5])
    c = [float(x) for x in argv[6:]]
    t, u, w = recursion(alpha, b, u0, w0, T, N, c)
    print("t,u0,w0")
    for row in zip(t, u, w):
        print(",".join(repr(x) for x in row))


def apriori_scalar(u, w, tau):
    """a1..a7 for a scalar trajectory with unit Grams and j = 0."""
    N = len(w) - 1
    return {
        "a1": tau * sum(x * x for x in w),
        "a2": max(abs(x) for x in w),
        "a3": 0.0,
        "a4": tau * ((w[1] - w[0]) / tau) ** 2,
        "a5": tau * sum(((1.5 * w[n] - 2 * w[n - 1] + 0.5 * w[n - 2]) / tau) ** 2 for n in range(2, N + 1)),
        "a6": sum((w[n] - 2 * w[n - 1] + w[n - 2]) ** 2 for n in range(2, N + 1)),
        "a7": max(abs(x) for x in u),
    }


if __name__ == "__main__":
    main(sys.argv[1:])
