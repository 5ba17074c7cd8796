#!/usr/bin/env python3
"""Writes tests/oracles/frozen_values.hpp from mpmath evaluations.

Kernels are computed without any series: for R = chi2_n + a^2 chi2_m the
Laplace transform L(t) = (1+2t)^(-n/2) (1+2a^2 t)^(-m/2) gives
    E[R^al]   = al/Gamma(1-al) * int_0^inf (1 - L(t)) t^(-al-1) dt,   0 < al < 1
    E[R^(1+b)] = b/Gamma(1-b) * int_0^inf (E R + L'(t)) t^(-b-1) dt,   0 < b < 1
and the log moments come from a direct two-dimensional integral over the
chi-square densities. Run from the repository root:
    python3 tests/oracles/freeze_values.py
"""

import itertools
import sys
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40


def log_laplace(t, n, m, a2):
    return -mp.mpf(n) / 2 * mp.log1p(2 * t) - mp.mpf(m) / 2 * mp.log1p(2 * a2 * t)


def log_quad(g):
    """int_0^inf g(t) dt as int g(e^u) e^u du; both ends then decay exponentially."""
    val, err = mp.quad(lambda u: g(mp.exp(u)) * mp.exp(u), [-mp.inf, -20, -5, 0, 5, 20, mp.inf], error=True)
    if err > mp.mpf(10) ** -22 * abs(val):
        raise RuntimeError(f"quadrature error {err} for value {val}")
    return val


def moment(n, m, a, al):
    """E[(chi2_n + a^2 chi2_m)^al] for al in (0, 2), al != 1."""
    a2 = mp.mpf(a) ** 2
    if n + m == 0:
        return mp.mpf(0)
    if m == 0 or a2 == 0:
        if n == 0:
            return mp.mpf(0)
        return 2**al * mp.gamma(mp.mpf(n) / 2 + al) / mp.gamma(mp.mpf(n) / 2)
    if al < 1:
        # 1 - L(t) via expm1 so the small-t end keeps its digits
        f = lambda t: -mp.expm1(log_laplace(t, n, m, a2)) * t ** (-al - 1)
        return al / mp.gamma(1 - al) * log_quad(f)
    b = al - 1

    def f(t):
        # E R + L'(t) = (E R - g(t)) + g(t) (1 - L(t)), g(t) = -L'(t)/L(t)
        g = n / (1 + 2 * t) + m * a2 / (1 + 2 * a2 * t)
        head = n * 2 * t / (1 + 2 * t) + m * a2 * 2 * a2 * t / (1 + 2 * a2 * t)
        return (head - g * mp.expm1(log_laplace(t, n, m, a2))) * t ** (-b - 1)

    return b / mp.gamma(1 - b) * log_quad(f)


def prelu_kernel(a, s, d, q=1):
    al = mp.mpf(s) / 2
    q = mp.mpf(q)
    total = mp.mpf(0)
    if q == 1:
        for n in range(d + 1):
            total += mp.binomial(d, n) / mp.mpf(2) ** d * moment(n, d - n, a, al)
        return total
    for n in range(d + 1):
        for m in range(d + 1 - n):
            p = mp.factorial(d) / (mp.factorial(n) * mp.factorial(m) * mp.factorial(d - n - m))
            p *= (q / 2) ** (n + m) * (1 - q) ** (d - n - m)
            total += p * moment(n, m, a, al)
    return total / q**s


def randomized_kernel(lo, hi, s, d):
    al = mp.mpf(s) / 2
    total = mp.mpf(0)
    for n in range(d + 1):
        avg = mp.quad(lambda a: moment(n, d - n, a, al), [lo, hi]) / (hi - lo)
        total += mp.binomial(d, n) / mp.mpf(2) ** d * avg
    return total


def chi2_pdf(x, k):
    k = mp.mpf(k)
    return x ** (k / 2 - 1) * mp.exp(-x / 2) / (2 ** (k / 2) * mp.gamma(k / 2))


def log_moments(n, m, a):
    """(E ln R, Var ln R) for R = chi2_n + a^2 chi2_m by 2-d quadrature."""
    a2 = mp.mpf(a) ** 2
    if m == 0:
        h = mp.mpf(n) / 2
        return mp.log(2) + mp.digamma(h), mp.psi(1, h)
    if n == 0:
        h = mp.mpf(m) / 2
        return mp.log(a2) + mp.log(2) + mp.digamma(h), mp.psi(1, h)
    # substitute x = u^2, y = v^2 to remove the endpoint singularities
    def integrand(p):
        def f(u, v):
            x, y = u * u, v * v
            return (mp.log(x + a2 * y) ** p) * chi2_pdf(x, n) * chi2_pdf(y, m) * 4 * u * v
        return mp.quad(f, [0, 1, 3, mp.inf], [0, 1, 3, mp.inf])

    mp.mp.dps = 20
    e1 = integrand(1)
    e2 = integrand(2)
    mp.mp.dps = 40
    return e1, e2 - e1**2


def fmt(x):
    return mp.nstr(x, 20)


def main():
    out = []
    out.append("#pragma once")
    out.append("")
    out.append("// Generated by tests/oracles/freeze_values.py (mpmath, 40 digits). Do not edit.")
    out.append("")
    out.append("namespace frozen {")
    out.append("")

    out.append("struct SpecfnValue { double x, lgamma, digamma, trigamma; };")
    out.append("inline constexpr SpecfnValue kSpecfn[] = {")
    for x in ["0.001", "0.5", "1", "1.5", "2", "2.5", "7", "32.5", "1000.25", "123456.5"]:
        X = mp.mpf(x)
        out.append(f"    {{{x}, {fmt(mp.loggamma(X))}, {fmt(mp.digamma(X))}, {fmt(mp.psi(1, X))}}},")
    out.append("};")
    out.append("")

    out.append("struct GammaRatio { double x, h, log_ratio; };")
    out.append("inline constexpr GammaRatio kGammaRatio[] = {")
    for x, h in [("0.5", "0.25"), ("8", "0.5"), ("1000", "0.75"), ("1e6", "0.5"), ("3.5", "2.5")]:
        out.append(f"    {{{x}, {h}, {fmt(mp.loggamma(mp.mpf(x) + mp.mpf(h)) - mp.loggamma(mp.mpf(x)))}}},")
    out.append("};")
    out.append("")

    print("kernels (q = 1)", file=sys.stderr)
    out.append("struct KernelValue { double a, s; long d; double q, I; };")
    out.append("inline constexpr KernelValue kPreluKernel[] = {")
    for a, s, d in itertools.product(["0", "0.01", "0.2", "0.5", "0.9"], ["0.5", "1", "1.5", "3"], [1, 2, 4, 8, 16]):
        I = prelu_kernel(mp.mpf(a), mp.mpf(s), d)
        out.append(f"    {{{a}, {s}, {d}, 1.0, {fmt(I)}}},")
    out.append("};")
    out.append("")

    print("kernels (dropout)", file=sys.stderr)
    out.append("inline constexpr KernelValue kDropoutKernel[] = {")
    for a, s, d, q in itertools.product(["0", "0.2", "1"], ["1", "1.5"], [2, 4, 8], ["0.5", "0.8"]):
        I = prelu_kernel(mp.mpf(a), mp.mpf(s), d, mp.mpf(q))
        out.append(f"    {{{a}, {s}, {d}, {q}, {fmt(I)}}},")
    out.append("};")
    out.append("")

    print("kernels (randomized)", file=sys.stderr)
    mp.mp.dps = 20
    out.append("struct RandomizedValue { double lo, hi, s; long d; double I; };")
    out.append("inline constexpr RandomizedValue kRandomizedKernel[] = {")
    for lo, hi, s, d in [("0.125", "0.3333333333333333", "1", 2), ("0.125", "0.3333333333333333", "1.5", 4),
                         ("0.1", "0.5", "0.5", 3)]:
        I = randomized_kernel(mp.mpf(lo), mp.mpf(hi), mp.mpf(s), d)
        out.append(f"    {{{lo}, {hi}, {s}, {d}, {fmt(I)}}},")
    out.append("};")
    out.append("")
    mp.mp.dps = 40

    print("log moments", file=sys.stderr)
    out.append("struct LogMomentValue { long n, m; double a, mean, var; };")
    out.append("inline constexpr LogMomentValue kLogMoments[] = {")
    cases = [(1, 1, "0.2"), (3, 5, "0.01"), (4, 4, "0.5"), (2, 2, "0.9"), (5, 11, "0.2"), (1, 3, "0.5")]
    for n, m, a in cases:
        e, v = log_moments(n, m, mp.mpf(a))
        out.append(f"    {{{n}, {m}, {a}, {fmt(e)}, {fmt(v)}}},")
    out.append("};")
    out.append("")

    # unconditional drift/spread of ln(||x_{k+1}||/||x_k||) at sigma = 1, d = 2
    print("prelu log stats", file=sys.stderr)
    out.append("struct LogStatsValue { long d; double a, mu, s2; };")
    out.append("inline constexpr LogStatsValue kPreluLogStats[] = {")
    for d, a in [(2, "0.2"), (3, "0.5")]:
        ms, vs, ws = [], [], []
        for n in range(d + 1):
            e, v = log_moments(n, d - n, mp.mpf(a))
            ms.append(e)
            vs.append(v)
            ws.append(mp.binomial(d, n) / mp.mpf(2) ** d)
        mean = sum(w * e for w, e in zip(ws, ms))
        var = sum(w * (v + (e - mean) ** 2) for w, e, v in zip(ws, ms, vs))
        out.append(f"    {{{d}, {a}, {fmt(mean / 2)}, {fmt(var / 4)}}},")
    out.append("};")
    out.append("")
    out.append("}  // namespace frozen")
    out.append("")

    path = Path(__file__).with_name("frozen_values.hpp")
    path.write_text("\n".join(out))
    print(f"wrote {path}", file=sys.stderr)


if __name__ == "__main__":
    main()
