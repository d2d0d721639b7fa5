#!/usr/bin/env python3
"""Regenerate the frozen reference values used in the Rust test suites.

Everything here is computed with mpmath at elevated precision, independently
of the Rust implementations. Run and paste updated constants where needed:

    python3 tools/oracles.py
"""

import mpmath as mp

mp.mp.dps = 30


def dd(x):
    """Split a high-precision value into a (hi, lo) double-double pair."""
    hi = float(x)
    lo = float(x - mp.mpf(hi))
    return hi, lo


def section(title):
    print()
    print(f"# {title}")


section("Airy values at 0 as double-double (hi, lo)")
for name, v in [
    ("AI0", mp.airyai(0)),
    ("AIP0", mp.airyai(0, 1)),
    ("BI0", mp.airybi(0)),
    ("BIP0", mp.airybi(0, 1)),
]:
    hi, lo = dd(v)
    print(f"{name}: ({hi!r}, {lo!r})")

# 1/Gamma(2/3), 1/Gamma(1/3) cross-check (Ai(0) = 3^{-2/3}/Gamma(2/3))
print("3^(-2/3)/Gamma(2/3) =", mp.nstr(mp.power(3, mp.mpf(-2) / 3) / mp.gamma(mp.mpf(2) / 3), 25))

section("Airy spot values (x, Ai, Ai', Bi, Bi')")
xs = [-9999.5, -5000.25, -100.0, -12.0, -7.25, -5.0, -2.33810741045976703849,
      -1.0, -0.5, 0.0, 0.5, 1.0, 2.5, 5.5, 8.0, 9.0, 10.5, 12.5, 20.0]
for x in xs:
    row = [mp.airyai(x), mp.airyai(x, 1), mp.airybi(x), mp.airybi(x, 1)]
    print(f"({x!r}, {float(row[0])!r}, {float(row[1])!r}, {float(row[2])!r}, {float(row[3])!r}),")

section("Bi at large x (log form): x, log(Bi), log(Bi')")
for x in [110.0, 400.0, 1000.0, 10000.0]:
    print(f"({x!r}, {float(mp.log(mp.airybi(x)))!r}, {float(mp.log(mp.airybi(x, 1)))!r}),")

section("First Airy-Ai zeros a_k (Ai(-a_k) = 0)")
for k in range(1, 8):
    print(f"a_{k} = {float(-mp.airyaizero(k))!r}")

section("Hermite / weight spot values")
# monic pi_n for weight e^{-2 N x^2}: pi_n(z) = (4N)^{-n/2} He_n(z sqrt(4N))
def pi_monic(n, N, z):
    x = z * mp.sqrt(4 * N)
    # probabilists' He_n via recurrence
    a, b = mp.mpf(1), x
    if n == 0:
        return mp.mpf(1)
    for k in range(2, n + 1):
        a, b = b, x * b - (k - 1) * a
    return b / mp.power(4 * N, mp.mpf(n) / 2)

for (n, N, z) in [(8, 10, mp.mpf("0.9")), (12, 25, mp.mpf("-0.35")), (5, 4, mp.mpf("1.1"))]:
    print(f"pi_{n}(z={float(z)}, N={N}) = {float(pi_monic(n, N, z))!r}")

# log w_n(z) = -[ (1/4)log(2pi) + N z^2 - n log 2 - (1/12) log(N z^2)
#               + (1/2)(lgamma(n+1) - n log N) ]
def log_w(n, N, z):
    return -(mp.log(2 * mp.pi) / 4 + N * z * z - n * mp.log(2)
             - mp.log(N * z * z) / 12 + (mp.loggamma(n + 1) - n * mp.log(N)) / 2)

for (n, N, z) in [(6, 10, mp.mpf("0.7")), (300, 200, mp.mpf("1.0")), (4000, 4000, mp.mpf("1.0"))]:
    print(f"log w_{n}(z={float(z)}, N={N}) = {float(log_w(n, N, z))!r}")

section("Gamma quantiles (shape k, rate r): median etc.")
def gamma_quantile(shape, rate, p):
    # invert regularized lower incomplete gamma
    f = lambda x: mp.gammainc(shape, 0, rate * x, regularized=True) - p
    return mp.findroot(f, shape / rate)

for (shape, rate, p) in [(3.0, 0.5, 0.5), (10.0, 0.5, 0.5), (0.5, 0.5, 0.5), (10.0, 0.5, 0.9)]:
    print(f"Q_gamma(shape={shape}, rate={rate}; p={p}) = {float(gamma_quantile(mp.mpf(shape), mp.mpf(rate), mp.mpf(p)))!r}")

section("X covariance / mean correction (beta-free m, g-tilde)")
# gt(s)   = int_0^s exp((8/3)(u^{3/2} - s^{3/2})) du
# m(t)    = int_0^t exp(-(4/3)(t^{3/2} - s^{3/2})) gt(s) ds   (beta-free; M = (4/beta) m ... )
# NOTE: with this normalization M_beta(t) = (4/beta) * m(t).
def gt(s):
    if s == 0:
        return mp.mpf(0)
    return mp.quad(lambda u: mp.exp(mp.mpf(8) / 3 * (u ** mp.mpf(1.5) - s ** mp.mpf(1.5))), [0, s])

def m_of_t(t):
    if t == 0:
        return mp.mpf(0)
    return mp.quad(lambda s: mp.exp(-mp.mpf(4) / 3 * (t ** mp.mpf(1.5) - s ** mp.mpf(1.5))) * gt(s), [0, t])

for s in [mp.mpf("0.5"), mp.mpf(1), mp.mpf(4), mp.mpf(10)]:
    print(f"gt({float(s)}) = {float(gt(s))!r}")
for t in [mp.mpf("0.5"), mp.mpf(1), mp.mpf(4), mp.mpf(10)]:
    print(f"m({float(t)}) = {float(m_of_t(t))!r}   (M at beta=2: {float(2 * m_of_t(t))!r})")

# covariance of X at beta-free normalization: cov(t,s) = 4/beta * e^{-(4/3)(t^{3/2}-s^{3/2})} gt(s), t >= s
for (t, s) in [(4, 1), (2, 2)]:
    c = mp.exp(-mp.mpf(4) / 3 * (mp.mpf(t) ** mp.mpf(1.5) - mp.mpf(s) ** mp.mpf(1.5))) * gt(mp.mpf(s))
    print(f"cov_unit({t},{s}) = {float(c)!r}   (beta=2: {float(2 * c)!r})")

section("c* = lim_T [ 2 int_0^T m(t) dt - log(T)/4 ]")
mp.mp.dps = 20
def F(T):
    v = mp.quad(m_of_t, [0, 1, 4, T])
    return 2 * v - mp.log(T) / 4

Fs = {}
for T in [12, 24, 48]:
    Fs[T] = F(mp.mpf(T))
    print(f"F({T}) = {mp.nstr(Fs[T], 12)}")
# tail of 2m - 1/(4t) is O(t^-2), so F(T) = c* - a/T + O(T^-2); Richardson:
r1 = 2 * Fs[24] - Fs[12]
r2 = 2 * Fs[48] - Fs[24]
print("Richardson(12,24) =", mp.nstr(r1, 12))
print("Richardson(24,48) =", mp.nstr(r2, 12))
print("c* ~=", mp.nstr(r2, 10))
