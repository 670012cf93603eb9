#!/usr/bin/env python3
"""Arbitrary-precision reference values frozen into the C++ tests.

Run with `python3 reference_values.py`; requires mpmath. Every printed value
is copied verbatim into the matching test file.
"""
import mpmath as mp

mp.mp.dps = 50

n_s, n_e, kappa = mp.mpf("0.001"), mp.mpf(20), mp.mpf("0.01")


def idler(n_s, n_e, k):
    den = k * n_s + (1 - k) * n_e + 1
    mu = mp.sqrt(k * n_s * (n_s + 1)) / den
    e_k = (1 - k) * (1 + n_e) * n_s / den
    sigma2 = den / 2
    xi = k * n_s * (n_s + 1) / (2 * den)
    return mu, e_k, sigma2, xi


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


mu, e_k, sigma2, xi = idler(n_s, n_e, kappa)
show("mu", mu)
show("e_kappa", e_k)
show("sigma2", sigma2)
show("xi", xi)

show("lambert_wm1(-0.001/e)", mp.lambertw(-mp.mpf("0.001") / mp.e, -1))

dof = 2 * 10**6
y = mp.mpf(dof - 2)
show("chi2_log_pdf(dof=2e6, y=dof-2)",
     (dof / mp.mpf(2) - 1) * mp.log(y) - y / 2 - (dof / mp.mpf(2)) * mp.log(2) - mp.loggamma(dof / mp.mpf(2)))


def gamma_n(n, yv):
    p = n_s**n / (1 + n_s) ** (n + 1)
    d2 = xi * yv
    z = d2 / (e_k * (1 + e_k))
    q = e_k**n / (1 + e_k) ** (n + 1) * mp.exp(-d2 / e_k) * mp.hyp1f1(n + 1, 1, z)
    return p - q


m = 10**7
for n in range(4):
    show(f"gamma_{n}(2M, M=1e7)", gamma_n(n, 2 * m))

beta = -mp.log(1 - kappa / (n_e * (1 - kappa) + 1))
show("ng_beta", beta)
show("ng_p(M=1e6)", mp.exp(-beta * 10**6 * n_s) / 4)

eps = -mp.lambertw(-n_s / mp.e, -1).real
show("epsilon(n_s=0.001)", eps)
show("r_asy", (1 - mp.log(mp.e * eps) / eps) * 2 * xi)


def marcum_q(a, b):
    f = lambda x: x * mp.exp(-(x * x + a * a) / 2) * mp.besseli(0, a * x)
    return mp.quad(f, [b, b + 10, mp.inf])


show("marcum_q(2,3)", marcum_q(mp.mpf(2), mp.mpf(3)))
show("marcum_q(5,1)", marcum_q(mp.mpf(5), mp.mpf(1)))
