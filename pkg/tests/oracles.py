"""Reference computations written without the package, used as test oracles.

Everything here uses the standard library, plus numpy for brute-force
quadrature only.
"""
import cmath
import math

import numpy as np


def slab_te_tm_root(n_f, n_s, n_c, d_nm, wavelength_nm, pol="TE", order=0, tol=1e-14):
    """Effective index of an asymmetric three-layer slab by bisection.

    Eigen-equation: k0*d*kappa = m*pi + atan(r_s*g_s/kappa) + atan(r_c*g_c/kappa)
    with r = 1 for TE and (n_f/n)^2 for TM.  Returns None below cutoff.
    """
    k0 = 2 * math.pi / wavelength_nm

    def f(N):
        kap = math.sqrt(n_f**2 - N**2)
        gs = math.sqrt(N**2 - n_s**2)
        gc = math.sqrt(N**2 - n_c**2)
        rs = 1.0 if pol == "TE" else (n_f / n_s) ** 2
        rc = 1.0 if pol == "TE" else (n_f / n_c) ** 2
        return k0 * d_nm * kap - order * math.pi - math.atan(rs * gs / kap) - math.atan(rc * gc / kap)

    lo = max(n_s, n_c) + 1e-15
    hi = n_f - 1e-15
    if f(lo) <= 0:
        return None
    # f decreases monotonically from lo to hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def rouard_reflectance(n_bottom_to_top, d_nm, wavelength_nm, from_top=True):
    """Normal-incidence power reflectance by the Rouard recursion of Fresnel coefficients.

    Indices run (substrate, layers..., superstrate) as in the package.
    """
    n = list(n_bottom_to_top)
    d = list(d_nm)
    if not from_top:
        n, d = n[::-1], d[::-1]
    # walk from the exit medium (n[0]) toward the incident medium (n[-1])
    r = (n[1] - n[0]) / (n[1] + n[0]) if len(n) > 1 else 0
    for j in range(1, len(n) - 1):
        beta = 2 * math.pi * n[j] * d[j - 1] / wavelength_nm
        ph = cmath.exp(2j * beta)
        r_top = (n[j + 1] - n[j]) / (n[j + 1] + n[j])
        r = (r_top + r * ph) / (1 + r_top * r * ph)
    return abs(r) ** 2


def gaussian_overlap_quadrature(centers, widths, z_lo, z_hi, n=2_000_001, d=1.0):
    """|int d E1 E2 E3| / sqrt(prod int E^2) by dense trapezoidal sums."""
    z = np.linspace(z_lo, z_hi, n)
    dz = z[1] - z[0]
    fs = [np.exp(-((z - c) / w) ** 2) for c, w in zip(centers, widths)]

    def integ(y):
        return dz * (y.sum() - 0.5 * (y[0] + y[-1]))

    num = integ(d * fs[0] * fs[1] * fs[2])
    return abs(num) / math.sqrt(math.prod(integ(f * f) for f in fs))


def gaussian_overlap_closed_form(centers, widths, d=1.0):
    """Analytic value of the same overlap on an infinite line."""
    (c1, c2, c3), (w1, w2, w3) = centers, widths
    a = [1 / w**2 for w in (w1, w2, w3)]
    A = sum(a)
    B = 2 * (a[0] * c1 + a[1] * c2 + a[2] * c3)
    C = a[0] * c1**2 + a[1] * c2**2 + a[2] * c3**2
    num = d * math.sqrt(math.pi / A) * math.exp(B**2 / (4 * A) - C)
    norms = [math.sqrt(math.pi / 2) * w for w in (w1, w2, w3)]
    return abs(num) / math.sqrt(math.prod(norms))


def fp_contrast(alpha_cm1, R, L_cm):
    """Fringe contrast of a lossy Fabry-Perot cavity."""
    x = R * math.exp(-alpha_cm1 * L_cm)
    return 2 * x / (1 + x * x)


def werner(snr):
    P = snr / (2 + snr)
    return P, (1 + 3 * P) / 4
