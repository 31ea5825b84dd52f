"""Compiled inner loops: uniform->normal transform and CRRA grid means.

Everything here is deterministic given its inputs. Kernels are compiled
with ``cache=True`` so repeated CLI invocations skip the JIT cost, and
``nogil=True`` so worker threads can overlap them.
"""

from __future__ import annotations

import numpy as np
from numba import float64, njit, uint64

_U53 = 2.0 ** -53


@njit(float64(float64), cache=True, fastmath=True, inline="always")
def _inv_norm_cdf(p):
    # Wichura's AS241 PPND16 rational approximation, accurate to ~1e-15
    # for p in (0, 1). Central branch covers |p - 0.5| <= 0.425.
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r
                    + 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r
                  + 1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r
                + 1.3314166789178437745e2) * r + 3.3871328727963666080e0)
        den = (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r
                    + 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r
                  + 5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r
                + 4.2313330701600911252e1) * r + 1.0)
        return q * num / den
    if q < 0.0:
        r = p
    else:
        r = 1.0 - p
    r = np.sqrt(-np.log(r))
    if r <= 5.0:
        r = r - 1.6
        num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
                    + 2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r
                  + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r
                + 4.63033784615654529590e0) * r + 1.42343711074968357734e0)
        den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
                    + 1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r
                  + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r
                + 2.05319162663775882187e0) * r + 1.0)
    else:
        r = r - 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r
                  + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r
                + 5.46378491116411436990e0) * r + 6.65790464350110377720e0)
        den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
                    + 1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r
                  + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r
                + 5.99832206555887937690e-1) * r + 1.0)
    val = num / den
    if q < 0.0:
        return -val
    return val


@njit(float64[:](uint64[:]), cache=True, fastmath=True, nogil=True)
def normals_from_raw(raw):
    """Map 64-bit words to standard normals: u = (w >> 11 + 0.5) * 2^-53, z = Phi^-1(u)."""
    n = raw.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        u = (np.float64(raw[i] >> np.uint64(11)) + 0.5) * _U53
        out[i] = _inv_norm_cdf(u)
    return out


@njit(float64[:](uint64[:]), cache=True, fastmath=True, nogil=True)
def uniforms_from_raw(raw):
    """Map 64-bit words to uniforms on [0, 1): u = (w >> 11) * 2^-53."""
    n = raw.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = np.float64(raw[i] >> np.uint64(11)) * _U53
    return out


# ---------------------------------------------------------------------------
# CRRA grid means: for each grid point g, mean over draws of
# f((1 - x_g)(1 + rf) + x_g * gross_i) where f depends on gamma.
# `safes[g]` is the precomputed (1 - x_g)(1 + rf) leg, `riskys[g]` is x_g.
# ---------------------------------------------------------------------------

@njit(float64[:](float64[:], float64[:], float64[:]), cache=True, fastmath=True, nogil=True)
def grid_mean_recip(gross, safes, riskys):
    # gamma = 2: f(t) = t^-1
    ng = safes.shape[0]
    n = gross.shape[0]
    out = np.empty(ng, dtype=np.float64)
    for g in range(ng):
        a = safes[g]
        b = riskys[g]
        s = 0.0
        for i in range(n):
            s += 1.0 / (a + b * gross[i])
        out[g] = s / n
    return out


@njit(float64[:](float64[:], float64[:], float64[:]), cache=True, fastmath=True, nogil=True)
def grid_mean_recip_sq(gross, safes, riskys):
    # gamma = 3: f(t) = t^-2
    ng = safes.shape[0]
    n = gross.shape[0]
    out = np.empty(ng, dtype=np.float64)
    for g in range(ng):
        a = safes[g]
        b = riskys[g]
        s = 0.0
        for i in range(n):
            t = a + b * gross[i]
            s += 1.0 / (t * t)
        out[g] = s / n
    return out


@njit(float64[:](float64[:], float64[:], float64[:]), cache=True, fastmath=True, nogil=True)
def grid_mean_rsqrt(gross, safes, riskys):
    # gamma = 1.5: f(t) = t^-1/2
    ng = safes.shape[0]
    n = gross.shape[0]
    out = np.empty(ng, dtype=np.float64)
    for g in range(ng):
        a = safes[g]
        b = riskys[g]
        s = 0.0
        for i in range(n):
            s += 1.0 / np.sqrt(a + b * gross[i])
        out[g] = s / n
    return out


@njit(float64[:](float64[:], float64[:], float64[:]), cache=True, fastmath=True, nogil=True)
def grid_mean_log(gross, safes, riskys):
    # gamma = 1 (log utility): f(t) = ln t, computed as logs of 64-draw
    # products. Safe for t in [1e-4, 1e11] per draw, far beyond the clamped
    # gross-return range.
    ng = safes.shape[0]
    n = gross.shape[0]
    out = np.empty(ng, dtype=np.float64)
    chunk = 64
    for g in range(ng):
        a = safes[g]
        b = riskys[g]
        s = 0.0
        i = 0
        while i + chunk <= n:
            p = 1.0
            for j in range(i, i + chunk):
                p *= a + b * gross[j]
            s += np.log(p)
            i += chunk
        p = 1.0
        for j in range(i, n):
            p *= a + b * gross[j]
        s += np.log(p)
        out[g] = s / n
    return out


@njit(float64[:](float64[:], float64[:], float64[:], float64), cache=True, fastmath=True, nogil=True)
def grid_mean_pow(gross, safes, riskys, exponent):
    # generic gamma: f(t) = t^(1 - gamma)
    ng = safes.shape[0]
    n = gross.shape[0]
    out = np.empty(ng, dtype=np.float64)
    for g in range(ng):
        a = safes[g]
        b = riskys[g]
        s = 0.0
        for i in range(n):
            s += (a + b * gross[i]) ** exponent
        out[g] = s / n
    return out
