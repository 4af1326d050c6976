"""Scalar series kernels written in the numba-compatible subset of Python.

Each routine returns a status alongside its value instead of raising, so the
same source compiles under ``numba.njit`` and runs unchanged as plain Python.
A negative term count signals non-convergence; the value is then the partial
sum reached when the cap was hit.
"""
import math

import numpy as np

from ._accel import jit, prange

# consecutive small terms required before a series is declared converged
_QUIET_RUN = 3
_BIG = 1e200
_TINY = 1e-200


@jit
def kernel_m_log(alpha, z, rel_tol, max_terms):
    """log M(z) for M(z) = sum_j z^j / (j! (alpha)_j).

    The sum is started at the largest term and walked in both directions, so
    the partial sums stay of order one for any ``z`` and the work grows like
    ``z**0.25`` rather than ``z**0.5``.
    """
    if z <= 0.0:
        return 0.0, 1
    # first index where the term ratio z / ((j+1)(alpha+j)) drops below one
    disc = (alpha + 1.0) ** 2 - 4.0 * (alpha - z)
    jp = 0
    if disc > 0.0:
        root = 0.5 * (-(alpha + 1.0) + math.sqrt(disc))
        if root > 0.0:
            jp = int(math.ceil(root))
    if jp == 0:
        log_peak = 0.0
    else:
        log_peak = (jp * math.log(z) - math.lgamma(jp + 1.0)
                    - math.lgamma(alpha + jp) + math.lgamma(alpha))
    s = 1.0
    used = 1
    # upward
    t = 1.0
    j = jp
    quiet = 0
    while True:
        t *= z / ((j + 1.0) * (alpha + j))
        j += 1
        s += t
        used += 1
        if t <= rel_tol * s:
            quiet += 1
            if quiet >= _QUIET_RUN:
                break
        else:
            quiet = 0
        if used >= max_terms:
            return log_peak + math.log(s), -used
    # downward
    t = 1.0
    j = jp
    quiet = 0
    while j > 0:
        t *= j * (alpha + j - 1.0) / z
        j -= 1
        s += t
        used += 1
        if t <= rel_tol * s:
            quiet += 1
            if quiet >= _QUIET_RUN:
                break
        else:
            quiet = 0
        if used >= max_terms:
            return log_peak + math.log(s), -used
    return log_peak + math.log(s), used


@jit
def kernel_j_series(nu, z, rel_tol, max_terms):
    """sum_j (-1)^j z^j / (j! (nu+1)_j) with Neumaier compensation."""
    s = 1.0
    comp = 0.0
    t = 1.0
    quiet = 0
    j = 0
    while True:
        t *= -z / ((j + 1.0) * (nu + 1.0 + j))
        j += 1
        acc = s + t
        if abs(s) >= abs(t):
            comp += (s - acc) + t
        else:
            comp += (t - acc) + s
        s = acc
        if abs(t) <= rel_tol * abs(s + comp):
            quiet += 1
            if quiet >= _QUIET_RUN:
                return s + comp, j + 1
        else:
            quiet = 0
        if j + 1 >= max_terms:
            return s + comp, -(j + 1)


@jit
def kernel_j_miller(nu, z):
    """Same kernel by Miller's backward recurrence on J_{nu+k}(2 sqrt z).

    With x = 2 sqrt(z) the normalisation
    (x/2)^nu / Gamma(nu+1) = sum_k c_k J_{nu+2k}(x),
    c_0 = 1, c_k = (nu+2k) (nu+1)_{k-1} / k!,
    turns the ratio f_nu / sum_k c_k f_{nu+2k} of any backward solution f
    directly into Gamma(nu+1) (x/2)^{-nu} J_nu(x); no powers or gamma
    functions of large arguments are formed.
    """
    x = 2.0 * math.sqrt(z)
    top = int(x + 10.0 * x ** (1.0 / 3.0) + 40.0)
    if top % 2 == 1:
        top += 1
    kt = top // 2
    # c_k relative to c_kt, accumulated downward as ratios
    log_ck = (math.log(nu + 2.0 * kt) + math.lgamma(nu + kt)
              - math.lgamma(nu + 1.0) - math.lgamma(kt + 1.0))
    ck = 1.0
    f_next = 0.0
    f = _TINY
    s = 0.0
    i = top
    while True:
        if i % 2 == 0:
            k = i // 2
            s += ck * f
            if k >= 2:
                ck *= ((nu + 2.0 * k - 2.0) / (nu + 2.0 * k)) * (k / (nu + k - 1.0))
            elif k == 1:
                # c_0 / c_1 = 1 / (nu + 2)
                ck /= (nu + 2.0)
        if i == 0:
            break
        mu = nu + i
        f_prev = (2.0 * mu / x) * f - f_next
        f_next = f
        f = f_prev
        i -= 1
        if abs(f) > _BIG:
            f *= _TINY
            f_next *= _TINY
            s *= _TINY
    return f / s * math.exp(-log_ck)


@jit
def kernel_j(nu, z, rel_tol, max_terms):
    """Gamma(nu+1) z^{-nu/2} J_nu(2 sqrt z), the normalised Hankel kernel."""
    if z <= 0.0:
        return 1.0, 1
    # the alternating series is benign while its terms cannot grow much
    if z <= max(4.0, nu + 1.0):
        return kernel_j_series(nu, z, rel_tol, max_terms)
    return kernel_j_miller(nu, z), 0


@jit
def vkernel_h(x, y, alpha, c1, c3, rel_tol, max_terms):
    """V-statistic kernel h(x, y); c1, c3 are the precomputed constants."""
    lm, used = kernel_m_log(alpha, x * y, rel_tol, max_terms)
    a1 = alpha / (alpha + 1.0)
    return (math.exp(lm - x - y)
            - c1 * (math.exp(-a1 * x) + math.exp(-a1 * y)) + c3), used


@jit
def vstat(y, alpha, rel_tol, max_terms):
    """(1/n) sum_i sum_j h(y_i, y_j) using symmetry and Neumaier summation.

    Returns (value, ok) where ok is 0 if some kernel series failed.
    """
    n = y.shape[0]
    c1 = (alpha / (alpha + 1.0)) ** alpha
    c3 = (alpha / (alpha + 2.0)) ** alpha
    s = 0.0
    comp = 0.0
    ok = 1
    for i in range(n):
        for j in range(i, n):
            h, used = vkernel_h(y[i], y[j], alpha, c1, c3, rel_tol, max_terms)
            if used < 0:
                ok = 0
            if j != i:
                h *= 2.0
            acc = s + h
            if abs(s) >= abs(h):
                comp += (s - acc) + h
            else:
                comp += (h - acc) + s
            s = acc
    return (s + comp) / n, ok


@jit(parallel=True)
def vstat_batch(ys, alpha, rel_tol, max_terms):
    """Row-wise ``vstat`` over a (reps, n) array of rescaled samples."""
    reps = ys.shape[0]
    out = np.empty(reps)
    flags = np.empty(reps)
    for r in prange(reps):
        v, ok = vstat(ys[r], alpha, rel_tol, max_terms)
        out[r] = v
        flags[r] = ok
    return out, flags


@jit
def kernel_j_many(nu, zs, rel_tol, max_terms):
    n = zs.shape[0]
    out = np.empty(n)
    bad = 0
    for i in range(n):
        v, used = kernel_j(nu, zs[i], rel_tol, max_terms)
        out[i] = v
        if used < 0:
            bad += 1
    return out, bad


@jit
def kernel_m_log_many(alpha, zs, rel_tol, max_terms):
    n = zs.shape[0]
    out = np.empty(n)
    bad = 0
    for i in range(n):
        v, used = kernel_m_log(alpha, zs[i], rel_tol, max_terms)
        out[i] = v
        if used < 0:
            bad += 1
    return out, bad
