"""Array kernels behind the statistic, quadrature and simulation code.

Two interchangeable implementations exist: compiled loops over the scalar
cores in :mod:`gofgamma._core`, and vectorised numpy versions defined here.
``GOFGAMMA_NUMBA=0`` selects the numpy versions at import time.
"""
from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from . import _core
from ._accel import USE_NUMBA
from .specfun import DEFAULT_CONTROL, SeriesControl, SeriesError

# elements per vectorised block in the numpy batch statistic
_BLOCK = 1 << 21


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def kernel_m_log_np(alpha: float, z: np.ndarray, rel_tol: float, max_terms: int):
    """Vectorised peak-started log-domain sum of M(z); returns (values, bad)."""
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.zeros_like(flat)
    pos = flat > 0.0
    zp = flat[pos]
    if zp.size == 0:
        return out.reshape(z.shape), 0
    disc = (alpha + 1.0) ** 2 - 4.0 * (alpha - zp)
    root = 0.5 * (-(alpha + 1.0) + np.sqrt(np.maximum(disc, 0.0)))
    jp = np.where(root > 0.0, np.ceil(root), 0.0)
    log_peak = np.where(
        jp > 0,
        jp * np.log(zp) - gammaln(jp + 1.0) - gammaln(alpha + jp) + gammaln(alpha),
        0.0,
    )
    s = np.ones_like(zp)
    used = np.ones_like(zp)
    # upward
    t = np.ones_like(zp)
    j = jp.copy()
    quiet = np.zeros_like(zp)
    live = np.ones(zp.shape, dtype=bool)
    while live.any():
        t = np.where(live, t * zp / ((j + 1.0) * (alpha + j)), t)
        j = np.where(live, j + 1.0, j)
        s = np.where(live, s + t, s)
        used = used + live
        small = t <= rel_tol * s
        quiet = np.where(live, np.where(small, quiet + 1, 0), quiet)
        live &= (quiet < 3) & (used < max_terms)
    # downward
    t = np.ones_like(zp)
    j = jp.copy()
    quiet = np.zeros_like(zp)
    live = (j > 0) & (used < max_terms)
    while live.any():
        t = np.where(live, t * j * (alpha + j - 1.0) / zp, t)
        j = np.where(live, j - 1.0, j)
        s = np.where(live, s + t, s)
        used = used + live
        small = t <= rel_tol * s
        quiet = np.where(live, np.where(small, quiet + 1, 0), quiet)
        live &= (quiet < 3) & (j > 0) & (used < max_terms)
    out[pos] = log_peak + np.log(s)
    bad = int(np.count_nonzero(used >= max_terms))
    return out.reshape(z.shape), bad


def _kernel_j_series_np(nu, z, rel_tol, max_terms):
    s = np.ones_like(z)
    comp = np.zeros_like(z)
    t = np.ones_like(z)
    quiet = np.zeros_like(z)
    live = np.ones(z.shape, dtype=bool)
    j = 0
    while live.any() and j + 1 < max_terms:
        t = np.where(live, -t * z / ((j + 1.0) * (nu + 1.0 + j)), t)
        j += 1
        acc = s + t
        comp = np.where(live, comp + np.where(np.abs(s) >= np.abs(t),
                                              (s - acc) + t, (t - acc) + s), comp)
        s = np.where(live, acc, s)
        small = np.abs(t) <= rel_tol * np.abs(s + comp)
        quiet = np.where(live, np.where(small, quiet + 1, 0), quiet)
        live &= quiet < 3
    return s + comp, int(np.count_nonzero(live))


def _kernel_j_miller_np(nu, z):
    x = 2.0 * np.sqrt(z)
    top = int(np.max(x + 10.0 * x ** (1.0 / 3.0) + 40.0))
    top += top % 2
    kt = top // 2
    log_ck = (np.log(nu + 2.0 * kt) + gammaln(nu + kt) - gammaln(nu + 1.0)
              - gammaln(kt + 1.0))
    ck = 1.0
    f_next = np.zeros_like(x)
    f = np.full_like(x, 1e-200)
    s = np.zeros_like(x)
    for i in range(top, -1, -1):
        if i % 2 == 0:
            k = i // 2
            s += ck * f
            if k >= 2:
                ck *= ((nu + 2.0 * k - 2.0) / (nu + 2.0 * k)) * (k / (nu + k - 1.0))
            elif k == 1:
                ck /= nu + 2.0
        if i == 0:
            break
        f_prev = (2.0 * (nu + i) / x) * f - f_next
        f_next = f
        f = f_prev
        big = np.abs(f) > 1e200
        if big.any():
            f = np.where(big, f * 1e-200, f)
            f_next = np.where(big, f_next * 1e-200, f_next)
            s = np.where(big, s * 1e-200, s)
    return f / s * np.exp(-log_ck)


def kernel_j_np(nu: float, z: np.ndarray, rel_tol: float, max_terms: int):
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    out = np.ones_like(flat)
    bad = 0
    series = (flat > 0.0) & (flat <= max(4.0, nu + 1.0))
    if series.any():
        out[series], bad = _kernel_j_series_np(nu, flat[series], rel_tol, max_terms)
    rec = flat > max(4.0, nu + 1.0)
    if rec.any():
        out[rec] = _kernel_j_miller_np(nu, flat[rec])
    return out.reshape(z.shape), bad


def vstat_batch_np(ys: np.ndarray, alpha: float, rel_tol: float, max_terms: int):
    """Row-wise V-statistic for a (reps, n) array; returns (values, ok flags)."""
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    reps, n = ys.shape
    c1 = (alpha / (alpha + 1.0)) ** alpha
    c3 = (alpha / (alpha + 2.0)) ** alpha
    a1 = alpha / (alpha + 1.0)
    out = np.empty(reps)
    ok = np.ones(reps)
    step = max(1, _BLOCK // max(1, n * n))
    for lo in range(0, reps, step):
        y = ys[lo:lo + step]
        z = y[:, :, None] * y[:, None, :]
        lm, bad = kernel_m_log_np(alpha, z, rel_tol, max_terms)
        e = np.exp(-a1 * y)
        h = (np.exp(lm - y[:, :, None] - y[:, None, :])
             - c1 * (e[:, :, None] + e[:, None, :]) + c3)
        out[lo:lo + step] = h.reshape(h.shape[0], -1).sum(axis=1) / n
        if bad:
            ok[lo:lo + step] = 0.0
    return out, ok


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

def _raise_if(bad: int, what: str) -> None:
    if bad:
        raise SeriesError(f"{what}: {bad} series did not converge", float("nan"), bad)


def kernel_j_array(nu: float, z, ctl: SeriesControl | None = None) -> np.ndarray:
    """Hankel kernel over an array of products ``z = t x``."""
    c = ctl or DEFAULT_CONTROL
    z = np.asarray(z, dtype=float)
    if USE_NUMBA:
        vals, bad = _core.kernel_j_many(float(nu), np.ascontiguousarray(z.ravel()),
                                        c.rel_tol, int(c.max_terms))
        vals = vals.reshape(z.shape)
    else:
        vals, bad = kernel_j_np(float(nu), z, c.rel_tol, int(c.max_terms))
    _raise_if(bad, "kernel_j")
    return vals


def kernel_m_log_array(alpha: float, z, ctl: SeriesControl | None = None) -> np.ndarray:
    """``log M(z)`` over an array."""
    c = ctl or DEFAULT_CONTROL
    z = np.asarray(z, dtype=float)
    if USE_NUMBA:
        vals, bad = _core.kernel_m_log_many(float(alpha), np.ascontiguousarray(z.ravel()),
                                            c.rel_tol, int(c.max_terms))
        vals = vals.reshape(z.shape)
    else:
        vals, bad = kernel_m_log_np(float(alpha), z, c.rel_tol, int(c.max_terms))
    _raise_if(bad, "kernel_m")
    return vals


def vstat(y, alpha: float, ctl: SeriesControl | None = None) -> float:
    """V-statistic ``(1/n) sum_ij h(y_i, y_j)`` of one rescaled sample."""
    c = ctl or DEFAULT_CONTROL
    y = np.ascontiguousarray(y, dtype=float)
    if USE_NUMBA:
        val, ok = _core.vstat(y, float(alpha), c.rel_tol, int(c.max_terms))
    else:
        vals, oks = vstat_batch_np(y[None, :], float(alpha), c.rel_tol, int(c.max_terms))
        val, ok = float(vals[0]), oks[0]
    if not ok:
        raise SeriesError("kernel series in V-statistic did not converge", val, 0)
    return float(val)


def vstat_many(ys, alpha: float, ctl: SeriesControl | None = None) -> np.ndarray:
    """V-statistic for every row of a (reps, n) array."""
    c = ctl or DEFAULT_CONTROL
    ys = np.ascontiguousarray(np.atleast_2d(ys), dtype=float)
    if USE_NUMBA:
        vals, oks = _core.vstat_batch(ys, float(alpha), c.rel_tol, int(c.max_terms))
    else:
        vals, oks = vstat_batch_np(ys, float(alpha), c.rel_tol, int(c.max_terms))
    if not np.all(oks):
        raise SeriesError("kernel series in V-statistic did not converge",
                          float("nan"), int(np.count_nonzero(oks == 0)))
    return vals
