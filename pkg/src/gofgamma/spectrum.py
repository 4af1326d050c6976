"""Spectra of the covariance operators S0 and S of the limiting process.

S0 has the explicit eigenpairs ``rho_k = alpha^alpha b^{4k+2alpha}`` and
``L_k(s) = beta^{alpha/2} e^{(1-beta)s/2} Lag_k(beta s)``.  S is S0 minus a
rank-two term, so its eigenvalues are the roots of the secular function

    G(delta) = alpha^3 A(delta) B(delta) - D(delta)^2,

with simple poles at the rho_k.  Writing ``u_k = beta^alpha (alpha)_k/k! rho_k``
(a negative binomial law in k) and ``x_k = b^2 - k beta``, the constant parts of
A, B and D vanish identically (sum u_k = 1, sum u_k x_k = 0,
alpha sum u_k x_k^2 = 1), leaving

    A = -delta T_0,  B = -alpha delta T_2,  D = alpha^2 delta T_1,
    T_j = sum_k u_k x_k^j / (rho_k - delta).

This form carries no cancellation against the O(1) constants, so roots far
below double-precision epsilon (relative to rho_0) remain resolvable.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

from .specfun import DEFAULT_CONTROL, DomainError, LogValue, SeriesControl, laguerre_norm

GRID_POINTS = 64
POLE_GUARD = 1e-8
ROOT_RTOL = 1e-13
MERGE_RTOL = 1e-12


class PoleProximityError(ArithmeticError):
    """delta lies within the exclusion zone of a pole rho_k."""


class RootSearchError(RuntimeError):
    """A requested bracket holds no sign change of G."""


class InterlacingWarning(UserWarning):
    """A computed eigenvalue falls outside its interlacing bracket."""


@dataclass(frozen=True)
class SpectralParams:
    """Constants attached to a shape alpha.

    ``b_alpha**2 = (beta - 1)/(beta + 1)``, algebraically equal to
    ``1 + alpha (1 - beta)/2`` but free of cancellation for large alpha.
    """

    alpha: float
    beta: float
    b_alpha: float
    r: float

    @property
    def b2(self) -> float:
        return self.b_alpha**2

    @property
    def log_r(self) -> float:
        return 4.0 * math.log(self.b_alpha)

    @property
    def log_rho0(self) -> float:
        # alpha b^2 = 4 / (beta + 1)^2
        return 2.0 * self.alpha * math.log(2.0 / (self.beta + 1.0))


def spectral_params(alpha: float) -> SpectralParams:
    if not alpha >= 0.5:
        raise DomainError(f"alpha must be >= 1/2, got {alpha}")
    alpha = float(alpha)
    beta = math.sqrt((alpha + 4.0) / alpha)
    b2 = (beta - 1.0) / (beta + 1.0)
    return SpectralParams(alpha, beta, math.sqrt(b2), b2 * b2)


def log_rho(k, p: SpectralParams):
    """log rho_k; broadcasts over integer arrays."""
    return p.log_rho0 + np.asarray(k, dtype=float) * p.log_r


def rho(k: int, p: SpectralParams) -> LogValue:
    """Eigenvalue rho_k of S0 as a LogValue."""
    if k < 0:
        raise DomainError("k must be non-negative")
    return LogValue(1, float(log_rho(k, p)))


def _log_c(k, alpha: float):
    """log((alpha)_k / k!)."""
    k = np.asarray(k, dtype=float)
    return gammaln(alpha + k) - gammaln(alpha) - gammaln(k + 1.0)


def _log_u(k, p: SpectralParams):
    """log u_k = log((1-r)^alpha (alpha)_k r^k / k!)."""
    k = np.asarray(k, dtype=float)
    return p.alpha * math.log1p(-p.r) + _log_c(k, p.alpha) + k * p.log_r


def eigenfunction_s0(k: int, p: SpectralParams, s):
    """Eigenfunction of S0 belonging to rho_k, orthonormal in L2(P0)."""
    s = np.asarray(s, dtype=float)
    out = (p.beta ** (p.alpha / 2.0) * np.exp((1.0 - p.beta) * s / 2.0)
           * laguerre_norm(k, p.alpha, p.beta * s))
    return float(out) if np.ndim(out) == 0 else out


def trace_s0(p: SpectralParams) -> float:
    """Tr S0 = alpha^alpha b^{2 alpha} / (1 - b^4)."""
    return math.exp(p.log_rho0) / (1.0 - p.r)


def trace_s(p: SpectralParams) -> float:
    """Tr S = Tr S0 - (alpha/(alpha+2))^alpha (1 + (alpha+1)/(alpha+2)^2)."""
    a = p.alpha
    corr = math.exp(a * math.log(a / (a + 2.0))) * (1.0 + (a + 1.0) / (a + 2.0) ** 2)
    return trace_s0(p) - corr


def scree_m(alpha: float, eps: float) -> int:
    """Smallest m with m >= log(eps) / (4 log b_alpha) - 2, floored at 1."""
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    p = spectral_params(alpha)
    bound = math.log(eps) / p.log_r - 2.0
    return max(1, math.ceil(bound))


# --------------------------------------------------------------------------
# secular function
# --------------------------------------------------------------------------

class GComponents(NamedTuple):
    A: float
    B: float
    D: float
    G: float


def _index_span(p: SpectralParams, log_delta: float) -> int:
    """Number of terms so the tail beyond the delta-pole is negligible."""
    k_pole = max(0.0, (log_delta - p.log_rho0) / p.log_r)
    tail = 45.0 + (p.alpha + 2.0) * math.log(k_pole + p.alpha + 50.0)
    return int(k_pole + tail / (-p.log_r)) + 12


def _v_terms(delta: float, p: SpectralParams, ctl: SeriesControl, guard: bool = True):
    """k, v_k = u_k / (rho_k - delta), evaluated in log form."""
    ld = math.log(delta)
    n = _index_span(p, ld)
    if n > 200_000:
        raise DomainError(f"delta={delta!r} is too small to resolve")
    k = np.arange(n, dtype=float)
    lr = log_rho(k, p)
    if guard:
        near = np.abs(np.expm1(ld - lr)) < POLE_GUARD
        if near.any():
            kk = int(np.argmax(near))
            raise PoleProximityError(
                f"delta={delta!r} lies within {POLE_GUARD:g} (relative) of rho_{kk}")
    lu = _log_u(k, p)
    above = lr > ld
    # rho > delta: u/rho / (1 - delta/rho); rho < delta: -u/delta / (1 - rho/delta)
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        v = np.where(
            above,
            np.exp(lu - lr) / -np.expm1(np.minimum(ld - lr, 0.0)),
            -np.exp(lu - ld) / -np.expm1(np.minimum(lr - ld, 0.0)),
        )
    tail = abs(v[-1]) * (n + 1.0) ** 2
    if tail > ctl.rel_tol * np.max(np.abs(v)):
        raise DomainError("secular series truncated too early")
    return k, v


def _moment_gap(k: np.ndarray, v: np.ndarray) -> float:
    """(sum v)(sum v (k-c)^2) - (sum v (k-c))^2 with c near the mass centre."""
    w = np.abs(v)
    c = float(np.dot(w, k) / w.sum())
    d = k - c
    return float(v.sum() * np.dot(v, d * d) - np.dot(v, d) ** 2)


def g_sign_function(delta: float, p: SpectralParams,
                    ctl: SeriesControl | None = None) -> float:
    """Positive multiple of G(delta): G / (alpha^4 beta^2 delta^2)."""
    k, v = _v_terms(delta, p, ctl or DEFAULT_CONTROL)
    return _moment_gap(k, v)


def g_components(delta: float, p: SpectralParams,
                 ctl: SeriesControl | None = None) -> GComponents:
    """A, B, D and G = alpha^3 A B - D^2 at delta > 0 (not at a pole)."""
    if not delta > 0.0:
        raise DomainError(f"delta must be positive, got {delta}")
    ctl = ctl or DEFAULT_CONTROL
    k, v = _v_terms(delta, p, ctl)
    x = p.b2 - k * p.beta
    a = p.alpha
    t0 = float(v.sum())
    t1 = float(np.dot(v, x))
    t2 = float(np.dot(v, x * x))
    A = -delta * t0
    B = -a * delta * t2
    D = a * a * delta * t1
    G = a**4 * delta**2 * p.beta**2 * _moment_gap(k, v)
    return GComponents(A, B, D, G)


# --------------------------------------------------------------------------
# root search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenSolution:
    """Leading eigenvalues of S with the pole intervals they were found in."""

    alpha: float
    deltas: tuple
    brackets: tuple
    residuals: tuple
    interlacing_violations: tuple = field(default=())
    merged: int = 0

    @property
    def m(self) -> int:
        return len(self.deltas)

    def __post_init__(self):
        d = self.deltas
        if any(d[i] <= d[i + 1] for i in range(len(d) - 1)):
            raise ValueError("eigenvalues must be strictly descending")
        for val, (lo, hi) in zip(d, self.brackets):
            if not lo <= val <= hi:
                raise ValueError(f"eigenvalue {val!r} outside bracket ({lo!r}, {hi!r})")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "m": self.m,
            "deltas": list(self.deltas),
            "brackets": [list(b) for b in self.brackets],
            "residuals": list(self.residuals),
            "interlacing_violations": list(self.interlacing_violations),
            "merged": self.merged,
        }


def _bisect_log(f, lo: float, hi: float, f_lo: float) -> float:
    a, b = math.log(lo), math.log(hi)
    fa = f_lo
    while b - a > ROOT_RTOL:
        mid = 0.5 * (a + b)
        fm = f(math.exp(mid))
        if fm == 0.0:
            return math.exp(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return math.exp(0.5 * (a + b))


def _roots_in(f, lo: float, hi: float) -> list[float]:
    """All sign changes of f on a log grid over (lo, hi), refined by bisection."""
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), GRID_POINTS))
    vals = [f(float(g)) for g in grid]
    roots = []
    for i in range(GRID_POINTS - 1):
        if vals[i] == 0.0:
            roots.append(float(grid[i]))
        elif (vals[i] > 0) != (vals[i + 1] > 0) and vals[i + 1] != 0.0:
            roots.append(_bisect_log(f, float(grid[i]), float(grid[i + 1]), vals[i]))
    return roots


def pole_intervals(p: SpectralParams, count: int):
    """Yield (low, high, k) for (rho_0, rho_0/r) then (rho_{k+1}, rho_k)."""
    r0 = math.exp(p.log_rho0)
    g = 1.0 + POLE_GUARD * 1.01
    yield r0 * g, r0 / p.r, -1
    for k in range(count):
        hi = math.exp(float(log_rho(k, p)))
        lo = math.exp(float(log_rho(k + 1, p)))
        yield lo * g, hi / g, k


def solve_eigenvalues(p: SpectralParams, m: int, ctl: SeriesControl | None = None,
                      max_intervals: int | None = None) -> EigenSolution:
    """The m largest eigenvalues of S as roots of G.

    Each open interval between consecutive poles is scanned on a log grid,
    starting with (rho_0, rho_0/r); sign changes are bisected to 1e-13
    relative width.  Several roots in one interval are all kept.

    Raises
    ------
    RootSearchError
        If the scan exhausts ``max_intervals`` without finding m roots.
    """
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m}")
    ctl = ctl or DEFAULT_CONTROL
    limit = max_intervals if max_intervals is not None else m + 40

    def f(d: float) -> float:
        return g_sign_function(d, p, ctl)

    found: list[tuple[float, tuple[float, float]]] = []
    empty = []
    for lo, hi, k in pole_intervals(p, limit):
        if hi <= lo or lo <= 0.0:
            break
        try:
            roots = _roots_in(f, lo, hi)
        except DomainError:
            break
        if not roots and k >= 0:
            empty.append(k)
        edges = (math.exp(float(log_rho(k + 1, p))), math.exp(float(log_rho(k, p)))) \
            if k >= 0 else (math.exp(p.log_rho0), math.exp(p.log_rho0) / p.r)
        found.extend((r, edges) for r in roots)
        if len(found) >= m:
            break
    if len(found) < m:
        raise RootSearchError(
            f"found {len(found)} of {m} roots; intervals without a sign change: {empty}")
    found.sort(key=lambda t: -t[0])
    merged: list[tuple[float, tuple[float, float]]] = []
    n_merged = 0
    for r, br in found:
        if merged and abs(merged[-1][0] - r) <= MERGE_RTOL * r:
            n_merged += 1
            continue
        merged.append((r, br))
    merged = merged[:m]
    deltas = tuple(r for r, _ in merged)
    brackets = tuple(br for _, br in merged)
    residuals = tuple(abs(g_components(d, p, ctl).G) for d in deltas)
    violations = []
    for i, d in enumerate(deltas, start=1):
        hi = math.exp(float(log_rho(i - 1, p)))
        lo = math.exp(float(log_rho(i + 1, p)))
        if not lo <= d <= hi:
            violations.append(i)
    if violations:
        warnings.warn(f"interlacing fails for k in {violations}", InterlacingWarning)
    return EigenSolution(p.alpha, deltas, brackets, residuals, tuple(violations), n_merged)


def eigenvalues_to_trace(p: SpectralParams, rel: float = 1e-9,
                         ctl: SeriesControl | None = None) -> EigenSolution:
    """All eigenvalues down to the index where rho_{M+1} < rel * Tr S."""
    tr = trace_s(p)
    m_needed = 1
    while math.exp(float(log_rho(m_needed + 1, p))) >= rel * tr:
        m_needed += 1
    return solve_eigenvalues(p, m_needed, ctl)


# --------------------------------------------------------------------------
# conjecture probe and eigenfunctions of S
# --------------------------------------------------------------------------

def conjecture_gap(p: SpectralParams, l: int, ctl: SeriesControl | None = None) -> float:
    """LHS - RHS of the identity that would make rho_l an eigenvalue of S.

    LHS = alpha beta^{alpha+2} sum_{k != l} (alpha)_k/k! rho_k^2 (l-k)^2 / (rho_k - rho_l)
    RHS = 1 + alpha (b^2 - l beta)^2
    """
    if int(l) != l or l < 0:
        raise DomainError("l must be a non-negative integer")
    ctl = ctl or DEFAULT_CONTROL
    n = _index_span(p, float(log_rho(l, p)))
    k = np.arange(n, dtype=float)
    k = k[k != l]
    lu = _log_u(k, p)
    d = float(log_rho(l, p)) - log_rho(k, p)  # log(rho_l / rho_k)
    # u_k rho_k / (rho_k - rho_l) = u_k / (1 - rho_l/rho_k)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        terms = np.where(d < 0, np.exp(lu) / -np.expm1(np.minimum(d, 0.0)),
                         -np.exp(lu - d) / -np.expm1(np.minimum(-d, 0.0)))
    terms = terms * (l - k) ** 2
    if abs(terms[-1]) > ctl.rel_tol * np.max(np.abs(terms)):
        raise DomainError("conjecture series truncated too early")
    lhs = p.alpha * p.beta**2 * math.fsum(terms)
    rhs = 1.0 + p.alpha * (p.b2 - l * p.beta) ** 2
    return lhs - rhs


def fourier_e(p: SpectralParams, n_terms: int):
    """Coefficients of e^{-s/alpha} and alpha^{-3/2} s e^{-s/alpha} on L_k."""
    k = np.arange(n_terms, dtype=float)
    ek = np.exp(0.5 * _log_c(k, p.alpha) + 0.5 * p.alpha * math.log(p.beta) + log_rho(k, p))
    fk = math.sqrt(p.alpha) * ek * (p.b2 - k * p.beta)
    return ek, fk


def eigenfunction_s(delta: float, p: SpectralParams, s, n_terms: int = 100):
    """Normalised eigenfunction of S for the eigenvalue ``delta``.

    The Fourier-Laguerre coefficients are ``(c_e e_k + c_f f_k)/(rho_k - delta)``
    where (c_e, c_f) spans the null space of the 2x2 consistency system.
    Returns (values at s, coefficient vector).
    """
    ek, fk = fourier_e(p, n_terms)
    rk = np.exp(log_rho(np.arange(n_terms), p))
    inv = 1.0 / (rk - delta)
    m = np.array([[1.0 - np.sum(ek * ek * inv), -np.sum(ek * fk * inv)],
                  [-np.sum(ek * fk * inv), 1.0 - np.sum(fk * fk * inv)]])
    row = m[0] if np.abs(m[0]).sum() >= np.abs(m[1]).sum() else m[1]
    if np.abs(row).sum() == 0.0:
        ce, cf = 1.0, 0.0
    else:
        ce, cf = row[1], -row[0]
    coef = (ce * ek + cf * fk) * inv
    coef = coef / math.sqrt(np.dot(coef, coef))
    s = np.asarray(s, dtype=float)
    vals = sum(coef[j] * eigenfunction_s0(j, p, s) for j in range(n_terms))
    return vals, coef
