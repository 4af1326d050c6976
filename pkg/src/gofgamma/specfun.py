"""Special functions used by the test statistic and its covariance theory.

All routines work in double precision and keep gamma functions and
Pochhammer symbols in the log domain so that shapes up to a few hundred stay
finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _core


class SeriesError(ArithmeticError):
    """A series failed to meet its tolerance within the term cap.

    Attributes
    ----------
    partial : float
        Partial sum (or log of it for log-domain series) at the cap.
    terms : int
        Number of terms summed.
    """

    def __init__(self, message: str, partial: float, terms: int):
        super().__init__(f"{message} (partial={partial!r}, terms={terms})")
        self.partial = partial
        self.terms = terms


class DomainError(ValueError):
    """Argument outside the supported domain."""


@dataclass(frozen=True)
class SeriesControl:
    """Stopping rule shared by every infinite series.

    A series stops once three consecutive terms are at most
    ``rel_tol * |partial sum|``; it fails after ``max_terms`` terms.
    """

    rel_tol: float = 1e-14
    max_terms: int = 600

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise DomainError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 50:
            raise DomainError(f"max_terms must be an integer >= 50, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


class LogValue(NamedTuple):
    """A real number stored as ``sign * exp(log_abs)``."""

    sign: int
    log_abs: float

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    def __mul__(self, other: "LogValue") -> "LogValue":  # type: ignore[override]
        if self.sign == 0 or other.sign == 0:
            return LogValue(0, -math.inf)
        return LogValue(self.sign * other.sign, self.log_abs + other.log_abs)


def _ctl(ctl: SeriesControl | None) -> SeriesControl:
    return DEFAULT_CONTROL if ctl is None else ctl


def _check_nu(nu: float) -> None:
    if not nu >= -0.5:
        raise DomainError(f"order must satisfy nu >= -1/2, got {nu}")


def log_gamma(x: float) -> float:
    return math.lgamma(x)


def log_poch(a: float, k: int | float) -> float:
    """log (a)_k for a > 0."""
    return math.lgamma(a + k) - math.lgamma(a)


# --------------------------------------------------------------------------
# Bessel-type kernels
# --------------------------------------------------------------------------

def kernel_j(nu: float, z: float, ctl: SeriesControl | None = None) -> float:
    """Normalised Hankel kernel ``sum_j (-z)^j / (j! (nu+1)_j)``.

    Equals ``Gamma(nu+1) z^{-nu/2} J_nu(2 sqrt(z))`` and lies in [-1, 1].

    Parameters
    ----------
    nu : float
        Order, at least -1/2.
    z : float
        The product ``t * x``; must be non-negative.
    """
    _check_nu(nu)
    if not z >= 0.0 or not math.isfinite(z):
        raise DomainError(f"z must be finite and non-negative, got {z}")
    c = _ctl(ctl)
    val, used = _core.kernel_j(float(nu), float(z), c.rel_tol, int(c.max_terms))
    if used < 0:
        raise SeriesError("kernel_j series did not converge", val, -used)
    return val


def bessel_j(nu: float, x: float, ctl: SeriesControl | None = None) -> float:
    """Bessel function of the first kind ``J_nu(x)`` for real ``x >= 0``.

    Small arguments use the power series; larger ones use Miller's backward
    recurrence, both through :func:`kernel_j`.
    """
    _check_nu(nu)
    if not x >= 0.0 or not math.isfinite(x):
        raise DomainError(f"x must be finite and non-negative, got {x}")
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        raise DomainError("J_nu(0) is infinite for negative order")
    k = kernel_j(nu, 0.25 * x * x, ctl)
    return k * math.exp(nu * math.log(0.5 * x) - math.lgamma(nu + 1.0))


def kernel_m(alpha: float, z: float, ctl: SeriesControl | None = None) -> LogValue:
    """``M(z) = sum_j z^j / (j! (alpha)_j)`` in the log domain.

    ``M(z) = Gamma(alpha) z^{(1-alpha)/2} I_{alpha-1}(2 sqrt z)``; every term
    is positive so no cancellation occurs.
    """
    if not alpha >= 0.5:
        raise DomainError(f"alpha must be >= 1/2, got {alpha}")
    if not z >= 0.0 or not math.isfinite(z):
        raise DomainError(f"z must be finite and non-negative, got {z}")
    c = _ctl(ctl)
    lm, used = _core.kernel_m_log(float(alpha), float(z), c.rel_tol, int(c.max_terms))
    if used < 0:
        raise SeriesError("kernel_m series did not converge", lm, -used)
    return LogValue(1, lm)


# --------------------------------------------------------------------------
# Confluent hypergeometric function
# --------------------------------------------------------------------------

def _poch_sign(a: float, j: int) -> int:
    """Sign of (a)_j."""
    if a >= 0.0:
        return 1
    neg = min(j, int(math.ceil(-a)))
    return -1 if neg % 2 else 1


def _log_abs_poch(a: float, j: int) -> float:
    if a > 0.0:
        return math.lgamma(a + j) - math.lgamma(a)
    out = 0.0
    for i in range(j):
        out += math.log(abs(a + i))
    return out


def _hyp1f1_positive(a: float, b: float, x: float, c: SeriesControl) -> LogValue:
    """Defining series for x >= 0, returned in the log domain."""
    if x == 0.0:
        return LogValue(1, 0.0)
    if a == 0.0:
        return LogValue(1, 0.0)
    if a < 0.0 and float(a).is_integer():
        # terminating polynomial
        total = math.fsum(
            math.prod((a + i) * x / ((b + i) * (i + 1.0)) for i in range(j))
            for j in range(int(-a) + 1)
        )
        return LogValue.from_float(total)
    # terms with j < j0 may change sign; afterwards the sign is fixed
    j0 = int(math.ceil(-a)) if a < 0.0 else 0
    head = []
    t = 1.0
    for j in range(j0):
        head.append(t)
        t *= (a + j) * x / ((b + j) * (j + 1.0))
    tail_sign = _poch_sign(a, j0)
    # peak of |t_j| for j >= j0: ratio (a+j) x / ((b+j)(j+1)) crosses one
    jp = j0
    while (a + jp) * x > (b + jp) * (jp + 1.0):
        jp += 1
        if jp - j0 > 10_000_000:
            raise SeriesError("1F1 peak search runaway", float("nan"), jp)
    log_peak = (_log_abs_poch(a, jp) - (math.lgamma(b + jp) - math.lgamma(b))
                + jp * math.log(x) - math.lgamma(jp + 1.0))
    s = 1.0
    used = 1 + j0
    quiet = 0
    t = 1.0
    j = jp
    while True:
        t *= (a + j) * x / ((b + j) * (j + 1.0))
        j += 1
        s += t
        used += 1
        quiet = quiet + 1 if t <= c.rel_tol * s else 0
        if quiet >= 3:
            break
        if used >= c.max_terms:
            raise SeriesError("1F1 series did not converge", log_peak + math.log(s), used)
    t = 1.0
    j = jp
    quiet = 0
    while j > j0:
        t *= (b + j - 1.0) * j / ((a + j - 1.0) * x)
        j -= 1
        s += t
        used += 1
        quiet = quiet + 1 if t <= c.rel_tol * s else 0
        if quiet >= 3:
            break
        if used >= c.max_terms:
            raise SeriesError("1F1 series did not converge", log_peak + math.log(s), used)
    log_tail = log_peak + math.log(s)
    if not head:
        return LogValue(tail_sign, log_tail)
    # combine head (moderate size) with the tail relative to the larger part
    h = math.fsum(head)
    if h == 0.0:
        return LogValue(tail_sign, log_tail)
    lh = math.log(abs(h))
    ref = max(lh, log_tail)
    v = math.copysign(math.exp(lh - ref), h) + tail_sign * math.exp(log_tail - ref)
    if v == 0.0:
        return LogValue(0, -math.inf)
    return LogValue(1 if v > 0 else -1, ref + math.log(abs(v)))


def kummer_1f1_log(a: float, b: float, x: float,
                   ctl: SeriesControl | None = None) -> LogValue:
    """``1F1(a; b; x)`` as a :class:`LogValue`."""
    if b <= 0.0 and float(b).is_integer():
        raise DomainError(f"b must not be a non-positive integer, got {b}")
    if not math.isfinite(x):
        raise DomainError("x must be finite")
    c = _ctl(ctl)
    if x >= 0.0:
        return _hyp1f1_positive(a, b, x, c)
    # Kummer's transformation keeps the series free of alternation
    inner = _hyp1f1_positive(b - a, b, -x, c)
    if inner.sign == 0:
        return inner
    return LogValue(inner.sign, inner.log_abs + x)


def kummer_1f1(a: float, b: float, x: float, ctl: SeriesControl | None = None) -> float:
    """Confluent hypergeometric function ``1F1(a; b; x)``.

    Negative arguments go through Kummer's transformation
    ``1F1(a; b; x) = e^x 1F1(b - a; b; -x)``.
    """
    return kummer_1f1_log(a, b, x, ctl).value


def kummer_1f1_series(a: float, b: float, x: float, max_terms: int = 5000) -> float:
    """Plain forward summation of the defining series with compensation.

    Kept as an independent path for cross-checks; only sensible for
    moderate ``|x|``.
    """
    terms = [1.0]
    t = 1.0
    for j in range(max_terms):
        t *= (a + j) * x / ((b + j) * (j + 1.0))
        terms.append(t)
        if t == 0.0 or (j > abs(x) and abs(t) < 1e-18 * abs(math.fsum(terms))):
            break
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Laguerre polynomials
# --------------------------------------------------------------------------

def laguerre_norm(n: int, alpha: float, x):
    """Orthonormal Laguerre polynomial ``(n!/(alpha)_n)^{1/2} L_n^{(alpha-1)}(x)``.

    Evaluated through the orthonormal three-term recurrence, which avoids the
    large normalising factors; accepts scalars or arrays.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    if not alpha > 0.0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    x = np.asarray(x, dtype=float)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    # orthonormal p_k w.r.t. Gamma(alpha, 1): x p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}
    for k in range(int(n)):
        a_k = 2.0 * k + alpha
        b_k = math.sqrt(k * (k + alpha - 1.0))
        b_k1 = math.sqrt((k + 1.0) * (k + alpha))
        p_prev, p = p, ((x - a_k) * p - b_k * p_prev) / b_k1
    # L_n has leading coefficient (-1)^n / n!, p_n a positive one
    out = p if n % 2 == 0 else -p
    return float(out) if out.ndim == 0 else out


def laguerre_laplace(n: int, alpha: float, v: float, power: str = "alpha-1") -> float:
    """Closed form of ``int_0^inf x^p e^{-v x} L_n^{(alpha-1)}(x) dx``.

    Parameters
    ----------
    power : {"alpha-1", "alpha"}
        Exponent ``p`` of the monomial factor.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    if not v > 0.0:
        raise DomainError(f"v must be positive, got {v}")
    lead = math.exp(math.lgamma(alpha + n) - math.lgamma(n + 1.0))
    if power == "alpha-1":
        return lead * (v - 1.0) ** n * v ** (-(alpha + n))
    if power == "alpha":
        # (v-1)^{n-1} (alpha (v-1) - n), expanded so n = 0 needs no 0^{-1}
        poly = alpha * (v - 1.0) ** n - (n * (v - 1.0) ** (n - 1) if n > 0 else 0.0)
        return lead * poly * v ** (-(alpha + n + 1.0))
    raise DomainError(f"power must be 'alpha-1' or 'alpha', got {power!r}")


# --------------------------------------------------------------------------
# digamma and Hurwitz zeta
# --------------------------------------------------------------------------

# B_{2k} / (2k) for the digamma asymptotic series
_DIGAMMA_C = (1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
              1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0)
# B_{2k} / (2k)! for Euler-Maclaurin
_EM_C = (1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0,
         1.0 / 47900160.0, -691.0 / 1307674368000.0, 1.0 / 74724249600.0,
         -3617.0 / 10670622842880000.0)


def digamma(x: float) -> float:
    """Digamma function for ``x > 0``."""
    if not x > 0.0 or not math.isfinite(x):
        raise DomainError(f"digamma needs finite x > 0, got {x}")
    shift = 0.0
    while x < 8.0:
        shift -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _DIGAMMA_C:
        series += c * p
        p *= inv2
    return shift + math.log(x) - 0.5 / x - series


def hurwitz_zeta(s: float, z: float) -> float:
    """Hurwitz zeta ``sum_k (z + k)^{-s}`` for ``s > 1``, ``z > 0``."""
    if not s > 1.0:
        raise DomainError(f"hurwitz_zeta needs s > 1, got {s}")
    if not z > 0.0:
        raise DomainError(f"hurwitz_zeta needs z > 0, got {z}")
    n_direct = max(0, int(math.ceil(max(12.0, s + 8.0) - z)))
    head = math.fsum((z + k) ** (-s) for k in range(n_direct))
    w = z + n_direct
    tail = w ** (1.0 - s) / (s - 1.0) + 0.5 * w ** (-s)
    poch = s  # (s)_{2j-1}
    wp = w ** (-s - 1.0)
    corr = 0.0
    for j, c in enumerate(_EM_C, start=1):
        corr += c * poch * wp
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        wp /= w * w
    return head + tail + corr


def trigamma(x: float) -> float:
    return hurwitz_zeta(2.0, x)
