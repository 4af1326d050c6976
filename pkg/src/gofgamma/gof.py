"""The Hankel-transform statistic T^2_n and the covariance kernels of its limit."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .hankel import QuadratureRule, default_rule, empirical_hankel
from .specfun import DomainError, SeriesControl


@dataclass(frozen=True, eq=False)
class Sample:
    """Non-negative observations X_1, ..., X_n."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 1:
            raise DomainError("a sample needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise DomainError("observations must be finite")
        if np.any(v < 0):
            raise DomainError("observations must be non-negative")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / self.n


@dataclass(frozen=True, eq=False)
class RescaledSample:
    """Y_j = X_j / mean(X), or all zeros for an all-zero sample."""

    y: np.ndarray

    @property
    def n(self) -> int:
        return int(self.y.size)


def _as_sample(s) -> Sample:
    return s if isinstance(s, Sample) else Sample(np.asarray(s, dtype=float))


def rescale(s) -> RescaledSample:
    s = _as_sample(s)
    m = s.mean
    if m == 0.0:
        return RescaledSample(np.zeros(s.n))
    return RescaledSample(s.values / m)


def vkernel_h(x: float, y: float, alpha: float, ctl: SeriesControl | None = None) -> float:
    """Kernel h(x, y) of the V-statistic representation of T^2_n.

    The Bessel term ``Gamma(alpha) (xy)^{(1-alpha)/2} e^{-x-y} I_{alpha-1}(2 sqrt(xy))``
    is formed as ``exp(log M(xy) - x - y)``.
    """
    if not alpha >= 0.5:
        raise DomainError(f"alpha must be >= 1/2, got {alpha}")
    if x < 0 or y < 0:
        raise DomainError("kernel arguments must be non-negative")
    lm = float(kernels.kernel_m_log_array(alpha, np.array([x * y]), ctl)[0])
    a1 = alpha / (alpha + 1.0)
    return (math.exp(lm - x - y)
            - a1 ** alpha * (math.exp(-a1 * x) + math.exp(-a1 * y))
            + (alpha / (alpha + 2.0)) ** alpha)


def t_statistic(s, alpha: float, ctl: SeriesControl | None = None) -> float:
    """T^2_n = (1/n) sum_i sum_j h(Y_i, Y_j).

    Parameters
    ----------
    s : Sample or array_like
        Observations; the statistic is invariant to their scale.
    alpha : float
        Known shape parameter, at least 1/2.
    """
    if not alpha >= 0.5:
        raise DomainError(f"alpha must be >= 1/2, got {alpha}")
    y = rescale(s).y
    # exact zero can come out as -1e-17 after heavy cancellation
    return max(kernels.vstat(y, alpha, ctl), 0.0)


def t_statistic_quadrature(s, alpha: float, rule: QuadratureRule | None = None,
                           ctl: SeriesControl | None = None) -> float:
    """T^2_n as ``n int [H_n(t) - e^{-t/alpha}]^2 dP0(t)`` by quadrature."""
    rule = rule or default_rule(alpha)
    y = rescale(s).y
    h = empirical_hankel(y, alpha - 1.0, rule.nodes, ctl)
    diff = h - np.exp(-rule.nodes / alpha)
    return y.size * float(np.dot(rule.weights, diff * diff))


def cov_k0_log(s, t, alpha: float, ctl: SeriesControl | None = None):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return -(s + t) / alpha + kernels.kernel_m_log_array(alpha, s * t / alpha**2, ctl)


def cov_k0(s, t, alpha: float, ctl: SeriesControl | None = None):
    """K0(s, t) = e^{-(s+t)/alpha} M(st / alpha^2); broadcasts over arrays."""
    out = np.exp(cov_k0_log(s, t, alpha, ctl))
    return float(out) if out.ndim == 0 else out


def cov_k(s, t, alpha: float, ctl: SeriesControl | None = None):
    """Covariance of the limiting process: K0 minus its rank-two correction."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = np.exp(cov_k0_log(s, t, alpha, ctl)) - np.exp(-(s + t) / alpha) * (
        s * t / alpha**3 + 1.0)
    return float(out) if out.ndim == 0 else out
