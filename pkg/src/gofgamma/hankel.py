"""Hankel transforms and the Gamma(alpha, 1) quadrature they are integrated with."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .kernels import kernel_j_array
from .specfun import DomainError, SeriesControl, kummer_1f1

NODES_ENV = "GOFGAMMA_NODES"


class QuadratureError(RuntimeError):
    """Node or weight computation failed."""


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss rule for the probability measure Gamma(alpha, 1).

    ``integrate(f)`` approximates ``E f(X)`` for ``X ~ Gamma(alpha, 1)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    alpha: float

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1:
            raise QuadratureError("nodes and weights must be 1-d and of equal length")
        if nodes.size < 8:
            raise QuadratureError("a rule needs at least 8 nodes")
        if np.any(nodes <= 0) or np.any(weights < 0):
            raise QuadratureError("nodes must be positive and weights non-negative")
        if abs(weights.sum() - 1.0) > 1e-10:
            raise QuadratureError(f"weights sum to {weights.sum()!r}, not 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.nodes.size

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Apply the rule to a vectorised integrand."""
        vals = np.asarray(f(self.nodes), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise QuadratureError("integrand is not finite at some node")
        return float(np.dot(self.weights, vals))


def _orthonormal_scan(x: np.ndarray, alpha: float, n: int):
    """Return (p_n, p_n', log sum_{k<n} p_k^2) at points x.

    Uses the orthonormal recurrence for Gamma(alpha, 1) with a common
    rescaling so large nodes do not overflow; p_n and p_n' share the
    discarded scale, which cancels in Newton steps.
    """
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    d_prev = np.zeros_like(x)
    d = np.zeros_like(x)
    ssq = np.zeros_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n):
        ssq += p * p
        a_k = 2.0 * k + alpha
        b_k = math.sqrt(k * (k + alpha - 1.0))
        b_k1 = math.sqrt((k + 1.0) * (k + alpha))
        p_new = ((x - a_k) * p - b_k * p_prev) / b_k1
        d_new = (p + (x - a_k) * d - b_k * d_prev) / b_k1
        p_prev, p, d_prev, d = p, p_new, d, d_new
        big = np.abs(p) > 1e100
        if big.any():
            f = np.where(big, 1e-100, 1.0)
            p, p_prev, d, d_prev = p * f, p_prev * f, d * f, d_prev * f
            ssq *= f * f
            log_scale += np.where(big, 200.0 * math.log(10.0), 0.0)
    return p, d, np.log(ssq) + log_scale


def quadrature_for(alpha: float, nodes: int) -> QuadratureRule:
    """Generalised Gauss-Laguerre rule normalised to Gamma(alpha, 1).

    Nodes are eigenvalues of the Jacobi matrix (Golub-Welsch), polished by
    Newton steps on the orthonormal polynomial; weights come from the
    Christoffel function ``1 / sum_k p_k(x)^2``.

    Parameters
    ----------
    alpha : float
        Shape of the weight, at least 1/2.
    nodes : int
        Number of nodes, at least 8.
    """
    if not alpha >= 0.5:
        raise DomainError(f"alpha must be >= 1/2, got {alpha}")
    if int(nodes) != nodes or nodes < 8:
        raise DomainError(f"nodes must be an integer >= 8, got {nodes}")
    n = int(nodes)
    k = np.arange(n, dtype=float)
    diag = 2.0 * k + alpha
    off = np.sqrt(k[1:] * (k[1:] + alpha - 1.0))
    try:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise QuadratureError(f"tridiagonal eigen-solve failed: {exc}") from exc
    x = np.sort(x)
    for _ in range(3):
        p, d, _ = _orthonormal_scan(x, alpha, n)
        step = p / d
        x = x - step
        if np.max(np.abs(step) / x) < 1e-15:
            break
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise QuadratureError("polished nodes are not positive and distinct")
    _, _, log_ssq = _orthonormal_scan(x, alpha, n)
    w = np.exp(-log_ssq)
    total = w.sum()
    if abs(total - 1.0) > 1e-10:
        raise QuadratureError(f"Christoffel weights sum to {total!r}")
    return QuadratureRule(x, w / total, float(alpha))


def default_node_count(alpha: float) -> int:
    """Node count used when none is requested (env ``GOFGAMMA_NODES`` wins)."""
    env = os.environ.get(NODES_ENV)
    if env:
        return int(env)
    return 200 if alpha <= 10 else 400


@lru_cache(maxsize=64)
def _cached_rule(alpha: float, nodes: int) -> QuadratureRule:
    return quadrature_for(alpha, nodes)


def default_rule(alpha: float, nodes: int | None = None) -> QuadratureRule:
    return _cached_rule(float(alpha), int(nodes or default_node_count(alpha)))


def empirical_hankel(y, nu: float, t, ctl: SeriesControl | None = None):
    """Sample mean of ``kernel_j(nu, t * y_j)``; ``t`` may be an array."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise DomainError("empty sample")
    if np.any(y < 0) or not np.all(np.isfinite(y)):
        raise DomainError("rescaled values must be finite and non-negative")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    vals = kernel_j_array(nu, t_arr.reshape(-1, 1) * y.reshape(1, -1), ctl).mean(axis=1)
    return float(vals[0]) if t_arr.ndim == 0 else vals.reshape(t_arr.shape)


def gamma_hankel(alpha: float, lam: float, nu: float, t: float,
                 ctl: SeriesControl | None = None) -> float:
    """Hankel transform of Gamma(alpha, lam): ``1F1(alpha; nu+1; -t/lam)``."""
    if not (alpha > 0 and lam > 0):
        raise DomainError("alpha and lam must be positive")
    if not nu >= -0.5:
        raise DomainError(f"nu must be >= -1/2, got {nu}")
    return kummer_1f1(alpha, nu + 1.0, -t / lam, ctl)


def density_hankel(h_weight: Callable[[np.ndarray], np.ndarray], alpha: float, t,
                   rule: QuadratureRule, ctl: SeriesControl | None = None):
    """``int kernel_j(alpha-1, t x / alpha) h(x) dP0(x)`` by the rule.

    ``h_weight`` is called once on the node array; ``t`` may be an array.
    """
    hv = np.asarray(h_weight(rule.nodes), dtype=float)
    if hv.shape != rule.nodes.shape or not np.all(np.isfinite(hv)):
        raise QuadratureError("h_weight must be finite at every node")
    t_arr = np.asarray(t, dtype=float)
    z = t_arr.reshape(-1, 1) * rule.nodes.reshape(1, -1) / alpha
    vals = kernel_j_array(alpha - 1.0, z, ctl) @ (rule.weights * hv)
    return float(vals[0]) if t_arr.ndim == 0 else vals.reshape(t_arr.shape)
