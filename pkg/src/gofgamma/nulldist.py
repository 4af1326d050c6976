"""Null distribution of T^2_n: one-term spectral approximation and Monte Carlo."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np
from scipy import stats

from .kernels import vstat_many
from .specfun import DomainError
from .spectrum import EigenSolution

DEFAULT_SEED = 20240101


def chi2_tail(df: int, x: float) -> float:
    """Upper tail P(chi2_df >= x)."""
    if int(df) != df or df < 1:
        raise DomainError(f"df must be a positive integer, got {df}")
    if not x >= 0.0:
        raise DomainError(f"x must be non-negative, got {x}")
    return float(stats.chi2.sf(x, df))


def chi2_quantile(df: int, q: float) -> float:
    """Lower quantile of chi2_df at probability q."""
    if int(df) != df or df < 1:
        raise DomainError(f"df must be a positive integer, got {df}")
    if not 0.0 < q < 1.0:
        raise DomainError(f"q must lie in (0, 1), got {q}")
    return float(stats.chi2.ppf(q, df))


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")


@dataclass(frozen=True)
class NullApprox:
    """One-term spectral approximation P(T >= t) ~ P(chi2_m >= 2t/(delta_1 + delta_m))."""

    m: int
    deltas: tuple
    level: float = 0.05
    method: str = "spectral_one_term"

    def __post_init__(self):
        _check_level(self.level)
        if self.m < 1:
            raise DomainError("m must be at least 1")
        if self.m > len(self.deltas):
            raise DomainError(f"m={self.m} exceeds the {len(self.deltas)} available eigenvalues")

    @property
    def scale(self) -> float:
        return 0.5 * (self.deltas[0] + self.deltas[self.m - 1])

    @property
    def critical_value(self) -> float:
        return self.scale * chi2_quantile(self.m, 1.0 - self.level)

    def p_value(self, observed: float) -> float:
        return chi2_tail(self.m, observed / self.scale)


def critical_value_spectral(e: EigenSolution, m: int, level: float = 0.05) -> float:
    """``(delta_1 + delta_m)/2 * chi2_{m; 1-level}``."""
    return NullApprox(int(m), tuple(e.deltas), level).critical_value


@dataclass(frozen=True)
class McProtocol:
    """Batches of simulated statistics and the trimmed mean of batch percentiles."""

    batches: int = 10
    reps_per_batch: int = 10_000
    trim: float = 0.2
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.batches < 1 or self.reps_per_batch < 1:
            raise DomainError("batches and reps_per_batch must be positive")
        if not 0.0 <= self.trim < 0.5:
            raise DomainError(f"trim must lie in [0, 0.5), got {self.trim}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    def generator(self, batch: int) -> np.random.Generator:
        """Counter-based stream for one batch; reps are drawn in order within it."""
        ss = np.random.SeedSequence([int(self.seed), int(batch)])
        return np.random.Generator(np.random.Philox(ss))


def nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    """Nearest-rank q-quantile of an ascending array."""
    n = sorted_values.size
    idx = min(n - 1, max(0, math.ceil(q * n) - 1))
    return float(sorted_values[idx])


def trimmed_mean(values, trim: float) -> float:
    return float(stats.trim_mean(np.asarray(values, dtype=float), trim))


Sampler = Callable[[np.random.Generator, int, int], np.ndarray]


def gamma_sampler(alpha: float) -> Sampler:
    """Gamma(alpha, 1) rows; the statistic ignores the scale."""

    def draw(rng: np.random.Generator, reps: int, n: int) -> np.ndarray:
        return rng.standard_gamma(alpha, size=(reps, n))

    return draw


def simulate_statistics(sampler: Sampler, alpha: float, n: int, proto: McProtocol,
                        chunk: int = 2000) -> list[np.ndarray]:
    """Per-batch arrays of simulated T^2_n for data drawn by ``sampler``."""
    out = []
    for b in range(proto.batches):
        rng = proto.generator(b)
        parts = []
        left = proto.reps_per_batch
        while left > 0:
            k = min(chunk, left)
            x = sampler(rng, k, n)
            means = x.mean(axis=1, keepdims=True)
            y = np.divide(x, means, out=np.zeros_like(x), where=means > 0)
            parts.append(np.maximum(vstat_many(y, alpha), 0.0))
            left -= k
        out.append(np.concatenate(parts))
    return out


@dataclass(frozen=True, eq=False)
class NullSimulation:
    """Monte Carlo null distribution for one (alpha, n, level)."""

    alpha: float
    n: int
    level: float
    protocol: McProtocol
    critical_value: float
    quantiles: tuple
    statistics: np.ndarray = field(repr=False)

    def quantile(self, q: float) -> float:
        return nearest_rank(self.statistics, q)

    def p_value(self, observed: float) -> float:
        # fraction of simulated statistics at least as large as observed
        k = self.statistics.size - np.searchsorted(self.statistics, observed, side="left")
        return float(k) / self.statistics.size

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n": self.n,
            "level": self.level,
            "protocol": asdict(self.protocol),
            "critical_value": self.critical_value,
            "quantiles": list(self.quantiles),
        }


def simulate_null(alpha: float, n: int, proto: McProtocol | None = None,
                  level: float = 0.05) -> NullSimulation:
    """Monte Carlo critical value for T^2_n under Gamma(alpha, 1).

    Each batch yields the nearest-rank (1 - level) percentile of its
    statistics; the critical value is the trimmed mean of those percentiles.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n}")
    _check_level(level)
    proto = proto or McProtocol()
    batches = simulate_statistics(gamma_sampler(alpha), alpha, int(n), proto)
    qs = tuple(nearest_rank(np.sort(b), 1.0 - level) for b in batches)
    crit = trimmed_mean(qs, proto.trim)
    pooled = np.sort(np.concatenate(batches))
    pooled.setflags(write=False)
    return NullSimulation(float(alpha), int(n), float(level), proto, crit, qs, pooled)


def p_value(observed: float, source) -> float:
    """p-value from a :class:`NullApprox` or a :class:`NullSimulation`."""
    if not observed >= 0.0:
        raise DomainError("observed statistic must be non-negative")
    return float(min(1.0, max(0.0, source.p_value(observed))))
