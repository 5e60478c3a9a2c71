"""Empirical distributions, fixed-width histograms and the two-sample KS distance."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EmpiricalDistribution:
    """Sorted sample with a right-continuous ECDF."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if np.any(np.isnan(s)):
            raise ValueError("samples contain NaN")
        self.samples = s

    def __len__(self):
        return len(self.samples)

    def cdf(self, z):
        """``#{s <= z} / n``, vectorized over ``z``."""
        return np.searchsorted(self.samples, z, side="right") / len(self.samples)

    def quantiles(self, levels=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
        return {f"q{lv:g}": float(np.quantile(self.samples, lv)) for lv in levels}

    def mean(self) -> float:
        return float(np.mean(self.samples))


@dataclass
class Histogram:
    """Counts of bins ``[origin + i*w, origin + (i+1)*w)``."""

    bin_width: float
    origin: float
    counts: np.ndarray
    n_total: int

    @classmethod
    def from_samples(cls, samples, bin_width: float, origin: float = 0.0) -> "Histogram":
        if not bin_width > 0:
            raise ValueError("bin width must be positive")
        x = np.asarray(samples, dtype=float)
        if x.size == 0:
            return cls(bin_width, origin, np.zeros(0, dtype=np.int64), 0)
        if np.any(x < origin) or not np.all(np.isfinite(x)):
            raise ValueError("samples must be finite and >= origin")
        idx = np.floor((x - origin) / bin_width).astype(np.int64)
        # the division can round across an edge; agree with the edges as computed
        idx -= (origin + idx * bin_width > x).astype(np.int64)
        idx += (origin + (idx + 1) * bin_width <= x).astype(np.int64)
        counts = np.bincount(idx)
        return cls(bin_width, origin, counts, int(x.size))

    def edges(self):
        i = np.arange(len(self.counts))
        return self.origin + i * self.bin_width, self.origin + (i + 1) * self.bin_width

    def rows(self):
        lo, hi = self.edges()
        return [(float(a), float(b), int(c)) for a, b, c in zip(lo, hi, self.counts)]


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance ``sup_z |F_a(z) - F_b(z)|``.

    Both ECDFs are step functions that only jump at sample points, so the
    supremum is attained on the pooled sample.
    """
    a = a if isinstance(a, EmpiricalDistribution) else EmpiricalDistribution(a)
    b = b if isinstance(b, EmpiricalDistribution) else EmpiricalDistribution(b)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("KS distance needs two nonempty samples")
    pooled = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.cdf(pooled) - b.cdf(pooled))))


def mean_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    if x.size == 1:
        return float(x[0]), math.nan
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size))
