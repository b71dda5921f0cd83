"""
Empirical distribution tools used to compare samples against the analytic
distribution functions.
"""
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, stats

from src.exceptions import DomainException
from src.special import composite_gauss_legendre


@dataclass(frozen=True)
class EmpiricalCdf:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if arr.size < 1:
            raise DomainException("经验分布需要至少一个样本")
        if np.any(np.isnan(arr)):
            raise DomainException("样本中存在 NaN")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def n(self):
        return self.samples.size

    def __call__(self, x):
        out = np.searchsorted(self.samples, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out

    def left_limit(self, x):
        out = np.searchsorted(self.samples, x, side="left") / self.n
        return float(out) if np.ndim(out) == 0 else out


def empirical_cdf(samples) -> EmpiricalCdf:
    return EmpiricalCdf(samples)


class TabulatedCdf:
    """
    Monotone interpolant of a distribution function tabulated on a grid;
    0 below the grid and 1 above it.
    """

    def __init__(self, grid, values):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.clip(np.maximum.accumulate(np.asarray(values, dtype=float)), 0.0, 1.0)
        if self.grid.size < 2 or np.any(np.diff(self.grid) <= 0):
            raise DomainException("CDF 表格网格必须严格递增且至少两个点")
        self._interp = interpolate.PchipInterpolator(self.grid, self.values, extrapolate=False)

    @classmethod
    def from_function(cls, cdf, lo, hi, step):
        grid = np.linspace(lo, hi, int(round((hi - lo) / step)) + 1)
        return cls(grid, [cdf(s) for s in grid])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self._interp(x)
        out = np.where(x < self.grid[0], 0.0, out)
        out = np.where(x > self.grid[-1], 1.0, out)
        return float(out) if out.ndim == 0 else out


def ks_distance(ecdf: EmpiricalCdf, cdf):
    """sup_x |F̂(x) - F(x)| including left limits at the jumps."""
    points = np.unique(ecdf.samples)
    model = np.vectorize(cdf, otypes=[float])
    right = np.abs(ecdf(points) - model(points))
    left = np.abs(ecdf.left_limit(points) - model(np.nextafter(points, -np.inf)))
    return float(max(np.max(right), np.max(left)))


def two_sample_ks(first, second):
    result = stats.ks_2samp(np.asarray(first), np.asarray(second))
    return float(result.statistic), float(result.pvalue)


def distribution_moments(cdf, lo, hi, panels=32, order=16):
    """
    Mean and variance of a law supported (numerically) on [lo, hi],
    integrating the CDF by parts.
    """
    rule = composite_gauss_legendre(order, lo, hi, panels)
    values = np.vectorize(cdf, otypes=[float])(rule.nodes)
    f_lo, f_hi = float(cdf(lo)), float(cdf(hi))
    mean = hi * f_hi - lo * f_lo - np.sum(values * rule.weights)
    second = hi ** 2 * f_hi - lo ** 2 * f_lo - np.sum(2.0 * rule.nodes * values * rule.weights)
    return float(mean), float(second - mean ** 2)


def joint_ecdf(samples, thresholds):
    """
    Parameters:
    - samples: (n, m) array, one m-dimensional observation per row.
    - thresholds: (k, m) array of threshold vectors.

    Returns:
    (k,) fraction of rows with every coordinate <= the threshold.
    """
    samples = np.asarray(samples, dtype=float)
    thresholds = np.atleast_2d(np.asarray(thresholds, dtype=float))
    if samples.ndim != 2 or samples.shape[1] != thresholds.shape[1]:
        raise DomainException(f"样本维数与阈值维数不一致：{samples.shape} vs {thresholds.shape}")
    below = np.all(samples[None, :, :] <= thresholds[:, None, :], axis=2)
    return below.mean(axis=1)


def sup_difference(samples, thresholds, values):
    empirical = joint_ecdf(samples, thresholds)
    return float(np.max(np.abs(empirical - np.asarray(values, dtype=float))))


__all__ = [
    "EmpiricalCdf",
    "TabulatedCdf",
    "distribution_moments",
    "empirical_cdf",
    "joint_ecdf",
    "ks_distance",
    "sup_difference",
    "two_sample_ks",
]
