"""Empirical distribution primitives: sorted samples, ECDF, quantiles, moments.

All sample containers are immutable after construction (their arrays are
marked read-only), so every operation here is pure and safe to call from
multiple threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "SortedSample",
    "WeightedSample",
    "PairedSample",
    "make_sample",
    "make_paired",
    "ecdf",
    "quantile",
    "mean",
]


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.flags.writeable = False
    return out


def _validate_column(values: np.ndarray, what: str = "sample") -> None:
    if values.ndim != 1 or values.size == 0:
        raise DataError(f"{what} must be a nonempty one-dimensional collection")
    if not np.all(np.isfinite(values)):
        raise DataError(f"{what} contains non-finite values")
    if np.any(values < 0):
        raise DataError(f"{what} contains negative values; the support is [0, inf)")


@dataclass(frozen=True)
class SortedSample:
    """An ascending sample of nonnegative observations.

    ``values`` is a read-only float array sorted ascending (ties kept).
    Construct through :func:`make_sample`, which validates raw input.
    """

    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)

    def cumprobs(self) -> np.ndarray:
        """Cumulative probability mass at each order statistic: i/n, i = 1..n."""
        n = self.n
        return np.arange(1, n + 1) / n


@dataclass(frozen=True)
class WeightedSample:
    """A sorted sample reweighted by nonnegative integer multiplicities.

    The weights must sum to the sample size, as produced by a multinomial
    bootstrap draw; a weight of zero drops the observation from the
    resample without disturbing the order-statistic bookkeeping.
    """

    base: SortedSample
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.weights, dtype=np.int64)
        if len(w) != self.base.n:
            raise DataError("weights length does not match the sample size")
        if np.any(w < 0):
            raise DataError("weights must be nonnegative")
        if int(w.sum()) != self.base.n:
            raise DataError("weights must sum to the sample size")
        object.__setattr__(self, "weights", w)

    @property
    def values(self) -> np.ndarray:
        return self.base.values

    @property
    def n(self) -> int:
        return self.base.n

    def cumprobs(self) -> np.ndarray:
        """Cumulative weight mass at each order statistic, in [0, 1]."""
        return np.cumsum(self.weights) / self.n


@dataclass(frozen=True)
class PairedSample:
    """Two columns of observations with the row pairing preserved.

    ``left`` and ``right`` keep the original row order so that paired rows
    remain recoverable; the sorted per-column views are exposed through
    :meth:`left_sample` and :meth:`right_sample`.
    """

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = _frozen_array(self.left)
        right = _frozen_array(self.right)
        _validate_column(left, "left column")
        _validate_column(right, "right column")
        if len(left) != len(right):
            raise DataError("paired columns must have equal length")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def n(self) -> int:
        return len(self.left)

    def left_sample(self) -> SortedSample:
        return SortedSample(_frozen_array(np.sort(self.left)))

    def right_sample(self) -> SortedSample:
        return SortedSample(_frozen_array(np.sort(self.right)))

    def left_order(self) -> np.ndarray:
        """Row indices that sort the left column ascending (stable)."""
        return np.argsort(self.left, kind="stable")

    def right_order(self) -> np.ndarray:
        return np.argsort(self.right, kind="stable")


def make_sample(raw) -> SortedSample:
    """Validate and sort raw observations into a :class:`SortedSample`.

    Raises
    ------
    DataError
        If the input is empty, contains negative values (support is
        [0, inf)), or contains non-finite values.
    """
    values = np.asarray(raw, dtype=float)
    _validate_column(values)
    return SortedSample(_frozen_array(np.sort(values)))


def make_paired(left_raw, right_raw) -> PairedSample:
    """Validate two row-aligned columns into a :class:`PairedSample`."""
    return PairedSample(np.asarray(left_raw, dtype=float), np.asarray(right_raw, dtype=float))


def ecdf(sample: SortedSample | WeightedSample, x: float) -> float:
    """Right-continuous empirical CDF at ``x``.

    For weighted input each observation carries mass ``w_i / n``.
    """
    if not np.isfinite(x):
        raise ValueError("ecdf requires a finite argument")
    idx = int(np.searchsorted(sample.values, x, side="right"))
    if isinstance(sample, WeightedSample):
        if idx == 0:
            return 0.0
        return float(np.sum(sample.weights[:idx])) / sample.n
    return idx / sample.n


def quantile(sample: SortedSample | WeightedSample, p: float) -> float:
    """Empirical quantile: the smallest observation with ECDF mass >= p.

    For unweighted input and p in (0, 1] this is the ceil(n*p)-th order
    statistic.  At p = 0 the minimum observation (smallest value with
    positive weight) is returned, which keeps the curve integrals finite.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"quantile level must lie in [0, 1], got {p!r}")
    values = sample.values
    n = sample.n
    if isinstance(sample, WeightedSample):
        cumw = np.cumsum(sample.weights)
        if p == 0.0:
            idx = int(np.searchsorted(cumw, 0, side="right"))
            return float(values[min(idx, n - 1)])
        idx = min(int(np.searchsorted(cumw, p * n, side="left")), n - 1)
        # p*n can land an ulp off an integer mass; settle the inf against the
        # represented ECDF values cumw/n so quantile inverts ecdf exactly.
        while idx > 0 and cumw[idx - 1] / n >= p:
            idx -= 1
        while idx < n - 1 and cumw[idx] / n < p:
            idx += 1
        return float(values[idx])
    if p == 0.0:
        return float(values[0])
    k = min(max(int(np.ceil(p * n)), 1), n)
    while k > 1 and (k - 1) / n >= p:
        k -= 1
    while k < n and k / n < p:
        k += 1
    return float(values[k - 1])


def mean(sample: SortedSample | WeightedSample) -> float:
    """Arithmetic (weighted) mean; equals the integral of the quantile."""
    if isinstance(sample, WeightedSample):
        return float(np.sum(sample.weights * sample.values)) / sample.n
    return float(np.sum(sample.values)) / sample.n
