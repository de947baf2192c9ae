"""Multinomial bootstrap: weights, resampled curves, statistics, critical values.

Randomness is organized as counter-based substreams: every replication
derives its own generator from the master seed and an integer key, so the
full list of bootstrap statistics is a pure function of (data, config,
seed) regardless of execution order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .curves import Direction, DifferenceCurve, Grid, LambdaCurve
from .empirical import PairedSample, SortedSample, WeightedSample
from .errors import ConfigError
from .functionals import ContactSet, FunctionalKind, derivative_int, derivative_sup

__all__ = [
    "substream",
    "derive_seed",
    "BootstrapDraw",
    "draw_weights",
    "bootstrap_draw",
    "bootstrap_diff_curve",
    "bootstrap_diff_curve_paired",
    "bootstrap_statistic",
    "critical_value",
    "p_value",
]

_MASK64 = (1 << 64) - 1
_WORD = 1 << 32


def _key_words(parts) -> tuple[int, ...]:
    """Flatten a key of ints/floats into 32-bit words for stream derivation."""
    words: list[int] = []
    for part in parts:
        if isinstance(part, float):
            bits = int(np.float64(part).view(np.uint64))
            words.extend((bits >> 32, bits & (_WORD - 1)))
        else:
            value = int(part) & _MASK64
            words.extend((value >> 32, value & (_WORD - 1)))
    return tuple(words)


def substream(seed: int, *key) -> np.random.Generator:
    """Counter-based generator for (seed, key); independent of call order."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=_key_words(key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key) -> int:
    """Deterministic 64-bit child seed for nested components."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=_key_words(key))
    hi, lo = ss.generate_state(2)
    return (int(hi) << 32) | int(lo)


@dataclass(frozen=True)
class BootstrapDraw:
    """One replication's multinomial weights.

    For matched pairs both fields reference the same row-indexed vector;
    for independent samples the vectors are drawn independently and are
    aligned with each sample's sorted order.
    """

    weights1: np.ndarray
    weights2: np.ndarray

    @property
    def shared(self) -> bool:
        return self.weights1 is self.weights2


def draw_weights(n: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial(n; 1/n, ..., 1/n) sample via n uniform category draws."""
    if n < 1:
        raise ConfigError("weight vectors require at least one category")
    return np.bincount(rng.integers(0, n, size=n), minlength=n)


def bootstrap_draw(n1: int, n2: int, shared: bool, rng: np.random.Generator) -> BootstrapDraw:
    """Draw one replication's weights; ``shared`` mirrors matched pairs."""
    w1 = draw_weights(n1, rng)
    if shared:
        if n1 != n2:
            raise ConfigError("shared weights require equal sample sizes")
        return BootstrapDraw(w1, w1)
    return BootstrapDraw(w1, draw_weights(n2, rng))


def bootstrap_diff_curve(s1: SortedSample, s2: SortedSample, draw: BootstrapDraw,
                         m: int, direction: Direction) -> DifferenceCurve:
    """Difference curve of the two reweighted samples (independent layout)."""
    if len(draw.weights1) != s1.n or len(draw.weights2) != s2.n:
        raise ConfigError("bootstrap weights are not aligned with the samples")
    first = LambdaCurve(WeightedSample(s1, draw.weights1), m, direction)
    second = LambdaCurve(WeightedSample(s2, draw.weights2), m, direction)
    return DifferenceCurve(first, second)


def bootstrap_diff_curve_paired(pairs: PairedSample, draw: BootstrapDraw,
                                m: int, direction: Direction) -> DifferenceCurve:
    """Difference curve for matched pairs: one weight per row, shared by
    both columns and routed through each column's sort order."""
    if not draw.shared:
        raise ConfigError("matched pairs require a shared weight vector")
    if len(draw.weights1) != pairs.n:
        raise ConfigError("bootstrap weights are not aligned with the paired rows")
    w = draw.weights1
    first = LambdaCurve(WeightedSample(pairs.left_sample(), w[pairs.left_order()]), m, direction)
    second = LambdaCurve(WeightedSample(pairs.right_sample(), w[pairs.right_order()]), m, direction)
    return DifferenceCurve(first, second)


def bootstrap_statistic(phi_star, phi_hat, cs: ContactSet, t_n: float,
                        kind: FunctionalKind, grid: Grid) -> float:
    """Derivative functional applied to sqrt(T_n) * (phi_star - phi_hat)."""
    phi_star = np.asarray(phi_star, dtype=float)
    phi_hat = np.asarray(phi_hat, dtype=float)
    if phi_star.shape != phi_hat.shape or len(phi_star) != len(grid):
        raise ConfigError("bootstrap and sample curves are not aligned with the grid")
    h = np.sqrt(t_n) * (phi_star - phi_hat)
    if kind is FunctionalKind.SUP:
        return derivative_sup(h, cs)
    return derivative_int(h, cs, grid)


def critical_value(stats, alpha: float) -> float:
    """Left-continuous empirical (1 - alpha) quantile: the ceil((1-alpha)B)-th
    smallest of the B bootstrap statistics."""
    stats = np.asarray(stats, dtype=float)
    if stats.size == 0:
        raise ConfigError("critical value of an empty statistic list")
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"significance level must lie in (0, 1), got {alpha!r}")
    b = stats.size
    k = min(max(ceil((1.0 - alpha) * b), 1), b)
    return float(np.partition(stats, k - 1)[k - 1])


def p_value(stats, observed: float) -> float:
    """Share of bootstrap statistics at or above the observed statistic."""
    stats = np.asarray(stats, dtype=float)
    if stats.size == 0:
        raise ConfigError("p-value of an empty statistic list")
    return float(np.count_nonzero(stats >= observed)) / stats.size
