"""Statistical helpers: population moments, percentiles, Scott histograms,
and a periodogram for spotting dominant price frequencies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.signal import find_peaks

from .errors import BadFraction, DegenerateSample, EmptyInput, TooShort

SCOTT_FACTOR = 3.49


def _vector(values) -> np.ndarray:
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size == 0:
        raise EmptyInput("empty sample")
    return x


def moments(values) -> Tuple[float, float]:
    """Mean and population (divide-by-n) standard deviation."""
    x = _vector(values)
    mean = float(np.mean(x))
    return mean, float(np.sqrt(np.mean((x - mean) ** 2)))


def pstd(values, axis=None) -> np.ndarray:
    """Population standard deviation along ``axis``."""
    x = np.asarray(values, dtype=float)
    return np.sqrt(np.mean((x - np.mean(x, axis=axis, keepdims=True)) ** 2, axis=axis))


def percentile(values, f: float) -> float:
    """Order statistic at position 1 + f(n-1), linearly interpolated."""
    x = _vector(values)
    if not 0.0 < f < 1.0:
        raise BadFraction(f"fraction must lie in (0, 1), got {f}")
    return float(np.quantile(x, f, method="linear"))


@dataclass(frozen=True)
class StatsSummary:
    min: float
    max: float
    mean: float
    std: float
    integral: float

    def as_row(self) -> List[float]:
        return [self.min, self.max, self.mean, self.std, self.integral]


def summarize(values, integral_weight: float = 1.0) -> StatsSummary:
    """Summary of a price vector; ``integral_weight`` is hours per sample."""
    x = _vector(values)
    mean, std = moments(x)
    return StatsSummary(float(x.min()), float(x.max()), mean, std, float(np.sum(x) * integral_weight))


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def to_csv(self) -> str:
        lines = ["bin_lo,bin_hi,count"]
        for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts):
            lines.append(f"{lo:.6f},{hi:.6f},{int(c)}")
        return "\n".join(lines) + "\n"


def scott_width(values) -> float:
    x = _vector(values)
    _, std = moments(x)
    return SCOTT_FACTOR * std * x.size ** (-1.0 / 3.0)


def scott_histogram(values) -> Histogram:
    """Histogram over [min, max] with Scott's bin width (last bin closed)."""
    x = _vector(values)
    if x.size < 2:
        raise DegenerateSample("need at least two samples")
    _, std = moments(x)
    if std == 0.0:
        raise DegenerateSample("sample has zero spread")
    h = scott_width(x)
    lo, hi = float(x.min()), float(x.max())
    n_bins = max(1, int(np.ceil((hi - lo) / h)))
    counts, edges = np.histogram(x, bins=n_bins, range=(lo, hi))
    return Histogram(edges, counts)


def dominant_frequencies(values, dt: float, top_k: int = 3) -> List[Tuple[float, float]]:
    """Top spectral peaks of the mean-removed series as (1/h, power) pairs.

    Powers are |FFT|^2 / n. A flat series has no peaks.
    """
    x = np.asarray(values, dtype=float).reshape(-1)
    if x.size < 8:
        raise TooShort(f"need at least 8 samples, got {x.size}")
    x = x - x.mean()
    if np.max(np.abs(x)) <= 1e-12 * max(1.0, float(np.max(np.abs(values)))):
        return []
    power = np.abs(np.fft.rfft(x)) ** 2 / x.size
    freqs = np.fft.rfftfreq(x.size, d=dt)
    # pad so that the first non-zero bin and the Nyquist bin can be peaks
    padded = np.concatenate([[0.0], power[1:], [0.0]])
    peaks, _ = find_peaks(padded)
    peaks = peaks[padded[peaks] > 0]
    order = sorted(peaks, key=lambda p: (-padded[p], p))[:top_k]
    return [(float(freqs[p]), float(padded[p])) for p in order]
