"""Representative single-day DA and ID price profiles.

The DA profile is the hour-by-hour average over all historical days, scaled
around its mean by ``beta``. The ID profile adds to it the average quarter-
hourly ID-DA deviation, shifted to zero sum (so DA and ID have equal daily
integrals) and scaled by ``gamma``.

All functions accept any horizon of H hours and 4H quarters so that small
fixtures can be used in tests; the CLI always works with 24/96.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateAverage,
    EmptyInput,
    NonpositiveBeta,
    UnreachableTarget,
    ZeroDeviation,
)
from .ingest import DayRecord, stack_days
from .stats import StatsSummary, percentile, pstd, summarize

DEFAULT_TAIL = 0.85
MODES = ("unscaled", "nominal", "extreme", "manual")


@dataclass(frozen=True)
class ScalingSpec:
    """How to scale a profile; ``beta``/``gamma`` are filled in once resolved."""

    mode: str
    tail: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "extreme" and not (self.tail is not None and 0.0 < self.tail < 1.0):
            raise ValueError(f"extreme scaling needs a tail fraction in (0, 1), got {self.tail}")
        if self.mode == "manual" and (self.beta is None or self.gamma is None):
            raise ValueError("manual scaling needs beta and gamma")
        if self.beta is not None and not self.beta > 0:
            raise NonpositiveBeta(f"beta must be positive, got {self.beta}")
        if self.gamma is not None and not self.gamma > 0:
            raise NonpositiveBeta(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def unscaled(cls) -> "ScalingSpec":
        return cls("unscaled")

    @classmethod
    def nominal(cls) -> "ScalingSpec":
        return cls("nominal")

    @classmethod
    def extreme(cls, tail: float = DEFAULT_TAIL) -> "ScalingSpec":
        return cls("extreme", tail=tail)

    @classmethod
    def manual(cls, beta: float, gamma: float) -> "ScalingSpec":
        return cls("manual", beta=beta, gamma=gamma)

    def resolved(self, beta: float, gamma: float) -> "ScalingSpec":
        return replace(self, beta=float(beta), gamma=float(gamma))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "tail": self.tail, "beta": self.beta, "gamma": self.gamma}


@dataclass(frozen=True, eq=False)
class DayProfile:
    """A price scenario: hourly DA, quarter-hourly ID and the ID-DA deviation.

    For constructed profiles ``deviation`` is the corrected (zero-sum,
    unscaled) deviation; for clustering representatives it is the raw one.
    """

    da: np.ndarray
    id: np.ndarray
    deviation: np.ndarray
    scaling: ScalingSpec
    da_mean: float
    fingerprint: str = ""
    label: str = ""

    horizon = "day"
    da_index_name = "hour"
    id_index_name = "quarter"
    price_column = "price_eur_mwh"

    def __post_init__(self):
        for name in ("da", "id", "deviation"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.id.size != 4 * self.da.size or self.deviation.size != self.id.size:
            raise ValueError("ID and deviation need four quarters per DA hour")

    @property
    def beta(self) -> float:
        return self.scaling.beta

    @property
    def gamma(self) -> float:
        return self.scaling.gamma

    def tile(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """Periodic repetition over ``n`` consecutive horizons."""
        return np.tile(self.da, n), np.tile(self.id, n)

    def da_csv(self) -> str:
        return _series_csv(self.da_index_name, self.price_column, self.da)

    def id_csv(self) -> str:
        return _series_csv(self.id_index_name, self.price_column, self.id)

    def bundle(self, extra: Optional[dict] = None) -> dict:
        out = {
            "horizon": self.horizon,
            "label": self.label,
            "scaling": self.scaling.to_dict(),
            "beta": self.beta,
            "gamma": self.gamma,
            "da_mean": self.da_mean,
            "source_fingerprint": self.fingerprint,
            "da": [float(v) for v in self.da],
            "id": [float(v) for v in self.id],
            "deviation": [float(v) for v in self.deviation],
        }
        if extra:
            out.update(extra)
        return out

    def bundle_json(self, extra: Optional[dict] = None) -> str:
        return json.dumps(self.bundle(extra), indent=2, sort_keys=True) + "\n"


def _series_csv(index_name: str, price_name: str, values: np.ndarray) -> str:
    lines = [f"{index_name},{price_name}"]
    lines += [f"{k + 1},{v:.2f}" for k, v in enumerate(values)]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# building blocks


def _matrices(days: Sequence[DayRecord], minimum: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    days = list(days)
    if len(days) < minimum:
        raise EmptyInput(f"need at least {minimum} day(s), got {len(days)}")
    return stack_days(days)


def average_rows(matrix: np.ndarray) -> np.ndarray:
    """Column means, summed in row order; shared by every averaging path."""
    matrix = np.asarray(matrix, dtype=float)
    total = np.zeros(matrix.shape[1])
    for row in matrix:
        total += row
    return total / matrix.shape[0]


def average_da_day(days: Sequence[DayRecord]) -> np.ndarray:
    da, _ = _matrices(days)
    return average_rows(da)


def scale_profile(profile, beta: float) -> np.ndarray:
    """Stretch ``profile`` around its mean by ``beta``; the mean is kept."""
    if not beta > 0:
        raise NonpositiveBeta(f"beta must be positive, got {beta}")
    p = np.asarray(profile, dtype=float)
    mean = np.mean(p)
    return mean + beta * (p - mean)


def _profile_spread(avg: np.ndarray) -> float:
    spread = float(pstd(avg))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(avg)))):
        raise DegenerateAverage("averaged profile is flat; beta is undefined")
    return spread


def beta_nominal_day(days: Sequence[DayRecord]) -> float:
    da, _ = _matrices(days)
    spread = _profile_spread(average_rows(da))
    return float(np.mean(pstd(da, axis=1)) / spread)


def beta_extreme_day(days: Sequence[DayRecord], tail: float = DEFAULT_TAIL) -> float:
    da, _ = _matrices(days)
    spread = _profile_spread(average_rows(da))
    return percentile(pstd(da, axis=1), tail) / spread


def expand_hours(hourly: np.ndarray) -> np.ndarray:
    """Hour value k repeated for quarters 4k..4k+3 (the ceil(q/4) map)."""
    return np.repeat(np.asarray(hourly, dtype=float), 4, axis=-1)


def average_id_deviation_day(days: Sequence[DayRecord]) -> np.ndarray:
    da, id_ = _matrices(days)
    return average_rows(id_ - expand_hours(da))


def zero_mean_correct(deviation, block: Optional[int] = None) -> np.ndarray:
    """Subtract the mean, per consecutive ``block`` if given."""
    dev = np.asarray(deviation, dtype=float)
    if block is None:
        return dev - np.mean(dev)
    if dev.size % block:
        raise ValueError(f"length {dev.size} is not a multiple of block {block}")
    parts = dev.reshape(-1, block)
    return (parts - parts.mean(axis=1, keepdims=True)).reshape(-1)


def profile_std(a: np.ndarray, d: np.ndarray, gamma: float) -> float:
    """Population std of ``a + gamma*d`` about zero (both already mean-free)."""
    return float(np.sqrt(np.mean((a + gamma * d) ** 2)))


def gamma_for_target_std(da_scaled_dev, corrected_dev, target_std: float) -> float:
    """Solve sqrt(mean((a + gamma*d)^2)) = target for gamma > 0 by bisection.

    ``a`` is the beta-scaled DA deviation from its mean on the quarter grid and
    ``d`` the corrected ID-DA deviation. The left side is a convex function of
    gamma; the root on its increasing branch is returned.
    """
    a = np.asarray(da_scaled_dev, dtype=float)
    d = np.asarray(corrected_dev, dtype=float)
    if a.shape != d.shape:
        raise ValueError("deviation vectors differ in length")
    dd = float(np.mean(d * d))
    if dd <= 1e-24 * max(1.0, float(np.mean(a * a))):
        raise ZeroDeviation("corrected ID-DA deviation is identically zero")
    target = float(target_std)
    lo = max(0.0, -float(np.mean(a * d)) / dd)
    floor = profile_std(a, d, lo)
    if target < floor or (lo == 0.0 and target <= floor):
        raise UnreachableTarget(
            f"target std {target:.6g} is below {floor:.6g}, the smallest reachable with gamma > 0"
        )
    hi = max(1.0, 2.0 * lo)
    while profile_std(a, d, hi) < target:
        hi *= 2.0
    width = 1e-12 * max(1.0, hi)
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if profile_std(a, d, mid) < target:
            lo = mid
        else:
            hi = mid
    # pick whichever end leaves the smaller residual
    r_lo = abs(profile_std(a, d, lo) - target)
    r_hi = abs(profile_std(a, d, hi) - target)
    return hi if r_hi <= r_lo or lo == 0.0 else lo


# --------------------------------------------------------------------------
# end to end


def _resolve_beta(da: np.ndarray, avg: np.ndarray, spec: ScalingSpec, stds: np.ndarray) -> float:
    if spec.mode == "unscaled":
        return 1.0
    if spec.mode == "manual":
        return float(spec.beta)
    spread = _profile_spread(avg)
    if spec.mode == "nominal":
        return float(np.mean(stds) / spread)
    return percentile(stds, spec.tail) / spread


def _resolve_gamma(a, dev, spec: ScalingSpec, id_stds: np.ndarray) -> float:
    if spec.mode == "unscaled":
        return 1.0
    if spec.mode == "manual":
        return float(spec.gamma)
    target = float(np.mean(id_stds)) if spec.mode == "nominal" else percentile(id_stds, spec.tail)
    return gamma_for_target_std(a, dev, target)


def construct_profile(
    da_rows: np.ndarray,
    id_rows: np.ndarray,
    spec: ScalingSpec,
    closure_block: Optional[int] = None,
):
    """Shared engine: rows are historical periods (days or weeks).

    Returns (da, id, corrected deviation, resolved spec, da_mean).
    """
    if spec.mode in ("nominal", "extreme") and da_rows.shape[0] < 2:
        raise EmptyInput(f"{spec.mode} scaling needs at least 2 historical periods")
    avg = average_rows(da_rows)
    da_mean = float(np.mean(avg))
    beta = _resolve_beta(da_rows, avg, spec, pstd(da_rows, axis=1))
    da = scale_profile(avg, beta)
    raw_dev = average_rows(id_rows - expand_hours(da_rows))
    dev = zero_mean_correct(raw_dev, closure_block)
    a = expand_hours(da - da_mean)
    gamma = _resolve_gamma(a, dev, spec, pstd(id_rows, axis=1))
    id_ = expand_hours(da) + gamma * dev
    return da, id_, dev, spec.resolved(beta, gamma), da_mean


def build_day_scenario(
    days: Sequence[DayRecord],
    spec: ScalingSpec,
    exclude: Sequence[int] = (),
    fingerprint: str = "",
) -> DayProfile:
    """Single-day scenario; ``exclude`` lists day_index values to leave out."""
    chosen = [d for d in days if d.day_index not in set(exclude)]
    da_rows, id_rows = _matrices(chosen)
    da, id_, dev, resolved, da_mean = construct_profile(da_rows, id_rows, spec)
    return DayProfile(da, id_, dev, resolved, da_mean, fingerprint, label=spec.mode)


def profile_stats(profile: DayProfile) -> Tuple[StatsSummary, StatsSummary]:
    """(DA, ID) summaries; integrals in EUR per MW held over the horizon."""
    return summarize(profile.da, 1.0), summarize(profile.id, 0.25)
