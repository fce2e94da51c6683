"""Representative single-week (168 h / 672 quarter-hour) profiles.

Same construction as the single-day profile, with two differences: history is
split into whole Monday-Sunday weeks, and the ID-DA deviation is closed to
zero separately for each weekday rather than once over the whole week.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from .errors import EmptyInput
from .ingest import WeekRecord
from .profile_day import (
    DEFAULT_TAIL,
    DayProfile,
    ScalingSpec,
    _profile_spread,
    average_rows,
    construct_profile,
    expand_hours,
    gamma_for_target_std,
    zero_mean_correct,
)
from .stats import percentile, pstd

WEEKDAYS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday")


class WeekProfile(DayProfile):
    """Week-long scenario; ``deviation`` sums to zero within each weekday."""

    horizon = "week"
    da_index_name = "hour_of_week"
    id_index_name = "quarter_of_week"
    price_column = "price"

    @property
    def quarters_per_day(self) -> int:
        return self.id.size // 7

    def bundle(self, extra=None) -> dict:
        out = super().bundle(extra)
        out["weekday_labels"] = list(WEEKDAYS)
        return out


def _week_matrices(weeks: Sequence[WeekRecord], minimum: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    weeks = list(weeks)
    if len(weeks) < minimum:
        raise EmptyInput(f"need at least {minimum} week(s), got {len(weeks)}")
    return np.vstack([w.da for w in weeks]), np.vstack([w.id for w in weeks])


def _day_quarters(id_rows: np.ndarray) -> int:
    return id_rows.shape[1] // 7


def average_da_week(weeks: Sequence[WeekRecord]) -> np.ndarray:
    da, _ = _week_matrices(weeks)
    return average_rows(da)


def beta_week(weeks: Sequence[WeekRecord], mode: ScalingSpec = ScalingSpec.nominal()) -> float:
    """Nominal: mean weekly std over the averaged week's std; Extreme: a percentile."""
    if mode.mode not in ("nominal", "extreme"):
        raise ValueError("beta_week needs nominal or extreme scaling")
    da, _ = _week_matrices(weeks, 1 if mode.mode == "nominal" else 2)
    spread = _profile_spread(average_rows(da))
    stds = pstd(da, axis=1)
    if mode.mode == "nominal":
        return float(np.mean(stds) / spread)
    return percentile(stds, mode.tail) / spread


def id_deviation_week(weeks: Sequence[WeekRecord]) -> np.ndarray:
    """Average ID-DA deviation per week slot, zero-summed per weekday."""
    da, id_ = _week_matrices(weeks)
    raw = average_rows(id_ - expand_hours(da))
    return zero_mean_correct(raw, block=_day_quarters(id_))


def gamma_week(
    weeks: Sequence[WeekRecord], beta: float, mode: ScalingSpec = ScalingSpec.nominal()
) -> float:
    if mode.mode not in ("nominal", "extreme"):
        raise ValueError("gamma_week needs nominal or extreme scaling")
    da, id_ = _week_matrices(weeks, 1 if mode.mode == "nominal" else 2)
    avg = average_rows(da)
    dev = zero_mean_correct(average_rows(id_ - expand_hours(da)), block=_day_quarters(id_))
    a = expand_hours(beta * (avg - np.mean(avg)))
    stds = pstd(id_, axis=1)
    target = float(np.mean(stds)) if mode.mode == "nominal" else percentile(stds, mode.tail)
    return gamma_for_target_std(a, dev, target)


def build_week_scenario(
    weeks: Sequence[WeekRecord], spec: ScalingSpec, fingerprint: str = ""
) -> WeekProfile:
    da_rows, id_rows = _week_matrices(weeks)
    da, id_, dev, resolved, da_mean = construct_profile(
        da_rows, id_rows, spec, closure_block=_day_quarters(id_rows)
    )
    return WeekProfile(da, id_, dev, resolved, da_mean, fingerprint, label=spec.mode)


__all__ = [
    "DEFAULT_TAIL",
    "WEEKDAYS",
    "WeekProfile",
    "average_da_week",
    "beta_week",
    "build_week_scenario",
    "gamma_week",
    "id_deviation_week",
]
