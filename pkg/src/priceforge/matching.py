"""Best-fit historical day or week for a constructed profile.

The fit objective is the summed absolute DA deviation plus one quarter of the
summed absolute ID deviation, so each hour weighs the same in both markets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import EmptyInput
from .ingest import DayRecord, WeekRecord
from .profile_day import DayProfile

SCOPES = ("joint", "da", "id")


@dataclass(frozen=True)
class MatchResult:
    index: int
    total_mad: float
    da_mad: float
    id_mad: float
    date: object = None
    scope: str = "joint"

    @property
    def objective(self) -> float:
        """The minimised quantity for this result's scope."""
        return {"joint": self.total_mad, "da": self.da_mad, "id": self.id_mad}[self.scope]

    def csv_row(self) -> str:
        when = self.date.isoformat() if self.date is not None else ""
        return f"{self.index},{when},{self.total_mad:.6f},{self.da_mad:.6f},{self.id_mad:.6f}"


MATCH_HEADER = "index,date,total_mad,da_mad,id_mad"


def mad_terms(da_rows: np.ndarray, id_rows: np.ndarray, profile: DayProfile):
    """Per-candidate DA and (quarter-weighted) ID absolute deviations."""
    da_mad = np.sum(np.abs(da_rows - profile.da), axis=1)
    id_mad = 0.25 * np.sum(np.abs(id_rows - profile.id), axis=1)
    return da_mad, id_mad


def _best(indices: List[int], dates, da_mad, id_mad, scope: str) -> MatchResult:
    if scope not in SCOPES:
        raise ValueError(f"scope must be one of {SCOPES}")
    if scope == "joint":
        objective = da_mad + id_mad
    elif scope == "da":
        objective = da_mad
    else:
        objective = id_mad
    k = int(np.argmin(objective))  # first minimum = smallest index
    return MatchResult(
        indices[k], float(da_mad[k] + id_mad[k]), float(da_mad[k]), float(id_mad[k]), dates[k], scope
    )


def best_fit_day(days: Sequence[DayRecord], profile: DayProfile, scope: str = "joint") -> MatchResult:
    """Historical day closest to ``profile`` under ``scope`` ("joint", "da" or "id")."""
    days = list(days)
    if not days:
        raise EmptyInput("no candidate days")
    da_rows = np.vstack([d.da for d in days])
    id_rows = np.vstack([d.id for d in days])
    da_mad, id_mad = mad_terms(da_rows, id_rows, profile)
    return _best([d.day_index for d in days], [d.date for d in days], da_mad, id_mad, scope)


def best_fit_week(weeks: Sequence[WeekRecord], profile: DayProfile, scope: str = "joint") -> MatchResult:
    weeks = list(weeks)
    if not weeks:
        raise EmptyInput("no candidate weeks")
    da_rows = np.vstack([w.da for w in weeks])
    id_rows = np.vstack([w.id for w in weeks])
    da_mad, id_mad = mad_terms(da_rows, id_rows, profile)
    return _best([w.week_index for w in weeks], [w.start_date for w in weeks], da_mad, id_mad, scope)
