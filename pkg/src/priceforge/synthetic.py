"""Deterministic synthetic price years for tests and demos.

A year is a base day shape tiled over the calendar, shifted by a per-weekday
offset, stretched by a per-day factor and perturbed by low-discrepancy
(Halton) noise, so no random seed is involved. Intraday prices are the DA
price of the enclosing hour plus two harmonics, an offset and their own noise.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from datetime import date, timedelta
from typing import Optional, Tuple

import numpy as np
from scipy.stats import qmc

from .errors import BadSpec
from .ingest import PriceSeries


def double_peak_day(level=100.0, morning=30.0, evening=40.0, midday_dip=20.0) -> Tuple[float, ...]:
    """24 hourly prices with a morning and an evening peak and a solar dip."""
    h = np.arange(24, dtype=float)
    shape = (
        level
        + morning * np.exp(-0.5 * ((h - 8.0) / 1.5) ** 2)
        + evening * np.exp(-0.5 * ((h - 19.0) / 2.0) ** 2)
        - midday_dip * np.exp(-0.5 * ((h - 13.0) / 2.0) ** 2)
    )
    return tuple(float(v) for v in shape)


@dataclass(frozen=True)
class YearSpec:
    start: str = "2023-01-01"
    days: int = 365
    base_day: Tuple[float, ...] = field(default_factory=double_peak_day)
    weekly_offset: Tuple[float, ...] = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)  # Monday first
    day_scale: float = 0.0  # per-day stretch of the shape around its mean, +-fraction
    day_shift: float = 0.0  # per-day shift of the shape in time, +-hours
    da_noise: float = 0.0  # half-width of hourly DA noise, EUR/MWh
    id_harmonics: Tuple[float, float] = (0.0, 0.0)  # amplitudes at 0.5 and 1 cycles per hour
    id_offset: float = 0.0
    id_noise: float = 0.0

    def __post_init__(self):
        try:
            date.fromisoformat(self.start)
        except (TypeError, ValueError) as exc:
            raise BadSpec(f"start must be an ISO date, got {self.start!r}") from exc
        object.__setattr__(self, "base_day", tuple(float(v) for v in self.base_day))
        object.__setattr__(self, "weekly_offset", tuple(float(v) for v in self.weekly_offset))
        object.__setattr__(self, "id_harmonics", tuple(float(v) for v in self.id_harmonics))
        if not isinstance(self.days, int) or self.days < 1:
            raise BadSpec("days must be a positive integer")
        if len(self.base_day) != 24:
            raise BadSpec(f"base_day needs 24 hourly values, got {len(self.base_day)}")
        if len(self.weekly_offset) != 7:
            raise BadSpec("weekly_offset needs 7 values (Monday first)")
        if len(self.id_harmonics) != 2:
            raise BadSpec("id_harmonics needs two amplitudes")
        values = self.base_day + self.weekly_offset + self.id_harmonics
        values += (self.day_scale, self.day_shift, self.da_noise, self.id_offset, self.id_noise)
        if not all(np.isfinite(values)):
            raise BadSpec("all spec values must be finite")
        if min(self.da_noise, self.id_noise, self.day_scale, self.day_shift) < 0:
            raise BadSpec("noise amplitudes, day_scale and day_shift must be non-negative")
        if self.day_scale >= 1:
            raise BadSpec("day_scale must be below 1")

    @property
    def start_date(self) -> date:
        return date.fromisoformat(self.start)

    @classmethod
    def from_json(cls, text: str) -> "YearSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise BadSpec(f"spec is not valid JSON: {exc}") from exc
        if isinstance(data, str):
            return preset(data)
        if not isinstance(data, dict):
            raise BadSpec("spec must be a JSON object or a preset name")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise BadSpec(f"unknown spec key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise BadSpec(str(exc)) from exc

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


PRESETS = {
    # the documented regression fixture
    "synth2023": YearSpec(
        weekly_offset=(0.0, 0.0, 0.0, 0.0, -3.0, -15.0, -25.0),
        day_scale=0.5,
        day_shift=2.0,
        da_noise=8.0,
        id_harmonics=(6.0, 4.0),
        id_offset=1.5,
        id_noise=15.0,
    ),
    # tiled day with mild bounded noise, for scenario generalisation checks
    "tiled": YearSpec(da_noise=3.0, id_harmonics=(3.0, 2.0), id_noise=3.0),
    # identical days, no noise
    "flat-noise-free": YearSpec(),
}


def preset(name: str) -> YearSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise BadSpec(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _halton(n: int, dims: int) -> np.ndarray:
    """``n`` unscrambled Halton points mapped to [-1, 1), reordered in time.

    Consecutive Halton points cycle through their base (period 2, 3, 5, ...),
    which would show up as spectral lines; visiting them in golden-ratio
    order removes that without any seed.
    """
    # skip the origin so the sequence does not start on the lower bound
    seq = qmc.Halton(d=dims, scramble=False)
    seq.fast_forward(1)
    points = seq.random(n)
    order = np.argsort((np.arange(n) * GOLDEN) % 1.0, kind="stable")
    return 2.0 * points[order] - 1.0


def gen_synthetic(spec: YearSpec) -> PriceSeries:
    start = spec.start_date
    n = spec.days
    base = np.asarray(spec.base_day)
    weekday = np.array([(start + timedelta(days=d)).weekday() for d in range(n)])

    day_noise = _halton(n, 2)
    stretch = 1.0 + spec.day_scale * day_noise[:, 0]
    shift = spec.day_shift * day_noise[:, 1]
    hours = np.arange(24, dtype=float)
    wrapped = np.concatenate([base, base[:1]])
    # periodic linear interpolation of the base day at shifted hours
    shapes = np.vstack([np.interp((hours - sh) % 24.0, np.arange(25.0), wrapped) for sh in shift])
    centre = base.mean()
    da = centre + stretch[:, None] * (shapes - centre)
    da = da + np.asarray(spec.weekly_offset)[weekday][:, None]
    hour_noise = _halton(24 * n, 2)
    da = da.reshape(-1) + spec.da_noise * hour_noise[:, 0]

    quarters = np.arange(96 * n)
    t_h = quarters / 4.0 + 0.125  # interval midpoints in hours
    harm = spec.id_harmonics[0] * np.sin(np.pi * t_h) + spec.id_harmonics[1] * np.sin(2 * np.pi * t_h)
    id_noise = _halton(96 * n, 3)[:, 2]
    id_ = np.repeat(da, 4) + harm + spec.id_offset + spec.id_noise * id_noise
    return PriceSeries(start, da, id_)


def ground_truth(spec: YearSpec) -> dict:
    """Noise-free expectations: the averaged DA day if noise and stretch vanish."""
    start = spec.start_date
    offsets = np.asarray(spec.weekly_offset)
    mean_offset = float(np.mean([offsets[(start + timedelta(days=d)).weekday()] for d in range(spec.days)]))
    base = np.asarray(spec.base_day)
    return {
        "base_day": [float(v) for v in base],
        "mean_weekly_offset": mean_offset,
        "expected_da_average": [float(v) for v in base + mean_offset],
        "exact": spec.da_noise == 0 and spec.day_scale == 0 and spec.day_shift == 0,
    }


def synth_from_arg(arg: Optional[str]) -> YearSpec:
    """A preset name, a JSON file path, or None for ``synth2023``."""
    if arg is None:
        return preset("synth2023")
    if arg in PRESETS:
        return PRESETS[arg]
    try:
        with open(arg, encoding="utf-8") as fh:
            return YearSpec.from_json(fh.read())
    except OSError as exc:
        raise BadSpec(f"cannot read year spec {arg!r}: {exc.strerror}") from exc
