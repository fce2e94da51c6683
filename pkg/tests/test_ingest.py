import io
import json
from datetime import date, datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from priceforge.errors import GapError, MalformedRow, MisalignedSeries, NoFullWeek
from priceforge.ingest import (
    PriceSeries,
    parse_price_csv,
    read_price_files,
    slice_days,
    slice_weeks,
    write_price_csv,
)


def _csv(start: datetime, values, step_minutes, skip=(), extra=()):
    lines = ["timestamp,price_eur_mwh"]
    for k, v in enumerate(values):
        ts = start + timedelta(minutes=step_minutes * k)
        if ts in skip:
            continue
        lines.append(f"{ts.strftime('%Y-%m-%dT%H:%M')},{v}")
    lines.extend(extra)
    return "\n".join(lines) + "\n"


def _pair(start: date, days: int, tz="UTC", **kw):
    t0 = datetime.combine(start, datetime.min.time())
    da = np.arange(24 * days, dtype=float)
    id_ = np.arange(96 * days, dtype=float) / 4
    return _csv(t0, da, 60), _csv(t0, id_, 15), da, id_


def test_full_year_counts(monkeypatch):
    monkeypatch.delenv("PRICEFORGE_TZ", raising=False)
    da_txt, id_txt, _, _ = _pair(date(2023, 1, 1), 365)
    s = parse_price_csv(io.StringIO(da_txt), io.StringIO(id_txt), timezone="UTC")
    assert (s.n_days, s.da.size, s.id.size) == (365, 8760, 35040)


def _berlin_day_csv(day: date, hourly_value, quarter_value):
    """Real local clock readings for one Berlin day (23 or 25 hours)."""
    from zoneinfo import ZoneInfo

    tz = ZoneInfo("Europe/Berlin")
    utc = ZoneInfo("UTC")
    start = datetime.combine(day, datetime.min.time(), tz).astimezone(utc)
    end = datetime.combine(day + timedelta(days=1), datetime.min.time(), tz).astimezone(utc)
    da, id_ = ["timestamp,price_eur_mwh"], ["timestamp,price_eur_mwh"]
    t = start
    while t < end:
        local = t.astimezone(tz).replace(tzinfo=None)
        if local.minute == 0:
            da.append(f"{local.strftime('%Y-%m-%dT%H:%M')},{hourly_value(t)}")
        id_.append(f"{local.strftime('%Y-%m-%dT%H:%M')},{quarter_value(t)}")
        t += timedelta(minutes=15)
    return da, id_


def _join(parts):
    header = parts[0][0]
    body = [line for p in parts for line in p[1:]]
    return "\n".join([header] + body) + "\n"


def test_spring_forward_hour_is_interpolated(monkeypatch):
    monkeypatch.delenv("PRICEFORGE_TZ", raising=False)
    # price = local hour index of the day so interpolation is checkable
    days = [date(2023, 3, 25), date(2023, 3, 26)]
    da_parts, id_parts = [], []
    for d in days:
        from zoneinfo import ZoneInfo

        tz = ZoneInfo("Europe/Berlin")
        hv = lambda t: t.astimezone(tz).hour * 10.0
        qv = lambda t: t.astimezone(tz).hour * 10.0 + t.astimezone(tz).minute / 15
        a, b = _berlin_day_csv(d, hv, qv)
        da_parts.append(a)
        id_parts.append(b)
    s = parse_price_csv(io.StringIO(_join(da_parts)), io.StringIO(_join(id_parts)))
    assert s.n_days == 2
    day2 = slice_days(s)[1]
    assert day2.da[2] == pytest.approx(20.0)  # between 10 (01:00) and 30 (03:00)
    assert day2.da[1] == 10.0 and day2.da[3] == 30.0
    assert any("02:00" in x for x in s.calendar.dst_filled)
    assert len(day2.id) == 96


def test_fall_back_hour_is_averaged(monkeypatch):
    monkeypatch.delenv("PRICEFORGE_TZ", raising=False)
    from zoneinfo import ZoneInfo

    utc = ZoneInfo("UTC")
    # price = UTC hour, so the two 02:00 local readings are 0 and 1 UTC
    hv = lambda t: float(t.astimezone(utc).hour)
    qv = lambda t: float(t.astimezone(utc).hour)
    da, id_ = _berlin_day_csv(date(2023, 10, 29), hv, qv)
    s = parse_price_csv(io.StringIO(_join([da])), io.StringIO(_join([id_])))
    assert s.n_days == 1
    assert s.da[2] == pytest.approx(0.5)
    assert s.da[3] == 2.0
    assert s.calendar.dst_merged


def test_single_missing_quarter_raises_gap(monkeypatch):
    monkeypatch.delenv("PRICEFORGE_TZ", raising=False)
    t0 = datetime(2023, 6, 14)
    hole = datetime(2023, 6, 15, 13, 45)
    da = _csv(t0, np.ones(48), 60)
    id_ = _csv(t0, np.ones(192), 15, skip={hole})
    with pytest.raises(GapError) as exc:
        parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC")
    assert "2023-06-15T13:45" in str(exc.value)
    assert exc.value.missing == ["2023-06-15T13:45:00"]


def test_short_gap_filled_on_request():
    t0 = datetime(2023, 6, 14)
    da = _csv(t0, np.ones(48), 60)
    vals = np.arange(192, dtype=float)
    id_ = _csv(t0, vals, 15, skip={datetime(2023, 6, 15, 13, 45), datetime(2023, 6, 15, 14, 0)})
    s = parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC", fill_gaps=True)
    np.testing.assert_allclose(s.id, vals)
    assert len(s.calendar.gap_filled) == 2


def test_long_gap_still_fails_with_fill():
    t0 = datetime(2023, 6, 14)
    skip = {datetime(2023, 6, 14, 10) + timedelta(minutes=15 * k) for k in range(3)}
    da = _csv(t0, np.ones(24), 60)
    id_ = _csv(t0, np.ones(96), 15, skip=skip)
    with pytest.raises(GapError):
        parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC", fill_gaps=True)


def test_malformed_row_reports_line():
    t0 = datetime(2023, 6, 14)
    da = _csv(t0, np.ones(24), 60, extra=["2023-06-15T00:00,abc"])
    id_ = _csv(t0, np.ones(96), 15)
    with pytest.raises(MalformedRow) as exc:
        parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC")
    assert exc.value.line_no == 26


def test_bad_header():
    with pytest.raises(MalformedRow):
        parse_price_csv(io.StringIO("time,price\n"), io.StringIO("timestamp,price_eur_mwh\n"), timezone="UTC")


def test_misaligned_series():
    t0 = datetime(2023, 6, 14)
    da = _csv(t0, np.ones(48), 60)
    id_ = _csv(t0, np.ones(96), 15)
    with pytest.raises(MisalignedSeries):
        parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC")


def test_partial_edge_day_dropped():
    t0 = datetime(2023, 6, 14, 12)
    da = _csv(t0, np.ones(36), 60)
    id_ = _csv(t0, np.ones(144), 15)
    s = parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC")
    assert s.start_date == date(2023, 6, 15) and s.n_days == 1
    assert s.calendar.dropped_days == ["2023-06-14"]


def test_crlf_and_offsets():
    da = "timestamp,price_eur_mwh\r\n" + "".join(
        f"2023-06-14T{h:02d}:00+00:00,{h}\r\n" for h in range(24)
    )
    id_ = "timestamp,price_eur_mwh\r\n" + "".join(
        f"2023-06-14T{q // 4:02d}:{15 * (q % 4):02d}Z,{q}\r\n" for q in range(96)
    )
    s = parse_price_csv(io.StringIO(da), io.StringIO(id_), timezone="UTC")
    assert s.da[5] == 5.0 and s.id[95] == 95.0


def test_env_overrides_manifest(tmp_path, monkeypatch):
    da_txt, id_txt, _, _ = _pair(date(2023, 6, 1), 2)
    (tmp_path / "da.csv").write_text(da_txt)
    (tmp_path / "id.csv").write_text(id_txt)
    (tmp_path / "da.json").write_text(json.dumps({"market": "DA", "year": 2023, "timezone": "UTC"}))
    monkeypatch.delenv("PRICEFORGE_TZ", raising=False)
    assert read_price_files(tmp_path / "da.csv", tmp_path / "id.csv").calendar.timezone == "UTC"
    monkeypatch.setenv("PRICEFORGE_TZ", "Asia/Tokyo")
    assert read_price_files(tmp_path / "da.csv", tmp_path / "id.csv").calendar.timezone == "Asia/Tokyo"


def test_slice_days_partition_and_weekday():
    s = PriceSeries(date(2023, 1, 1), np.arange(48.0), np.arange(192.0))
    days = slice_days(s)
    assert len(days) == 2
    assert days[0].weekday == 6  # 2023-01-01 was a Sunday
    np.testing.assert_array_equal(np.concatenate([d.da for d in days]), s.da)
    np.testing.assert_array_equal(np.concatenate([d.id for d in days]), s.id)
    monday = PriceSeries(date(2023, 1, 2), np.zeros(24), np.zeros(96))
    assert slice_days(monday)[0].weekday == 0


def test_slice_weeks():
    year = PriceSeries(date(2023, 1, 1), np.zeros(24 * 365), np.zeros(96 * 365))
    weeks = slice_weeks(year)
    assert len(weeks) == 52
    assert weeks[0].start_date == date(2023, 1, 2)
    for w in weeks:
        idx = [d.day_index for d in w.days]
        assert idx == list(range(idx[0], idx[0] + 7)) and w.days[0].weekday == 0
    one = PriceSeries(date(2023, 1, 2), np.zeros(24 * 7), np.zeros(96 * 7))
    assert len(slice_weeks(one)) == 1
    with pytest.raises(NoFullWeek):
        slice_weeks(PriceSeries(date(2023, 1, 2), np.zeros(24 * 6), np.zeros(96 * 6)))


def test_series_rejects_non_finite():
    with pytest.raises(ValueError):
        PriceSeries(date(2023, 1, 1), np.full(24, np.nan), np.zeros(96))


prices = st.floats(-500, 4000, allow_nan=False, allow_infinity=False)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.data())
def test_round_trip(n_days, data):
    da = data.draw(hnp.arrays(float, 24 * n_days, elements=prices))
    id_ = data.draw(hnp.arrays(float, 96 * n_days, elements=prices))
    s = PriceSeries(date(2023, 7, 3), da, id_)
    da_txt, id_txt = write_price_csv(s, decimals=None)
    back = parse_price_csv(io.StringIO(da_txt), io.StringIO(id_txt), timezone="UTC")
    assert back == s
    assert back.fingerprint() == s.fingerprint()
    assert hash(back) == hash(s)


def test_signed_zero_is_normalised():
    a = PriceSeries(date(2023, 1, 2), np.full(24, -0.0), np.zeros(96))
    b = PriceSeries(date(2023, 1, 2), np.zeros(24), np.zeros(96))
    assert a == b and hash(a) == hash(b) and a.fingerprint() == b.fingerprint()
