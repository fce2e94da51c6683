import numpy as np
import pytest

from priceforge.ingest import DayRecord, PriceSeries, WeekRecord, slice_days, slice_weeks
from priceforge.synthetic import gen_synthetic, preset


def toy_day(da, id_=None, index=1, weekday=0):
    da = np.asarray(da, dtype=float)
    if id_ is None:
        id_ = np.repeat(da, 4)
    return DayRecord(index, weekday, da, np.asarray(id_, dtype=float))


def toy_days(rows, id_rows=None):
    id_rows = id_rows if id_rows is not None else [None] * len(rows)
    return [toy_day(r, i, index=k + 1, weekday=k % 7) for k, (r, i) in enumerate(zip(rows, id_rows))]


def toy_weeks(day_rows, id_rows=None):
    days = toy_days(day_rows, id_rows)
    days = [DayRecord(d.day_index, (d.day_index - 1) % 7, d.da, d.id) for d in days]
    return [WeekRecord(w + 1, tuple(days[7 * w : 7 * w + 7])) for w in range(len(days) // 7)]


@pytest.fixture(scope="session")
def synth2023() -> PriceSeries:
    return gen_synthetic(preset("synth2023"))


@pytest.fixture(scope="session")
def synth_days(synth2023):
    return slice_days(synth2023)


@pytest.fixture(scope="session")
def synth_weeks(synth2023):
    return slice_weeks(synth2023)


@pytest.fixture(scope="session")
def tiled_year() -> PriceSeries:
    return gen_synthetic(preset("tiled"))


def pytest_terminal_summary(terminalreporter):
    # one verdict line per acceptance criterion, in criterion order
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        verdict, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {verdict} - {detail}")
