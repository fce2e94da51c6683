"""Flexible-load scheduling on day-ahead and intraday prices.

The plant is a generic flexible consumer: electrical power P (MW) drives a
production rate M = eta * P (t/h) into a product storage that serves a fixed
offtake. Storage returns to its initial level at the end of every day, so a
horizon of D days splits into D independent daily LPs.

Market setups:
    "i"   DA only; P_da may vary per quarter-hour.
    "ii"  DA and ID jointly (perfect ID foresight).
    "iii" two-stage: setup i first, then ID trading with P_da fixed.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import BadWeights, InfeasibleSchedule, MissingIdPrices
from .lp import LpProblem, LpStatus, check_solution, solve_lp

DT = 0.25  # hours per interval
QUARTERS_PER_DAY = 96
SETUPS = ("i", "ii", "iii")
SETUP_LABELS = {
    "i": "DA only",
    "ii": "DA+ID simultaneous (perfect ID foresight)",
    "iii": "two-stage DA then ID",
}


@dataclass(frozen=True)
class PlantParams:
    p_min: float = 3.0
    p_max: float = 10.0
    ramp: float = 1.0
    eta: float = 1.0
    storage_max: float = 14.0
    storage_init: float = 7.0
    demand_rate: float = 7.0
    da_buy_max: float = 10.0

    def __post_init__(self):
        if not 0 <= self.p_min <= self.p_max:
            raise InfeasibleSchedule("need 0 <= p_min <= p_max")
        if self.ramp <= 0:
            raise InfeasibleSchedule("ramp must be positive")
        if self.eta <= 0:
            raise InfeasibleSchedule("eta must be positive")
        if not 0 <= self.storage_init <= self.storage_max:
            raise InfeasibleSchedule("storage_init must lie in [0, storage_max]")
        steady = self.demand_rate / self.eta
        if not self.p_min <= steady <= self.p_max:
            raise InfeasibleSchedule(
                f"steady-state power {steady:g} MW outside [{self.p_min:g}, {self.p_max:g}]"
            )
        if steady > self.da_buy_max + 1e-12 and self.da_buy_max < self.p_min:
            raise InfeasibleSchedule("DA allowance below minimum power")

    @property
    def steady_power(self) -> float:
        return self.demand_rate / self.eta

    @classmethod
    def from_json(cls, text: str) -> "PlantParams":
        data = json.loads(text)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InfeasibleSchedule(f"unknown plant parameter(s): {', '.join(sorted(unknown))}")
        return cls(**{k: float(v) for k, v in data.items()})

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


@dataclass
class ScheduleResult:
    setup: str
    p_da: np.ndarray
    p_id: np.ndarray
    m: np.ndarray
    s: np.ndarray
    daily_cost: np.ndarray
    objective: float
    steps_per_day: int = QUARTERS_PER_DAY

    @property
    def mean_daily_cost(self) -> float:
        return float(np.mean(self.daily_cost))

    def to_csv(self) -> str:
        lines = ["t,p_da_mw,p_id_mw,m_tph,s_t"]
        for t in range(self.p_da.size):
            lines.append(
                f"{t + 1},{self.p_da[t]:.6f},{self.p_id[t]:.6f},{self.m[t]:.6f},{self.s[t]:.6f}"
            )
        return "\n".join(lines) + "\n"


@dataclass
class _DayLayout:
    """Column offsets of one daily LP."""

    T: int
    trade_id: bool
    p_da: slice = field(init=False)
    p_id: Optional[slice] = field(init=False)
    g: slice = field(init=False)
    s: slice = field(init=False)
    r: slice = field(init=False)
    n: int = field(init=False)

    def __post_init__(self):
        T = self.T
        pos = 0
        self.p_da = slice(pos, pos + T)
        pos += T
        if self.trade_id:
            self.p_id = slice(pos, pos + T)
            pos += T
            self.g = slice(pos, pos + T)
            pos += T
        else:
            self.p_id = None
            self.g = self.p_da
        self.s = slice(pos, pos + T)
        pos += T
        self.r = slice(pos, pos + T - 1)
        pos += T - 1
        self.n = pos


def build_day_problem(
    da_q: np.ndarray,
    id_q: Optional[np.ndarray],
    params: PlantParams,
    fixed_p_da: Optional[np.ndarray] = None,
    period: Optional[int] = None,
) -> Tuple[LpProblem, _DayLayout, float]:
    """LP over one or more storage periods; prices per interval (DA already expanded).

    Returns the problem, its column layout and a constant cost term not
    carried by the LP objective. With ``fixed_p_da`` (second stage of setup
    iii) the only decision is total power g, and P_id = g - P_da. Storage is
    pinned to its initial level at the end of every ``period`` intervals
    (default: the whole horizon) and ramps apply within a period.
    """
    T = da_q.size
    period = T if period is None else period
    if period <= 0 or T % period:
        raise ValueError(f"horizon {T} is not a multiple of period {period}")
    trade_id = id_q is not None and fixed_p_da is None
    lay = _DayLayout(T, trade_id)
    n = lay.n
    c = np.zeros(n)
    lower = np.zeros(n)
    upper = np.zeros(n)
    names = [""] * n
    constant = 0.0

    if fixed_p_da is not None:
        fixed_p_da = np.asarray(fixed_p_da, dtype=float)
        c[lay.g] = id_q * DT
        lower[lay.g] = np.maximum(params.p_min, fixed_p_da - params.p_max)
        upper[lay.g] = np.minimum(params.p_max, fixed_p_da + params.da_buy_max)
        constant = float(np.sum((da_q - id_q) * fixed_p_da) * DT)
    elif trade_id:
        c[lay.p_da] = da_q * DT
        upper[lay.p_da] = params.da_buy_max
        c[lay.p_id] = id_q * DT
        lower[lay.p_id] = -params.p_max
        upper[lay.p_id] = params.da_buy_max
        lower[lay.g] = params.p_min
        upper[lay.g] = params.p_max
    else:
        c[lay.p_da] = da_q * DT
        lower[lay.p_da] = max(params.p_min, 0.0)
        upper[lay.p_da] = min(params.p_max, params.da_buy_max)
    lower[lay.s] = 0.0
    upper[lay.s] = params.storage_max
    ends = lay.s.start + np.arange(period - 1, T, period)
    lower[ends] = upper[ends] = params.storage_init
    lower[lay.r] = -params.ramp
    upper[lay.r] = params.ramp
    # no ramp link across a period boundary
    cross = lay.r.start + np.arange(period, T, period) - 1
    lower[cross] = upper[cross] = 0.0

    g_name = "p_da" if lay.g == lay.p_da and fixed_p_da is None else "p_tot"
    for t in range(T):
        names[lay.g.start + t] = f"{g_name}_{t + 1}"
        names[lay.s.start + t] = f"s_{t + 1}"
        if trade_id:
            names[lay.p_da.start + t] = f"p_da_{t + 1}"
            names[lay.p_id.start + t] = f"p_id_{t + 1}"
        if t:
            names[lay.r.start + t - 1] = f"ramp_{t + 1}"

    rows = []
    rhs = []
    if trade_id:
        for t in range(T):
            row = np.zeros(n)
            row[lay.p_da.start + t] = 1.0
            row[lay.p_id.start + t] = 1.0
            row[lay.g.start + t] = -1.0
            rows.append(row)
            rhs.append(0.0)
    # storage in cumulative form keeps each s_t a singleton column
    for t in range(T):
        first = t - t % period
        row = np.zeros(n)
        row[lay.s.start + t] = 1.0
        row[lay.g.start + first : lay.g.start + t + 1] = -DT * params.eta
        rows.append(row)
        rhs.append(params.storage_init - DT * params.demand_rate * (t - first + 1))
    for t in range(1, T):
        if t % period == 0:
            continue
        row = np.zeros(n)
        row[lay.g.start + t] = 1.0
        row[lay.g.start + t - 1] = -1.0
        row[lay.r.start + t - 1] = -1.0
        rows.append(row)
        rhs.append(0.0)
    problem = LpProblem(c, np.array(rows), np.array(rhs), lower=lower, upper=upper, names=names)
    return problem, lay, constant


def _expand_da(da_hourly: np.ndarray) -> np.ndarray:
    return np.repeat(np.asarray(da_hourly, dtype=float), 4)


def _solve_day(da_q, id_q, params, setup, period=None):
    if setup == "i":
        prob, lay, _ = build_day_problem(da_q, None, params, period=period)
        # DA prices are flat within each hour, so cost-optimal plans are rarely
        # unique; prefer earlier purchases to make the plan (and hence the
        # second stage of setup iii) canonical
        local = np.arange(da_q.size) % (period or da_q.size) + 1
        early = np.zeros(prob.n_vars)
        early[lay.p_da] = np.sqrt(local)  # irrational steps avoid ties between plans
        sol = _require(solve_lp(prob, tie_break=early), prob)
        p_da = sol.x[lay.p_da]
        return p_da, np.zeros_like(p_da), sol.x[lay.s], sol.objective
    if setup == "ii":
        prob, lay, _ = build_day_problem(da_q, id_q, params, period=period)
        sol = _require(solve_lp(prob), prob)
        return sol.x[lay.p_da], sol.x[lay.p_id], sol.x[lay.s], sol.objective
    first, _, _, _ = _solve_day(da_q, None, params, "i", period)
    prob, lay, constant = build_day_problem(da_q, id_q, params, fixed_p_da=first, period=period)
    sol = _require(solve_lp(prob), prob)
    return first, sol.x[lay.g] - first, sol.x[lay.s], sol.objective + constant


def _require(sol, prob):
    if sol.status is not LpStatus.OPTIMAL:
        raise InfeasibleSchedule(f"daily LP is {sol.status.value}; check ramp and storage limits")
    report = check_solution(prob, sol.x)
    if not report.within(prob):
        raise InfeasibleSchedule(f"solver residuals too large: {report}")
    return sol


def _prices(da, id, setup: str, steps_per_day: int):
    if setup not in SETUPS:
        raise ValueError(f"setup must be one of {SETUPS}")
    da_q = _expand_da(da)
    T = da_q.size
    if steps_per_day % 4 or T % steps_per_day or T == 0:
        raise ValueError(f"horizon of {T} intervals is not a positive multiple of {steps_per_day}")
    id_q = None
    if setup != "i":
        if id is None:
            raise MissingIdPrices(f"setup {setup} needs intraday prices")
        id_q = np.asarray(id, dtype=float).reshape(-1)
        if id_q.size != T:
            raise ValueError(f"expected {T} intraday prices, got {id_q.size}")
    return da_q, id_q


def _day_job(args):
    return _solve_day(*args)


def schedule(
    da,
    id=None,
    params: PlantParams = PlantParams(),
    setup: str = "i",
    steps_per_day: int = QUARTERS_PER_DAY,
    workers: int = 1,
) -> ScheduleResult:
    """Schedule the plant over ``len(da) * 4`` quarter-hours, one LP per day.

    ``steps_per_day`` is the storage period; 96 for real data, smaller values
    are only meant for toy problems. With ``workers > 1`` days are solved in
    worker processes; results are assembled by day index either way.
    """
    da_q, id_q = _prices(da, id, setup, steps_per_day)
    T = da_q.size
    n_days = T // steps_per_day
    jobs = []
    for d in range(n_days):
        sl = slice(d * steps_per_day, (d + 1) * steps_per_day)
        jobs.append((da_q[sl], None if id_q is None else id_q[sl], params, setup))
    if workers > 1 and n_days > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(_day_job, jobs, chunksize=max(1, n_days // (4 * workers))))
    else:
        solved = [_day_job(j) for j in jobs]
    p_da = np.concatenate([r[0] for r in solved])
    p_id = np.concatenate([r[1] for r in solved])
    s = np.concatenate([r[2] for r in solved])
    costs = np.array([r[3] for r in solved], dtype=float)
    m = params.eta * (p_da + p_id)
    return ScheduleResult(setup, p_da, p_id, m, s, costs, float(np.sum(costs)), steps_per_day)


def schedule_joint(
    da,
    id=None,
    params: PlantParams = PlantParams(),
    setup: str = "i",
    steps_per_day: int = QUARTERS_PER_DAY,
) -> ScheduleResult:
    """Same problem as :func:`schedule` but as one LP over the whole horizon.

    Only practical for a few days; exists to check the daily decomposition.
    """
    da_q, id_q = _prices(da, id, setup, steps_per_day)
    p_da, p_id, s, obj = _solve_day(da_q, id_q, params, setup, period=steps_per_day)
    m = params.eta * (p_da + p_id)
    daily = np.full(da_q.size // steps_per_day, np.nan)
    return ScheduleResult(setup, p_da, p_id, m, s, daily, float(obj), steps_per_day)


def wdc(results: Sequence[Tuple[float, float]], tol: float = 1e-9) -> float:
    """Weighted daily cost from ``(average daily cost, weight)`` pairs."""
    if not results:
        raise BadWeights("no scenarios given")
    weights = np.array([w for _, w in results], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > tol:
        raise BadWeights(f"weights must be non-negative and sum to 1, got {weights.sum():.12g}")
    costs = np.array([c for c, _ in results], dtype=float)
    return float(np.sum(weights * costs))


@dataclass(frozen=True)
class Scenario:
    """A price scenario for benchmarking: weighted price blocks of whole days."""

    name: str
    generation: str
    members: Tuple[Tuple[np.ndarray, Optional[np.ndarray], float], ...]
    k: int

    @classmethod
    def full_year(cls, series, name: str = "FullYear") -> "Scenario":
        return cls(name, "full year", ((series.da, series.id, 1.0),), series.n_days)

    @classmethod
    def from_profile(cls, profile, name: str, generation: Optional[str] = None) -> "Scenario":
        gen = generation or f"{profile.horizon} {profile.scaling.mode}"
        return cls(name, gen, ((profile.da, profile.id, 1.0),), 1)

    @classmethod
    def from_weighted(cls, pairs, name: str, generation: str) -> "Scenario":
        """From ``(profile, weight)`` pairs, e.g. cluster representatives."""
        members = tuple((p.da, p.id, float(w)) for p, w in pairs)
        return cls(name, generation, members, len(members))


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: str
    generation: str
    k: int
    wdc_eur: float
    dev_percent: float

    def csv_row(self) -> str:
        return f"{self.scenario},{self.generation},{self.k},{self.wdc_eur:.6f},{self.dev_percent:.6f}"


@dataclass(frozen=True)
class BenchmarkReport:
    setup: str
    rows: Tuple[BenchmarkRow, ...]

    HEADER = "scenario,generation,k,wdc_eur,dev_percent"

    def to_csv(self) -> str:
        return "\n".join([self.HEADER] + [r.csv_row() for r in self.rows]) + "\n"

    def to_dict(self) -> dict:
        return {
            "setup": self.setup,
            "setup_label": SETUP_LABELS[self.setup],
            "rows": [asdict(r) for r in self.rows],
        }

    def wdc(self, scenario: str) -> float:
        for r in self.rows:
            if r.scenario == scenario:
                return r.wdc_eur
        raise KeyError(scenario)


def scenario_wdc(
    scenario: Scenario, params: PlantParams, setup: str, workers: int = 1
) -> float:
    parts = []
    for da, id_, weight in scenario.members:
        res = schedule(da, None if setup == "i" else id_, params, setup, workers=workers)
        parts.append((res.mean_daily_cost, weight))
    return wdc(parts)


def benchmark(
    series,
    scenarios: Sequence[Scenario],
    params: PlantParams = PlantParams(),
    setup: str = "i",
    workers: int = 1,
) -> BenchmarkReport:
    """WDC of every scenario and its percentage deviation from the full year.

    The first full-year scenario in ``scenarios`` is the baseline; if there is
    none, one is built from ``series``. The baseline row comes first.
    """
    scenarios = list(scenarios)
    base_idx = next((i for i, s in enumerate(scenarios) if s.generation == "full year"), None)
    if base_idx is None:
        scenarios.insert(0, Scenario.full_year(series))
    else:
        scenarios.insert(0, scenarios.pop(base_idx))
    values: List[float] = []
    cache = {}
    for sc in scenarios:
        key = tuple((id(da), id(i_), w) for da, i_, w in sc.members)
        if key not in cache:
            cache[key] = scenario_wdc(sc, params, setup, workers)
        values.append(cache[key])
    base = values[0]
    rows = tuple(
        BenchmarkRow(sc.name, sc.generation, sc.k, v, 100.0 * (v - base) / abs(base) if base else 0.0)
        for sc, v in zip(scenarios, values)
    )
    return BenchmarkReport(setup, rows)
