"""Representative day-ahead and intraday electricity price scenarios."""

__version__ = "0.1.0"

from .clustering import ClusterSet, FeatureMatrix, cluster, cluster_scenarios, elbow_k, extract_features
from .errors import PriceForgeError
from .ingest import CalendarReport, DayRecord, PriceSeries, WeekRecord, parse_price_csv, read_price_files
from .lp import LpProblem, LpSolution, LpStatus, solve_lp
from .matching import MatchResult, best_fit_day, best_fit_week
from .profile_day import DayProfile, ScalingSpec, build_day_scenario
from .profile_week import WeekProfile, build_week_scenario
from .scheduling import PlantParams, Scenario, ScheduleResult, benchmark, schedule, wdc
from .synthetic import YearSpec, gen_synthetic

__all__ = [
    "CalendarReport",
    "ClusterSet",
    "DayProfile",
    "DayRecord",
    "FeatureMatrix",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MatchResult",
    "PlantParams",
    "PriceForgeError",
    "PriceSeries",
    "ScalingSpec",
    "Scenario",
    "ScheduleResult",
    "WeekProfile",
    "WeekRecord",
    "YearSpec",
    "benchmark",
    "best_fit_day",
    "best_fit_week",
    "build_day_scenario",
    "build_week_scenario",
    "cluster",
    "cluster_scenarios",
    "elbow_k",
    "extract_features",
    "gen_synthetic",
    "parse_price_csv",
    "read_price_files",
    "schedule",
    "solve_lp",
    "wdc",
]
