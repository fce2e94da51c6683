"""Command-line front end.

    priceforge ingest | profile (day|week) | stats | match | cluster |
               schedule | benchmark | synth

Exit codes: 0 success, 1 usage error, 2 data or solver error. Nothing here
takes a seed; identical inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import __version__
from .clustering import ALGORITHMS, CRITERIA, cluster, cluster_scenarios, elbow_k, extract_features, wcss_curve
from .errors import PriceForgeError
from .ingest import manifest_json, read_price_files, slice_days, slice_weeks, write_price_csv
from .matching import MATCH_HEADER, SCOPES, best_fit_day, best_fit_week
from .profile_day import DEFAULT_TAIL, MODES, ScalingSpec, build_day_scenario, profile_stats
from .profile_week import build_week_scenario
from .scheduling import SETUP_LABELS, SETUPS, PlantParams, Scenario, benchmark, schedule
from .stats import dominant_frequencies, scott_histogram, summarize
from .synthetic import gen_synthetic, ground_truth, synth_from_arg

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
DEFAULT_K_MAX = 10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# argument parsing


def _k_value(text: str):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected an integer or 'auto'") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k must be at least 1")
    return k


def _add_inputs(p):
    p.add_argument("--da", required=True, help="hourly day-ahead CSV (timestamp,price_eur_mwh)")
    p.add_argument("--id", required=True, help="quarter-hourly intraday CSV")
    p.add_argument("--fill-gaps", action="store_true", help="interpolate gaps of up to two intervals")


def _add_output(p, plot=True):
    p.add_argument("--out", help="output directory (default: print the main table)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if plot:
        p.add_argument("--plot", action="store_true", help="also render PNG figures into --out")


def _add_scaling(p):
    p.add_argument("--mode", choices=MODES, default="nominal")
    p.add_argument("--beta", type=float, help="DA scaling factor (manual mode)")
    p.add_argument("--gamma", type=float, help="ID deviation scaling factor (manual mode)")
    p.add_argument(
        "--tail",
        type=float,
        help=f"upper-tail fraction for extreme mode (default {DEFAULT_TAIL}); "
        "for weeks a smaller fraction is often more representative, since the most "
        "volatile weeks rarely follow the nominal pattern",
    )


def _add_plant(p):
    p.add_argument("--setup", choices=SETUPS, default="i")
    p.add_argument("--plant", help="plant parameter JSON (defaults built in)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="priceforge", description="Representative electricity price scenarios.")
    parser.add_argument("--version", action="version", version=f"priceforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="validate and normalise a DA/ID pair")
    _add_inputs(p)
    _add_output(p, plot=False)

    p = sub.add_parser("profile", help="build a representative day or week")
    p.add_argument("horizon", choices=("day", "week"))
    _add_inputs(p)
    _add_scaling(p)
    _add_output(p)

    p = sub.add_parser("stats", help="summary statistics, histograms and spectral peaks")
    _add_inputs(p)
    _add_output(p)

    p = sub.add_parser("match", help="historical day or week closest to a profile")
    p.add_argument("horizon", nargs="?", choices=("day", "week"), default="day")
    _add_inputs(p)
    _add_scaling(p)
    p.add_argument("--scope", choices=SCOPES, default="joint")
    _add_output(p, plot=False)

    p = sub.add_parser("cluster", help="clustering baseline scenarios")
    _add_inputs(p)
    p.add_argument("--criterion", choices=CRITERIA, default="a")
    p.add_argument("--algo", choices=ALGORITHMS, default="kmeans")
    p.add_argument("--k", type=_k_value, default="auto", help="cluster count or 'auto' (elbow)")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    _add_output(p)

    p = sub.add_parser("schedule", help="schedule the plant on the input prices or a scenario")
    _add_inputs(p)
    _add_plant(p)
    p.add_argument("--scenario", help="schedule a scenario instead of the whole input (see benchmark)")
    _add_scaling(p)
    p.add_argument("--k", type=_k_value, default="auto")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    _add_output(p)

    p = sub.add_parser("benchmark", help="weighted daily cost of scenarios against the full year")
    _add_inputs(p)
    _add_plant(p)
    p.add_argument(
        "--scenarios",
        default="unscaled,nominal",
        help="comma list of: fullyear, unscaled, nominal, extreme, manual, week-<mode>, "
        "<algo>:<criterion>[:k] with algo in kmeans, kmedoids, hier-m, hier-c",
    )
    _add_scaling(p)
    p.add_argument("--k", type=_k_value, default="auto", help="default k for clustering scenarios")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    _add_output(p)

    p = sub.add_parser("synth", help="write a deterministic synthetic price year")
    p.add_argument("--spec", help="preset name (synth2023, tiled, flat-noise-free) or JSON file")
    p.add_argument("--out", required=True)
    return parser


# --------------------------------------------------------------------------
# helpers


class _Outputs:
    """Collects artifacts, then writes them (or prints the main table)."""

    def __init__(self, args):
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.format = getattr(args, "format", "csv")
        self.files: Dict[str, str] = {}
        self.main: Optional[str] = None
        self.figures = []
        self.meta: dict = {}

    def table(self, stem: str, csv_text: str, main: bool = False):
        if self.format == "json":
            name, text = f"{stem}.json", _dump({**self.meta, "rows": _csv_records(csv_text)})
        else:
            name, text = f"{stem}.csv", csv_text
        self.files[name] = text
        if main:
            self.main = text

    def json(self, name: str, payload: dict):
        self.files[name] = _dump(payload)

    def figure(self, name: str, draw):
        self.figures.append((name, draw))

    def flush(self):
        if self.out is None:
            if self.main is not None:
                sys.stdout.write(self.main)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            with open(self.out / name, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.files[name])
        for name, draw in self.figures:
            draw(self.out / name)


def _dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _number(text: str):
    try:
        v = float(text)
    except ValueError:
        return text
    return int(v) if text.lstrip("-").isdigit() else v


def _csv_records(text: str) -> List[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return [{k: _number(v) for k, v in row.items()} for row in reader]


def _input_hash(args) -> str:
    h = hashlib.sha256()
    for path in (args.da, args.id):
        h.update(Path(path).read_bytes())
    return h.hexdigest()


def _load(args, out: "_Outputs"):
    series = read_price_files(args.da, args.id, fill_gaps=args.fill_gaps)
    out.meta = {"input_sha256": _input_hash(args), "series_fingerprint": series.fingerprint()}
    return series, dict(out.meta)


def _scaling(args) -> ScalingSpec:
    if args.mode == "manual":
        if args.beta is None or args.gamma is None:
            raise UsageError("manual mode needs --beta and --gamma")
        return ScalingSpec.manual(args.beta, args.gamma)
    if args.beta is not None or args.gamma is not None:
        raise UsageError("--beta/--gamma only apply to manual mode")
    if args.mode == "extreme":
        return ScalingSpec.extreme(DEFAULT_TAIL if args.tail is None else args.tail)
    if args.tail is not None:
        raise UsageError("--tail only applies to extreme mode")
    return ScalingSpec.nominal() if args.mode == "nominal" else ScalingSpec.unscaled()


def _plant(args) -> PlantParams:
    if not args.plant:
        return PlantParams()
    try:
        text = Path(args.plant).read_text(encoding="utf-8")
    except OSError as exc:
        raise PriceForgeError(f"cannot read plant file: {exc.strerror}") from exc
    try:
        return PlantParams.from_json(text)
    except (ValueError, TypeError) as exc:
        raise PriceForgeError(f"bad plant file: {exc}") from exc


def _check_plot(args):
    if getattr(args, "plot", False) and not args.out:
        raise UsageError("--plot needs --out")


def _profile(args, series, horizon: str, spec: ScalingSpec, fingerprint: str):
    if horizon == "week":
        return build_week_scenario(slice_weeks(series), spec, fingerprint)
    return build_day_scenario(slice_days(series), spec, fingerprint=fingerprint)


def _stats_row(name: str, s) -> str:
    return f"{name},{s.min:.6f},{s.max:.6f},{s.mean:.6f},{s.std:.6f},{s.integral:.6f}"


STATS_HEADER = "series,min,max,mean,std,integral"


# --------------------------------------------------------------------------
# commands


def cmd_ingest(args, out: _Outputs):
    series, meta = _load(args, out)
    da_text, id_text = write_price_csv(series, decimals=None)
    out.files["da.csv"] = da_text
    out.files["id.csv"] = id_text
    report = {
        **meta,
        "start": series.start_date.isoformat(),
        "end": series.end_date.isoformat(),
        "days": series.n_days,
        "calendar": series.calendar.to_dict() if series.calendar else None,
    }
    out.json("calendar.json", report)
    out.main = _dump(report)


def cmd_profile(args, out: _Outputs):
    spec = _scaling(args)
    series, meta = _load(args, out)
    prof = _profile(args, series, args.horizon, spec, meta["series_fingerprint"])
    if spec.mode == "extreme":
        note = " (default)" if args.tail is None else ""
        print(f"tail fraction: {spec.tail:g}{note}", file=sys.stderr)
    print(f"beta = {prof.beta:.6f}, gamma = {prof.gamma:.6f}", file=sys.stderr)
    da_stats, id_stats = profile_stats(prof)
    table = "\n".join([STATS_HEADER, _stats_row("da", da_stats), _stats_row("id", id_stats)]) + "\n"
    out.table("profile_da", prof.da_csv())
    out.table("profile_id", prof.id_csv())
    out.table("profile_stats", table, main=True)
    out.json("profile.json", prof.bundle(meta))
    if args.plot:
        from .plotting import plot_profile

        out.figure("profile.png", lambda p: plot_profile(prof, p))


def cmd_stats(args, out: _Outputs):
    series, meta = _load(args, out)
    da_s, id_s = summarize(series.da, 1.0), summarize(series.id, 0.25)
    table = "\n".join([STATS_HEADER, _stats_row("da", da_s), _stats_row("id", id_s)]) + "\n"
    out.table("stats", table, main=True)
    hists = {"da": scott_histogram(series.da), "id": scott_histogram(series.id)}
    for name, hist in hists.items():
        out.table(f"histogram_{name}", hist.to_csv())
    lines = ["series,frequency_per_h,period_h,power"]
    for name, values, dt in (("da", series.da, 1.0), ("id", series.id, 0.25)):
        for f, power in dominant_frequencies(values, dt):
            lines.append(f"{name},{f:.8f},{1.0 / f:.6f},{power:.6f}")
    out.table("frequencies", "\n".join(lines) + "\n")
    out.json("stats_meta.json", {**meta, "days": series.n_days})
    if args.plot:
        from .plotting import plot_histogram

        for name, hist in hists.items():
            out.figure(f"histogram_{name}.png", lambda p, h=hist, n=name: plot_histogram(h, p, f"{n.upper()} prices"))


def cmd_match(args, out: _Outputs):
    spec = _scaling(args)
    series, meta = _load(args, out)
    prof = _profile(args, series, args.horizon, spec, meta["series_fingerprint"])
    if args.horizon == "week":
        result = best_fit_week(slice_weeks(series), prof, args.scope)
    else:
        result = best_fit_day(slice_days(series), prof, args.scope)
    out.table("match", f"{MATCH_HEADER}\n{result.csv_row()}\n", main=True)
    out.json("match_meta.json", {**meta, "scope": args.scope, "scaling": prof.scaling.to_dict()})


def _clusters(series, algo: str, criterion: str, k, k_max: int):
    days = slice_days(series)
    feats = extract_features(days, criterion)
    curve = None
    if k == "auto":
        k = elbow_k(feats, algo, k_max)
        curve = wcss_curve(feats, algo, min(k_max, feats.n))
    return days, cluster(feats, algo, k), curve


def cmd_cluster(args, out: _Outputs):
    series, meta = _load(args, out)
    days, cs, curve = _clusters(series, args.algo, args.criterion, args.k, args.k_max)
    out.table("assignment", cs.assignment_csv(days), main=True)
    out.table("weights", cs.weights_csv())
    for s, (prof, weight) in enumerate(cluster_scenarios(cs, days), start=1):
        extra = {**meta, "cluster": s, "weight": weight, "representative": cs.representative}
        out.json(f"cluster_{s}.json", prof.bundle(extra))
    summary = {**meta, "algorithm": cs.algorithm, "criterion": args.criterion, "k": cs.k, "wcss": cs.wcss}
    if curve is not None:
        summary["elbow_curve"] = curve
    out.json("cluster_meta.json", summary)
    if args.plot and curve is not None:
        from .plotting import plot_elbow

        out.figure("elbow.png", lambda p: plot_elbow(curve, cs.k, p))


def _scenario(token: str, series, args) -> Scenario:
    token = token.strip()
    if token == "fullyear":
        return Scenario.full_year(series)
    if ":" in token:
        parts = token.split(":")
        if len(parts) not in (2, 3) or parts[0] not in ALGORITHMS or parts[1] not in CRITERIA:
            raise UsageError(f"bad clustering scenario {token!r}; use <algo>:<criterion>[:k]")
        k = args.k
        if len(parts) == 3:
            try:
                k = _k_value(parts[2])
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"bad k in {token!r}: {exc}") from None
        days, cs, _ = _clusters(series, parts[0], parts[1], k, args.k_max)
        gen = f"{parts[0]} ({parts[1]}) {cs.representative}"
        return Scenario.from_weighted(cluster_scenarios(cs, days), token, gen)
    horizon, mode = "day", token
    if token.startswith("week-"):
        horizon, mode = "week", token[5:]
    if mode not in MODES:
        raise UsageError(f"unknown scenario {token!r}")
    if mode == "manual":
        if args.beta is None or args.gamma is None:
            raise UsageError("manual scenario needs --beta and --gamma")
        spec = ScalingSpec.manual(args.beta, args.gamma)
    elif mode == "extreme":
        spec = ScalingSpec.extreme(DEFAULT_TAIL if args.tail is None else args.tail)
    else:
        spec = ScalingSpec.nominal() if mode == "nominal" else ScalingSpec.unscaled()
    prof = _profile(args, series, horizon, spec, "")
    return Scenario.from_profile(prof, token)


def cmd_schedule(args, out: _Outputs):
    params = _plant(args)
    series, meta = _load(args, out)
    if args.scenario:
        sc = _scenario(args.scenario, series, args)
        if len(sc.members) != 1:
            raise UsageError("schedule --scenario takes a single-profile scenario; use benchmark for clusters")
        da, id_, _ = sc.members[0]
    else:
        da, id_ = series.da, series.id
    res = schedule(da, None if args.setup == "i" else id_, params, args.setup)
    out.table("schedule", res.to_csv(), main=True)
    lines = ["day,cost_eur"] + [f"{d + 1},{c:.6f}" for d, c in enumerate(res.daily_cost)]
    out.table("daily_cost", "\n".join(lines) + "\n")
    out.json(
        "schedule_meta.json",
        {
            **meta,
            "setup": args.setup,
            "setup_label": SETUP_LABELS[args.setup],
            "scenario": args.scenario or "input",
            "objective_eur": res.objective,
            "mean_daily_cost_eur": res.mean_daily_cost,
            "plant": json.loads(params.to_json()),
        },
    )
    if args.plot:
        from .plotting import plot_schedule

        out.figure("schedule.png", lambda p: plot_schedule(res, da, p))


def cmd_benchmark(args, out: _Outputs):
    params = _plant(args)
    series, meta = _load(args, out)
    tokens = [t for t in args.scenarios.split(",") if t.strip()]
    if not tokens:
        raise UsageError("--scenarios is empty")
    scenarios = [_scenario(t, series, args) for t in tokens]
    report = benchmark(series, scenarios, params, args.setup)
    out.table("benchmark", report.to_csv(), main=True)
    out.json("benchmark_meta.json", {**meta, **report.to_dict(), "plant": json.loads(params.to_json())})
    if args.plot:
        from .plotting import plot_benchmark

        out.figure("benchmark.png", lambda p: plot_benchmark(report, p))


def cmd_synth(args, out: _Outputs):
    spec = synth_from_arg(args.spec)
    spec_hash = hashlib.sha256(spec.to_json().encode()).hexdigest()
    series = gen_synthetic(spec)
    da_text, id_text = write_price_csv(series, decimals=None)
    out.files["da.csv"] = da_text
    out.files["id.csv"] = id_text
    # synthetic calendars have no daylight-saving shifts
    year = series.start_date.year
    for market in ("da", "id"):
        manifest = json.loads(manifest_json(market.upper(), year, "UTC"))
        out.json(f"{market}.json", {**manifest, "spec_sha256": spec_hash})
    out.json("truth.json", {"spec": json.loads(spec.to_json()), "spec_sha256": spec_hash, **ground_truth(spec)})


COMMANDS = {
    "ingest": cmd_ingest,
    "profile": cmd_profile,
    "stats": cmd_stats,
    "match": cmd_match,
    "cluster": cmd_cluster,
    "schedule": cmd_schedule,
    "benchmark": cmd_benchmark,
    "synth": cmd_synth,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_plot(args)
        out = _Outputs(args)
        COMMANDS[args.command](args, out)
        out.flush()
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PriceForgeError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
