"""Acceptance criteria, one test per criterion.

Each test records a PASS / FAIL / SKIPPED verdict with the measured values;
the verdicts are printed as a block at the end of the pytest run. Run this
file directly to execute only the acceptance checks.
"""

import dataclasses
import os
import time

import numpy as np
import pytest

from priceforge.cli import run
from priceforge.clustering import ALGORITHMS, CRITERIA, cluster, cluster_scenarios, elbow_k, extract_features
from priceforge.ingest import read_price_files, slice_days, slice_weeks
from priceforge.lp import LpProblem, solve_lp
from priceforge.profile_day import (
    ScalingSpec,
    average_da_day,
    beta_nominal_day,
    build_day_scenario,
    expand_hours,
    gamma_for_target_std,
    profile_stats,
    zero_mean_correct,
)
from priceforge.profile_week import average_da_week, build_week_scenario
from priceforge.scheduling import PlantParams, Scenario, schedule, scenario_wdc
from priceforge.stats import percentile, pstd
from priceforge.synthetic import gen_synthetic, preset

from conftest import toy_days
from test_lp import o_vertex_min
from test_scheduling import TOY, o_grid_dp

RESULTS = {}
CHAIN_SLACK = 1e-7  # relative, for floating-point noise only


def _record(n, ok, detail):
    verdict = "PASS" if ok else "FAIL"
    RESULTS[n] = (verdict, detail)
    print(f"criterion {n}: {verdict} - {detail}")
    assert ok, detail


# --- 1: reproduction on licensed market data --------------------------------

DAY_TARGETS = {"beta": (1.47, 0.01), "gamma": (1.91, 0.02), "da_mean": (95.18, 0.02),
               "da_std": (28.22, 0.02), "id_std": (40.31, 0.02), "integral": (2284.21, 0.5)}
WEEK_TARGETS = {"beta": (1.58, 0.01), "gamma": (1.60, 0.02), "da_mean": (95.40, 0.02),
                "da_std": (38.59, 0.02), "id_std": (47.02, 0.02), "integral": (16026.52, 2.0)}


def _pipeline_values(build, records):
    t0 = time.perf_counter()
    p = build(records, ScalingSpec.nominal())
    da_s, id_s = profile_stats(p)
    elapsed = time.perf_counter() - t0
    values = {"beta": p.beta, "gamma": p.gamma, "da_mean": da_s.mean, "da_std": da_s.std,
              "id_std": id_s.std, "integral": da_s.integral}
    return values, elapsed, abs(da_s.integral - id_s.integral)


def test_criterion_1_market_data_reproduction():
    da_path, id_path = os.environ.get("PRICEFORGE_EPEX_DA"), os.environ.get("PRICEFORGE_EPEX_ID")
    if not (da_path and id_path and os.path.exists(da_path) and os.path.exists(id_path)):
        RESULTS[1] = ("SKIPPED", "licensed DA/ID files not provided (PRICEFORGE_EPEX_DA / PRICEFORGE_EPEX_ID)")
        pytest.skip(RESULTS[1][1])
    series = read_price_files(da_path, id_path)
    misses = []
    timings = []
    for label, build, records, targets in (
        ("day", build_day_scenario, slice_days(series), DAY_TARGETS),
        ("week", build_week_scenario, slice_weeks(series), WEEK_TARGETS),
    ):
        values, elapsed, gap = _pipeline_values(build, records)
        timings.append(f"{label} {elapsed:.2f}s")
        for key, (want, tol) in targets.items():
            if abs(values[key] - want) > tol:
                misses.append(f"{label} {key} {values[key]:.4f} vs {want}")
        if elapsed >= 2.0:
            misses.append(f"{label} runtime {elapsed:.2f}s")
        if gap > targets["integral"][1]:
            misses.append(f"{label} DA/ID integral gap {gap:.3g}")
    _record(1, not misses, "; ".join(misses) or "all day/week values in tolerance, " + ", ".join(timings))


# --- 2: invariant suite on synth2023 ----------------------------------------


def test_criterion_2_invariants(synth_days, synth_weeks):
    t0 = time.perf_counter()
    worst = {"mean": 0.0, "std": 0.0, "gamma": 0.0, "closure": 0.0, "integral": 0.0}
    specs = [ScalingSpec.unscaled(), ScalingSpec.nominal(), ScalingSpec.extreme(), ScalingSpec.manual(1.3, 0.8)]
    for horizon, records, build, average in (
        ("day", synth_days, build_day_scenario, average_da_day),
        ("week", synth_weeks, build_week_scenario, average_da_week),
    ):
        avg = average(records)
        da_rows = np.vstack([r.da for r in records])
        id_rows = np.vstack([r.id for r in records])
        for spec in specs:
            p = build(records, spec)
            worst["mean"] = max(worst["mean"], abs(np.mean(p.da) - np.mean(avg)) / abs(np.mean(avg)))
            worst["std"] = max(worst["std"], abs(pstd(p.da) - p.beta * pstd(avg)) / (p.beta * pstd(avg)))
            if spec.mode in ("nominal", "extreme"):
                stds = pstd(id_rows, axis=1)
                target = np.mean(stds) if spec.mode == "nominal" else percentile(stds, spec.tail)
                a = expand_hours(p.da - np.mean(p.da))
                lhs = np.sqrt(np.mean((a + p.gamma * p.deviation) ** 2))
                worst["gamma"] = max(worst["gamma"], abs(lhs - target) / target)
            blocks = p.deviation.reshape(7, -1) if horizon == "week" else p.deviation.reshape(1, -1)
            worst["closure"] = max(worst["closure"], float(np.max(np.abs(blocks.sum(axis=1)))))
            da_s, id_s = profile_stats(p)
            worst["integral"] = max(worst["integral"], abs(da_s.integral - id_s.integral))
    elapsed = time.perf_counter() - t0
    ok = (
        worst["mean"] <= 1e-12
        and worst["std"] <= 1e-12
        and worst["gamma"] <= 1e-10
        and worst["closure"] <= 1e-9
        and worst["integral"] <= 1e-9
        and elapsed < 5.0
    )
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + f", {elapsed:.2f}s"
    _record(2, ok, detail)


# --- 3: toy fixtures ---------------------------------------------------------


def test_criterion_3_toy_fixtures():
    days = toy_days([[0, 0, 10, 10], [0, 10, 10, 20]])
    checks = {}
    checks["average"] = float(np.max(np.abs(average_da_day(days) - [0, 5, 10, 15])))
    checks["beta"] = abs(beta_nominal_day(days) - 1.0797)
    checks["correction"] = float(np.max(np.abs(zero_mean_correct([3, -1, 2, 0]) - [2, -2, 1, -1])))
    a = np.array([3.0, 3.0, -3.0, -3.0])
    d = np.array([1.0, -1.0, 1.0, -1.0])
    gamma = gamma_for_target_std(a, d, 3.2404)
    checks["gamma"] = abs(gamma - 1.2)
    bad = [k for k, v in checks.items() if v > 1e-4]
    detail = ", ".join(f"{k} err {v:.1e}" for k, v in checks.items())
    if bad:
        detail += f"; stated gamma fixture gives {gamma:.4f} (target 3.2404 is sqrt(9 + 1.2247^2))"
    _record(3, not bad, detail)


# --- 4: LP oracle ------------------------------------------------------------


def _lp_fixtures():
    rng = np.random.default_rng(20230101)
    out = [
        ([1.0], None, None, [[-1.0]], [-3.0], [0.0], [10.0]),
        ([-1.0, -1.0], None, None, [[1.0, 2.0], [3.0, 1.0]], [4.0, 6.0], [0.0, 0.0], [5.0, 5.0]),
        ([1.0, 1.0], [[1.0, 1.0]], [1.0], None, None, [0.0, 0.0], [1.0, 1.0]),
    ]
    for _ in range(40):
        n = int(rng.integers(2, 7))
        m_in = int(rng.integers(1, 4))
        m_eq = int(rng.integers(0, 2))
        lo = rng.integers(-3, 1, n).astype(float)
        out.append((
            rng.integers(-5, 6, n).astype(float),
            rng.integers(-5, 6, (m_eq, n)).astype(float),
            rng.integers(-3, 4, m_eq).astype(float),
            rng.integers(-5, 6, (m_in, n)).astype(float),
            rng.integers(0, 11, m_in).astype(float),
            lo,
            lo + rng.integers(0, 5, n),
        ))
    return out


def test_criterion_4_lp_oracle():
    worst = 0.0
    status_mismatch = 0
    solver_time = 0.0
    for c, A_eq, b_eq, A_in, b_in, lo, hi in _lp_fixtures():
        p = LpProblem(c, A_eq, b_eq, A_in, b_in, lo, hi)
        t0 = time.perf_counter()
        sol = solve_lp(p)
        solver_time += time.perf_counter() - t0
        n = len(c)
        oracle = o_vertex_min(
            np.asarray(c), np.zeros((0, n)) if A_eq is None else np.asarray(A_eq),
            np.zeros(0) if b_eq is None else np.asarray(b_eq),
            np.zeros((0, n)) if A_in is None else np.asarray(A_in),
            np.zeros(0) if b_in is None else np.asarray(b_in), np.asarray(lo), np.asarray(hi),
        )
        if oracle is None or not sol.optimal:
            status_mismatch += (oracle is None) == sol.optimal
            continue
        worst = max(worst, abs(sol.objective - oracle))
    t0 = time.perf_counter()
    toy = schedule([10.0, 50.0], None, TOY, "i", steps_per_day=8)
    solver_time += time.perf_counter() - t0
    toy_err = abs(toy.objective - o_grid_dp(np.repeat([10.0, 50.0], 4), None, TOY, "i"))
    buys_early = toy.p_da[:4].sum() >= toy.p_da[4:].sum()
    ok = worst <= 1e-6 and toy_err <= 1e-6 and status_mismatch == 0 and buys_early and solver_time < 10.0
    _record(4, ok, f"LP max err {worst:.1e}, status mismatches {status_mismatch}, "
                   f"toy err {toy_err:.1e}, buys early {buys_early}, solver time {solver_time:.2f}s")


# --- 5-6: benchmark on synth2023 -------------------------------------------


def _scenarios(series, days):
    out = [Scenario.full_year(series)]
    out.append(Scenario.from_profile(build_day_scenario(days, ScalingSpec.unscaled()), "Unscaled"))
    out.append(Scenario.from_profile(build_day_scenario(days, ScalingSpec.nominal()), "Nominal"))
    for crit in CRITERIA:
        fm = extract_features(days, crit)
        for algo in ALGORITHMS:
            k = elbow_k(fm, algo)
            cs = cluster(fm, algo, k)
            out.append(Scenario.from_weighted(cluster_scenarios(cs, days), f"{algo}:{crit}:{k}", f"{algo} {crit}"))
    return out


@pytest.fixture(scope="module")
def synth_wdc(synth2023, synth_days):
    scen = _scenarios(synth2023, synth_days)
    return {s.name: {setup: scenario_wdc(s, PlantParams(), setup) for setup in ("i", "ii", "iii")} for s in scen}


@pytest.mark.slow
def test_criterion_5_relaxation_chain(synth_wdc):
    bad = []
    for name, v in synth_wdc.items():
        slack = CHAIN_SLACK * abs(v["i"])
        if not (v["ii"] <= v["iii"] + slack and v["iii"] <= v["i"] + slack):
            bad.append(f"{name}: {v['ii']:.3f} / {v['iii']:.3f} / {v['i']:.3f}")
    full = synth_wdc["FullYear"]
    detail = (f"{len(synth_wdc)} scenarios; FullYear ii/iii/i = {full['ii']:.2f} <= "
              f"{full['iii']:.2f} <= {full['i']:.2f}")
    _record(5, not bad, detail if not bad else "violations: " + "; ".join(bad))


def test_criterion_6_single_cluster_identity(synth_days):
    unscaled = build_day_scenario(synth_days, ScalingSpec.unscaled())
    base = scenario_wdc(Scenario.from_profile(unscaled, "Unscaled"), PlantParams(), "i")
    problems = []
    rels = []
    for algo in ("kmeans", "hier-c"):
        for crit in CRITERIA:
            cs = cluster(extract_features(synth_days, crit), algo, 1)
            reps = cluster_scenarios(cs, synth_days)
            if not np.array_equal(reps[0][0].da, unscaled.da):
                problems.append(f"{algo}:{crit} DA profile differs")
            v = scenario_wdc(Scenario.from_weighted(reps, "k1", algo), PlantParams(), "i")
            rels.append(abs(v - base) / abs(base))
    ok = not problems and max(rels) <= 1e-9
    _record(6, ok, "; ".join(problems) or f"DA identical, max WDC rel diff {max(rels):.1e} (setup i)")


# --- 7: generalisation on a tiled year ---------------------------------------


@pytest.mark.slow
def test_criterion_7_generalisation(tiled_year):
    spec = preset("tiled")
    days = slice_days(tiled_year)
    price_std = float(pstd(tiled_year.da))
    noise_ratio = max(spec.da_noise, spec.id_noise) / price_std
    nominal = Scenario.from_profile(build_day_scenario(days, ScalingSpec.nominal()), "Nominal")
    full = Scenario.full_year(tiled_year)
    devs = {}
    for setup in ("i", "iii"):
        base = scenario_wdc(full, PlantParams(), setup)
        devs[setup] = 100.0 * (scenario_wdc(nominal, PlantParams(), setup) - base) / abs(base)
    ok = noise_ratio <= 0.2 and all(abs(v) <= 5.0 for v in devs.values())
    _record(7, ok, f"noise/std {noise_ratio:.3f}, dev i {devs['i']:+.4f} %, dev iii {devs['iii']:+.4f} %")


# --- 8: determinism ----------------------------------------------------------

CLI_COMMANDS = [
    ["ingest"],
    ["profile", "day", "--mode", "extreme", "--plot"],
    ["profile", "week", "--plot"],
    ["stats", "--plot"],
    ["match", "week"],
    ["cluster", "--criterion", "b", "--algo", "hier-m", "--plot"],
    ["schedule", "--setup", "ii", "--plot"],
    ["benchmark", "--setup", "iii", "--scenarios", "unscaled,nominal,kmedoids:c", "--plot"],
]


def test_criterion_8_determinism(tmp_path, synth_days):
    spec = dataclasses.replace(preset("synth2023"), days=35)
    (tmp_path / "spec.json").write_text(spec.to_json())
    differing = []
    for rep in ("a", "b"):
        assert run(["synth", "--spec", str(tmp_path / "spec.json"), "--out", str(tmp_path / f"synth-{rep}")]) == 0
    if _tree(tmp_path / "synth-a") != _tree(tmp_path / "synth-b"):
        differing.append("synth")
    args = ["--da", str(tmp_path / "synth-a" / "da.csv"), "--id", str(tmp_path / "synth-a" / "id.csv")]
    for k, cmd in enumerate(CLI_COMMANDS):
        outs = []
        for rep in ("a", "b"):
            d = tmp_path / f"{k}-{rep}"
            assert run(cmd + args + ["--out", str(d)]) == 0
            outs.append(_tree(d))
        if outs[0] != outs[1] or not outs[0]:
            differing.append(cmd[0])
    for crit in CRITERIA:
        fm = extract_features(synth_days, crit)
        for algo in ALGORITHMS:
            if not np.array_equal(cluster(fm, algo, 6).assignment, cluster(fm, algo, 6).assignment):
                differing.append(f"{algo}:{crit}")
    _record(8, not differing, "differing: " + ", ".join(differing) if differing else
            f"{len(CLI_COMMANDS) + 1} commands byte-identical, 12 clusterings identical (this platform)")


def _tree(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
