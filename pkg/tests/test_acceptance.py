"""Acceptance criteria A1-A9 at their stated tolerances and runtime budgets."""

import time

import pytest

from redrough import checks, scenarios

pytestmark = pytest.mark.acceptance

# first-run results, reused by the determinism check
FIRST: dict[str, str] = {}


def timed(name):
    t0 = time.perf_counter()
    res = scenarios.run_scenario(name, seed=0, threads=1)
    elapsed = time.perf_counter() - t0
    FIRST[name] = scenarios.dumps(res)
    return res, elapsed


def test_a1_chen(record):
    res, dt = timed("A1")
    ok = res["passed"] and res["max_defect"] <= 1e-10 and dt < 10
    record("A1", ok, f"max chen defect {res['max_defect']:.2e} (<= 1e-10) over "
           f"{sum(c['triples'] for c in res['cells'])} triples, {dt:.1f}s (< 10s)")
    assert res["max_defect"] <= 1e-10
    assert all(c["triples"] >= 900 for c in res["cells"]) and len(res["cells"]) == 9
    assert dt < 10


def test_a2_exact_integral(record):
    res, dt = timed("A2")
    ok = res["passed"] and dt < 1
    record("A2", ok, f"max error {res['max_error']:.1e} (<= 1e-14), {dt:.2f}s (< 1s)")
    assert {r["N"] for r in res["rows"]} == {2, 16, 1024}
    assert res["max_error"] <= 1e-14
    assert dt < 1


def test_a3_sewing_rate(record):
    res, dt = timed("A3")
    ok = res["passed"] and dt < 30
    record("A3", ok, f"slope {res['slope']:.2f} (>= 1.15) over {res['scales']} scales, "
           f"{res['violations']} violations in {res['pairs']} pairs, {dt:.1f}s (< 30s)")
    assert res["scales"] >= 6
    assert res["slope"] >= 3 * 0.45 - 0.2
    assert res["violations"] == 0
    assert dt < 30


def test_a4_ode_oracle(record):
    res, dt = timed("A4")
    ok = res["passed"] and dt < 30
    record("A4", ok, f"exp error {res['exp_error']:.1e} (<= 1e-6), sin error {res['sin_error']:.1e} "
           f"(<= 1e-5), {dt:.1f}s (< 30s each)")
    assert res["exp_error"] <= 1e-6
    assert res["sin_error"] <= 1e-5
    assert dt < 30


def test_a5_lift_sensitivity(record):
    res, dt = timed("A5")
    ok = res["passed"] and dt < 60
    record("A5", ok, f"Stratonovich error {res['stratonovich_error']:.1e}, Ito error {res['ito_error']:.1e} "
           f"(<= 1e-2), gap at T {res['gap_at_T']:.3f} (> 0.1), {dt:.1f}s (< 60s)")
    assert res["stratonovich_error"] <= 1e-2 and res["ito_error"] <= 1e-2
    assert res["gap_at_T"] > 0.1
    assert dt < 60


def test_a6_contraction(record):
    res, dt = timed("A6")
    worst = max(res["max_final_ratio"].values())
    dist = max(u["distance"] / u["limit"] for u in res["uniqueness"].values())
    ok = res["passed"] and dt < 60
    record("A6", ok, f"max final ratio {worst:.3f} (<= 0.5), worst uniqueness distance {dist:.2e} "
           f"of the 10x tol limit, {dt:.1f}s (< 60s)")
    assert worst <= 0.5
    assert all(u["ok"] for u in res["uniqueness"].values())
    assert dt < 60


def test_a7_bounds(record):
    res, dt = timed("A7")
    ok = res["passed"] and dt < 120
    record("A7", ok, f"{res['triples']} triples, violations {res['violations']}, {dt:.1f}s (< 120s)")
    assert res["triples"] >= 100
    assert sum(res["violations"].values()) == 0
    assert dt < 120


def test_a8_fbm_stats(record):
    res, dt = timed("A8")
    worst = max(max(v["rel_err"]) for v in res["hurst"].values())
    ok = res["passed"] and dt < 60
    record("A8", ok, f"max relative variance error {worst:.3%} (<= 5%) at 10^4 seeds, {dt:.1f}s (< 60s)")
    assert res["samples"] == 10_000
    assert worst <= 0.05
    assert dt < 60


def test_a9_determinism(record):
    c1 = scenarios.dumps(checks.run_checks(0, 1))
    c2 = scenarios.dumps(checks.run_checks(0, 1))
    c4 = scenarios.dumps(checks.run_checks(0, 4))
    diffs = []
    if not (c1 == c2 == c4):
        diffs.append("check")
    for name in sorted(scenarios.SCENARIOS):
        first = FIRST.get(name) or scenarios.dumps(scenarios.run_scenario(name, 0, 1))
        again = scenarios.dumps(scenarios.run_scenario(name, 0, 1))
        four = scenarios.dumps(scenarios.run_scenario(name, 0, 4))
        if not (first == again == four):
            diffs.append(name)
    record("A9", not diffs, "check and A1-A8 byte-identical across two runs and threads {1, 4}"
           if not diffs else f"outputs differ for {diffs}")
    assert not diffs
