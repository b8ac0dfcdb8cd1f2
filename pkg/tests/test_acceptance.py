"""End-to-end checks of the package's headline behaviours.

Each test covers one user-visible capability and finishes with a single
PASS line (run with ``-v`` to see one line per capability even when
output capture is on). Tolerances and time budgets are asserted, not
just eyeballed.
"""

import heapq
import json
import math
import random
import time
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from faasplan import (
    DEFAULT_VM_BASELINE,
    GB,
    MB,
    BenchRun,
    BenchTarget,
    DeploymentPackage,
    LatencyProfile,
    ModelArtifact,
    PricingModel,
    RuntimeLibrary,
    SimulationConfig,
    StubServer,
    TrafficPattern,
    VmBaseline,
    breakeven,
    build_cost_report,
    fit_matrix,
    load_catalog,
    load_pricing,
    load_provider_limits,
    quantile,
    run_bench,
    select_model,
    serverless_cost,
    simulate,
    summarize,
)
from faasplan.catalog import SelectionConstraints
from faasplan.cost import render_cost_table
from faasplan.packaging import DEFAULT_CODE_BYTES

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

ONNX_RT = RuntimeLibrary(name="onnxruntime", size_bytes=14 * MB,
                         model_formats=frozenset({"onnx"}))


def scenario(name):
    return json.loads((SCENARIOS / name).read_text())


def profile_from(block):
    return LatencyProfile.from_quantile_anchors(
        block["quantile_anchors"], block["n_samples"],
        block["reference_memory_mb"] * MB,
    )


def test_reference_workload_cost_report():
    """1M requests x 100 ms x 1 GB priced, rendered and compared to the VM."""
    t0 = time.perf_counter()
    pricing = load_pricing()["aws"]
    report = build_cost_report(1_000_000, 100, GB, pricing)
    table = render_cost_table(report)
    elapsed = time.perf_counter() - t0
    assert report.serverless_total == Decimal("1.86667")
    assert Decimal("1.50") <= report.serverless_total <= Decimal("2.50")
    assert "1.8667" in table
    assert "8.00" in table
    assert elapsed < 1.0, f"cost report took {elapsed:.3f}s"
    print(f"PASS reference cost: serverless 1.86667 vs vm 8.00 in {elapsed * 1000:.1f} ms")


def test_package_fit_matrix_is_exact():
    """Stock models fall on the expected sides of the aws and gcp caps."""
    providers = load_provider_limits()
    aws, gcp = providers["aws"], providers["gcp"]
    expected = {
        "TinyBERT": (56, True, True),
        "MobileBERT": (98, True, True),
        "BERT_BASE_CLS": (420, False, True),
    }
    for name, (size_mb, on_aws, on_gcp) in expected.items():
        model = ModelArtifact(name=name, size_bytes=size_mb * MB, format="onnx")
        package = DeploymentPackage(DEFAULT_CODE_BYTES, ONNX_RT, model)
        rows = {r.provider: r for r in fit_matrix(package, [aws, gcp])}
        assert rows["aws"].passed is on_aws, name
        assert rows["gcp"].passed is on_gcp, name
        if not on_aws:
            assert rows["aws"].headroom_bytes < 0
    print("PASS fit matrix: TinyBERT aws+gcp, MobileBERT aws+gcp, BERT_BASE_CLS gcp only")


def test_model_selection_trio():
    """Selection picks the documented winner in all three stock settings."""
    sentiment = load_catalog("sentiment")
    sts = load_catalog("sts")

    def pick(models, budget_mb, metric):
        return select_model(models, SelectionConstraints(
            max_package_bytes=budget_mb * MB, code_bytes=1 * MB,
            runtime=ONNX_RT, objective_metric=metric,
        ))

    a = pick(sentiment, 250, "f1_macro")
    b = pick(sentiment, 90, "f1_macro")
    c = pick(sts, 250, "spearman_target")
    assert a.name == "MobileBERT" and a.score("f1_macro") == 0.84
    assert b.name == "TinyBERT" and b.score("f1_macro") == 0.82
    assert c.name == "AugSMobileBERT_target" and c.score("spearman_target") == 61.75
    print("PASS selection: MobileBERT@250MB, TinyBERT@90MB, AugSMobileBERT_target@250MB")


def test_replay_reproduces_measured_quantiles():
    """Simulated load at the profiled rate hits the source quantiles within 10%."""
    doc = scenario("smobilebert_replay.json")
    anchors = doc["profile"]["quantile_anchors"]
    assert anchors == {"0.5": 50.08, "0.95": 80.14, "0.99": 102.65}
    profile = profile_from(doc["profile"])
    traffic = TrafficPattern.steady(doc["traffic"]["rate_rps"], doc["traffic"]["duration_s"])
    config = SimulationConfig(
        seed=doc["simulation"]["seed"],
        memory_bytes=doc["simulation"]["memory_mb"] * MB,
        keep_alive_s=math.inf,
        cold_start_ms=doc["simulation"]["cold_start_ms"],
    )
    pricing = load_pricing()["aws"]

    t0 = time.perf_counter()
    result = simulate(profile, traffic, config, pricing)
    elapsed = time.perf_counter() - t0
    assert len(result.records) == 5000
    s = result.latency_summary
    drifts = {}
    for q_text, anchor in anchors.items():
        got = {"0.5": s.q50, "0.95": s.q95, "0.99": s.q99}[q_text]
        drift = abs(got - anchor) / anchor
        drifts[q_text] = drift
        assert drift <= 0.10, f"q{q_text}: {got} vs {anchor} ({drift:.1%})"
    assert elapsed < 5.0, f"replay took {elapsed:.3f}s"
    again = simulate(profile, traffic, config, pricing)
    assert again == result
    drift_text = " ".join(f"q{q}={d:.2%}" for q, d in sorted(drifts.items()))
    print(f"PASS replay: 5000 requests, {drift_text}, {elapsed * 1000:.0f} ms, deterministic")


def test_memory_sweep_monotone_until_saturation():
    """More memory never slows the q50 down, and stops helping once CPU saturates."""
    doc = scenario("memory_sweep.json")
    profile = profile_from(doc["profile"])
    traffic = TrafficPattern.steady(doc["traffic"]["rate_rps"], doc["traffic"]["duration_s"])
    pricing = load_pricing()["aws"]
    summaries = {}
    for memory_mb in doc["memory_sweep_mb"]:
        config = SimulationConfig(
            seed=doc["simulation"]["seed"],
            memory_bytes=memory_mb * MB,
            keep_alive_s=doc["simulation"]["keep_alive_s"],
            cold_start_ms=doc["simulation"]["cold_start_ms"],
        )
        summaries[memory_mb] = simulate(profile, traffic, config, pricing).latency_summary
    q50s = [summaries[m].q50 for m in doc["memory_sweep_mb"]]
    assert q50s == sorted(q50s, reverse=True), q50s
    # below the 1769 MB full-CPU grant, each doubling strictly helps
    assert summaries[256].q50 > summaries[512].q50 > summaries[1024].q50
    # past saturation the whole distribution is identical, not just q50
    assert summaries[2048] == summaries[4096]
    print(f"PASS memory sweep: q50 {q50s} monotone, 2048 MB == 4096 MB")


def test_quantiles_match_counting_oracle_at_scale():
    """Nearest-rank quantiles agree with an independent k-smallest oracle."""
    rng = random.Random(20260814)
    checked = 0
    for _ in range(1000):
        n = rng.randint(1, 10_000)
        values = [rng.uniform(0.0, 10_000.0) for _ in range(n)]
        if rng.random() < 0.25:
            values = [round(v, 2) for v in values]
        q = rng.choice([0.5, 0.9, 0.95, 0.99, 0.999, rng.random() or 0.5])
        frac = Fraction(q).limit_denominator(10**6)
        rank = min(max(-(-(frac.numerator * n) // frac.denominator), 1), n)
        expected = heapq.nsmallest(rank, values)[-1]
        assert quantile(values, q) == expected, (n, q)
        checked += 1
    assert checked == 1000
    print("PASS quantiles: 1000 random sample sets up to n=10000, all exact")


def test_simulation_hand_trace_and_conservation():
    """A worked 10-request trace comes out exactly, and nothing is lost."""
    pricing = PricingModel(per_million_requests="0.20",
                           per_gb_second="0.0000166667", billing_granularity_ms=1)
    profile = LatencyProfile.constant(100.0, GB)
    pattern = TrafficPattern.trace([i * 1000.0 for i in range(10)])
    config = SimulationConfig(seed=0, memory_bytes=GB,
                              keep_alive_s=math.inf, cold_start_ms=500.0)
    result = simulate(profile, pattern, config, pricing)
    assert sorted(result.latencies_ms) == [100.0] * 9 + [600.0]
    assert result.cold_fraction == 0.1
    assert result.total_billed_gb_s == 1.0
    assert len(result.records) == 10
    for r in result.records:
        assert r.arrival_ms <= r.start_ms <= r.end_ms
        assert r.end_ms - r.start_ms == r.exec_ms + (500.0 if r.cold else 0.0)

    # stochastic arrivals: every arrival becomes a record, reruns are identical
    noisy = TrafficPattern.poisson(80, 20)
    cfg = SimulationConfig(seed=99, memory_bytes=GB, keep_alive_s=2.0, cold_start_ms=300.0)
    first = simulate(profile, noisy, cfg, pricing)
    second = simulate(profile, noisy, cfg, pricing)
    assert first == second
    assert len(first.records) > 0
    assert all(r.arrival_ms <= r.start_ms <= r.end_ms for r in first.records)
    print("PASS simulation: worked trace {600, 100x9} exact, billed 1.0 GB-s, reruns identical")


def test_breakeven_boundary():
    """The break-even count is the first one at or past the VM price."""
    pricing = load_pricing()["aws"]
    n = breakeven(pricing, DEFAULT_VM_BASELINE, 100, GB)
    assert n == 4_285_707
    vm = DEFAULT_VM_BASELINE.monthly_price
    assert serverless_cost(n - 1, 100, GB, pricing) < vm
    assert serverless_cost(n, 100, GB, pricing) >= vm
    # same property holds away from the defaults
    other = breakeven(pricing, VmBaseline(40, GB), 900, 2 * GB)
    assert serverless_cost(other - 1, 900, 2 * GB, pricing) < Decimal(40)
    assert serverless_cost(other, 900, 2 * GB, pricing) >= Decimal(40)
    print(f"PASS break-even: {n} requests/month, boundary cost(n-1) < 8 <= cost(n)")


def test_open_loop_bench_against_stub():
    """A 10 s offline bench keeps the send schedule and accounts every attempt."""
    t0 = time.perf_counter()
    with StubServer(delay_ms=50.0) as stub:
        run = BenchRun(
            target=BenchTarget(url=stub.url, payload=b"{}"),
            pattern=TrafficPattern.steady(20, 10),
            n_warmup=10,
        )
        result = run_bench(run)
    elapsed = time.perf_counter() - t0

    assert result.attempts == 200
    assert result.errors == {}
    assert len(result.samples) + result.warmup_excluded + result.error_total == result.attempts
    assert result.warmup_excluded == 10
    s = summarize(result.samples)
    assert 50.0 <= s.q50 <= 65.0, f"q50 {s.q50}"
    assert result.max_schedule_error_ms <= 5.0, f"worst send {result.max_schedule_error_ms:.3f} ms"
    assert all(sent >= planned for planned, sent in zip(result.scheduled_ms, result.sent_ms))
    assert 9.5 <= elapsed <= 15.0, f"run took {elapsed:.1f}s"
    print(
        f"PASS bench: 200 sends in {elapsed:.1f}s, q50 {s.q50:.2f} ms, "
        f"worst schedule error {result.max_schedule_error_ms:.3f} ms"
    )
