"""Replay a measured latency distribution through the simulator.

A warm deployment was summarized by three quantiles (q50/q95/q99). We
synthesize a 5000-sample profile that reproduces those quantiles
exactly, then push a steady 50 rps for 100 s through the simulated
instance pool and check how far resampling drifts from the source.
"""

from faasplan import (
    GB,
    LatencyProfile,
    SimulationConfig,
    TrafficPattern,
    load_pricing,
    simulate,
    summarize,
)

anchors = {0.5: 50.08, 0.95: 80.14, 0.99: 102.65}
profile = LatencyProfile.from_quantile_anchors(anchors, n_samples=5000, reference_memory_bytes=GB)
print("profile quantiles:", summarize(profile.samples))

pattern = TrafficPattern.steady(rate_rps=50, duration_s=100)
config = SimulationConfig(
    seed=20210,
    memory_bytes=GB,
    keep_alive_s=float("inf"),  # warm steady state: nothing expires
    cold_start_ms=0.0,
)
result = simulate(profile, pattern, config, load_pricing()["aws"])

s = result.latency_summary
print(f"\nsimulated {s.count} requests:")
for name, got, want in (("q50", s.q50, 50.08), ("q95", s.q95, 80.14), ("q99", s.q99, 102.65)):
    print(f"  {name}: {got:7.2f} ms  (source {want:7.2f} ms, drift {abs(got - want) / want:6.2%})")
print(f"  cold fraction: {result.cold_fraction:.4f}")
print(f"  billed: {result.total_billed_gb_s:.1f} GB-seconds")
