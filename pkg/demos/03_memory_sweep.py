"""How much does buying memory actually buy you?

Serverless platforms scale vCPU with memory, so the same model gets
faster as you pay for more RAM, until the grant saturates and the curve
goes flat. One seeded workload, five memory sizes.
"""

from faasplan import (
    GB,
    MB,
    CpuScaling,
    LatencyProfile,
    SimulationConfig,
    TrafficPattern,
    effective_cpu,
    load_pricing,
    simulate,
)

anchors = {0.5: 50.08, 0.95: 80.14, 0.99: 102.65}
profile = LatencyProfile.from_quantile_anchors(anchors, n_samples=2000, reference_memory_bytes=GB)
pattern = TrafficPattern.steady(rate_rps=2, duration_s=250)
pricing = load_pricing()["aws"]
scaling = CpuScaling()

print(f"{'memory':>8}  {'vCPU':>6}  {'q50 ms':>8}  {'q99 ms':>8}  {'GB-s':>8}")
for memory_mb in (256, 512, 1024, 2048, 4096):
    config = SimulationConfig(
        seed=7,
        memory_bytes=memory_mb * MB,
        keep_alive_s=600.0,
        cold_start_ms=0.0,
        scaling=scaling,
    )
    result = simulate(profile, pattern, config, pricing)
    s = result.latency_summary
    cpu = effective_cpu(memory_mb * MB, scaling)
    print(f"{memory_mb:>5} MB  {cpu:>6.3f}  {s.q50:>8.2f}  {s.q99:>8.2f}  {result.total_billed_gb_s:>8.2f}")

print("\nPast the saturation point the latency column stops moving, but the")
print("GB-seconds column keeps climbing: memory beyond ~1.7 GB is pure cost.")
