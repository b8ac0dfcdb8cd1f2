"""Open-loop load generation, demonstrated fully offline.

The harness fires requests on a fixed schedule no matter how slow the
responses are, so server-side queueing cannot hide from the
measurements. Here the endpoint is the built-in stub responder with a
45 ms delay, which makes the whole demo self-contained.
"""

from faasplan import BenchRun, BenchTarget, StubServer, TrafficPattern, run_bench, summarize

with StubServer(delay_ms=45.0, jitter_ms=5.0) as stub:
    print(f"stub responder at {stub.url}")
    target = BenchTarget(url=stub.url, payload=b'{"text": "quick round trip"}')
    run = BenchRun(
        target=target,
        pattern=TrafficPattern.steady(rate_rps=20, duration_s=5),
        n_warmup=10,
    )
    result = run_bench(run)

print(f"\nattempts        {result.attempts}")
print(f"warmup excluded {result.warmup_excluded}")
print(f"errors          {dict(result.errors) or 'none'}")
print(f"schedule error  {result.max_schedule_error_ms:.2f} ms worst case")

print("\nclient-side latency (post-warmup):")
print(f"  {summarize(result.samples)}")
if result.server_exec is not None:
    print("server-reported execution time:")
    print(f"  {summarize(result.server_exec)}")
