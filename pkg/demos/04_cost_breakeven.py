"""Price a prediction workload against the cheapest always-on VM.

Serverless billing is linear in request volume; a VM is a flat monthly
fee. Somewhere between the two lines sits the break-even volume, and it
is much higher than most people guess.
"""

from faasplan import (
    GB,
    DEFAULT_VM_BASELINE,
    breakeven,
    build_cost_report,
    load_pricing,
    serverless_cost,
)
from faasplan.cost import render_cost_table

pricing = load_pricing()

# One million 100 ms predictions at 1 GB, on both pricing profiles.
for name in ("aws", "gcp"):
    total = serverless_cost(1_000_000, 100, GB, pricing[name])
    print(f"one million predictions on {name}: {total:.4f} USD")

report = build_cost_report(
    n_requests=1_000_000,
    billed_ms_per_request=100,
    memory_bytes=GB,
    pricing=pricing["aws"],
    baseline=DEFAULT_VM_BASELINE,
)
print()
print(render_cost_table(report))

n = breakeven(pricing["aws"], DEFAULT_VM_BASELINE, 100, GB)
print(f"\nbelow {n:,} requests/month (~{n / (30 * 24 * 3600):.2f} rps sustained),")
print("the functions bill less than the 8 USD VM ever could.")
