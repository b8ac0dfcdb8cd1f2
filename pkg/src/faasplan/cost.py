"""Serverless billing, VM baseline and break-even analysis.

Money is ``decimal.Decimal`` end to end. Pricing profiles ship in
``data/pricing.json`` and are parsed with ``parse_float=Decimal``, so a
rate like 0.0000166667 stays exactly what the file says rather than its
nearest binary float.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Mapping, Union

from .errors import DomainError, ScenarioError
from .units import GB

if TYPE_CHECKING:  # pragma: no cover
    from .simulator import SimulationResult

PRICING_SCHEMA_VERSION = 1

# Enough digits that request fees, GB-second products and the memory/GB
# ratio (denominator 2**30) all come out exact.
_PRECISION = 60

Money = Union[int, float, str, Decimal]


def _dec(value: Money) -> Decimal:
    """Decimal from a number without inheriting binary-float noise."""
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    return Decimal(str(value))


@dataclass(frozen=True)
class PricingModel:
    """Per-request plus per-GB-second serverless pricing.

    ``billing_granularity_ms`` is the integer step durations are rounded
    up to before billing; keeping it integral keeps billed durations
    exact.
    """

    per_million_requests: Decimal
    per_gb_second: Decimal
    billing_granularity_ms: int = 1
    currency: str = "USD"

    def __post_init__(self):
        object.__setattr__(self, "per_million_requests", _dec(self.per_million_requests))
        object.__setattr__(self, "per_gb_second", _dec(self.per_gb_second))
        if self.per_million_requests < 0 or self.per_gb_second < 0:
            raise DomainError("pricing rates must be non-negative")
        if isinstance(self.billing_granularity_ms, bool) or not isinstance(self.billing_granularity_ms, int):
            raise DomainError("billing_granularity_ms must be an integer")
        if self.billing_granularity_ms < 1:
            raise DomainError(
                f"billing_granularity_ms must be at least 1, got {self.billing_granularity_ms}"
            )


@dataclass(frozen=True)
class VmBaseline:
    """Always-on VM to compare against: flat monthly price at a memory size."""

    monthly_price: Decimal
    memory_bytes: int = GB

    def __post_init__(self):
        object.__setattr__(self, "monthly_price", _dec(self.monthly_price))
        if self.monthly_price < 0:
            raise DomainError("monthly_price must be non-negative")
        if self.memory_bytes <= 0:
            raise DomainError("memory_bytes must be positive")


DEFAULT_VM_BASELINE = VmBaseline(monthly_price=Decimal("8"), memory_bytes=GB)


@dataclass(frozen=True)
class CostAssumptions:
    """Inputs echoed into a report so the numbers can be re-derived."""

    n_requests: int
    billed_ms_per_request: Decimal | None
    memory_bytes: int
    months: Decimal


@dataclass(frozen=True)
class CostReport:
    """Serverless total vs VM baseline, with the break-even point.

    ``breakeven_requests_per_month`` is None when requests cost nothing
    (no volume ever reaches the VM price).
    """

    serverless_total: Decimal
    vm_total: Decimal
    breakeven_requests_per_month: int | None
    assumptions: CostAssumptions
    currency: str = "USD"


def billed_duration(exec_ms: float, granularity_ms: int) -> float:
    """Smallest multiple of the granularity at or above ``exec_ms``.

    The rounding happens in exact rational arithmetic, so durations that
    already sit on a granularity boundary are never pushed up a step.
    """
    if exec_ms < 0 or not math.isfinite(exec_ms):
        raise DomainError(f"exec_ms must be finite and non-negative, got {exec_ms}")
    if granularity_ms < 1:
        raise DomainError(f"granularity_ms must be at least 1, got {granularity_ms}")
    units = -(-Fraction(exec_ms) // Fraction(granularity_ms))
    return float(units * granularity_ms)


def serverless_cost(
    n_requests: int,
    billed_ms_per_request: Money,
    memory_bytes: int,
    pricing: PricingModel,
) -> Decimal:
    """Total charge for ``n_requests``: request fee plus GB-second fee.

    Linear in ``n_requests``; zero requests cost exactly zero.
    """
    if n_requests < 0:
        raise DomainError("n_requests must be non-negative")
    billed = _dec(billed_ms_per_request)
    if billed < 0:
        raise DomainError("billed_ms_per_request must be non-negative")
    if memory_bytes <= 0:
        raise DomainError("memory_bytes must be positive")
    with localcontext() as ctx:
        ctx.prec = _PRECISION
        request_fee = Decimal(n_requests) * pricing.per_million_requests / 1_000_000
        gb_seconds = Decimal(n_requests) * billed / 1000 * Decimal(memory_bytes) / GB
        return request_fee + gb_seconds * pricing.per_gb_second


def serverless_cost_total(
    n_requests: int,
    billed_ms_total: Money,
    memory_bytes: int,
    pricing: PricingModel,
) -> Decimal:
    """Total charge when per-request billed durations vary.

    The request fee scales with ``n_requests``; the compute fee scales
    with the summed billed milliseconds.
    """
    if n_requests < 0:
        raise DomainError("n_requests must be non-negative")
    billed_total = _dec(billed_ms_total)
    if billed_total < 0:
        raise DomainError("billed_ms_total must be non-negative")
    if memory_bytes <= 0:
        raise DomainError("memory_bytes must be positive")
    with localcontext() as ctx:
        ctx.prec = _PRECISION
        request_fee = Decimal(n_requests) * pricing.per_million_requests / 1_000_000
        gb_seconds = billed_total / 1000 * Decimal(memory_bytes) / GB
        return request_fee + gb_seconds * pricing.per_gb_second


def vm_baseline_cost(baseline: VmBaseline, months: Money = 1) -> Decimal:
    """Flat VM cost over ``months`` (fractional months allowed)."""
    months = _dec(months)
    if months < 0:
        raise DomainError("months must be non-negative")
    with localcontext() as ctx:
        ctx.prec = _PRECISION
        return baseline.monthly_price * months


def breakeven(
    pricing: PricingModel,
    baseline: VmBaseline,
    billed_ms_per_request: Money,
    memory_bytes: int,
) -> int | None:
    """Smallest monthly request count whose serverless cost reaches the VM price.

    Returns 0 when the VM is free, None when the marginal request cost is
    zero. The count is computed in exact rationals, so the boundary
    property holds: cost(n - 1) < vm_price <= cost(n).
    """
    if baseline.monthly_price <= 0:
        return 0
    marginal = serverless_cost(1, billed_ms_per_request, memory_bytes, pricing)
    if marginal == 0:
        return None
    return math.ceil(Fraction(baseline.monthly_price) / Fraction(marginal))


def build_cost_report(
    n_requests: int,
    billed_ms_per_request: Money,
    memory_bytes: int,
    pricing: PricingModel,
    baseline: VmBaseline = DEFAULT_VM_BASELINE,
    months: Money = 1,
) -> CostReport:
    """Closed-form report for a uniform per-request billed duration."""
    return CostReport(
        serverless_total=serverless_cost(n_requests, billed_ms_per_request, memory_bytes, pricing),
        vm_total=vm_baseline_cost(baseline, months),
        breakeven_requests_per_month=breakeven(pricing, baseline, billed_ms_per_request, memory_bytes),
        assumptions=CostAssumptions(
            n_requests=n_requests,
            billed_ms_per_request=_dec(billed_ms_per_request),
            memory_bytes=memory_bytes,
            months=_dec(months),
        ),
        currency=pricing.currency,
    )


def cost_from_simulation(
    result: "SimulationResult",
    pricing: PricingModel,
    baseline: VmBaseline = DEFAULT_VM_BASELINE,
    months: Money = 1,
) -> CostReport:
    """Bill a finished simulation record by record and compare to the VM.

    Uses each record's own billed duration rather than an average; the
    break-even column uses the mean billed duration, which matches the
    exact answer whenever every record bills the same. An empty result
    costs exactly zero.
    """
    n = len(result.records)
    # Simulated billed_ms values are integral multiples of the granularity.
    billed_total_ms = sum(round(r.billed_ms) for r in result.records)
    total = serverless_cost_total(n, billed_total_ms, result.memory_bytes, pricing)
    with localcontext() as ctx:
        ctx.prec = _PRECISION
        mean_billed = Decimal(billed_total_ms) / n if n else None
    return CostReport(
        serverless_total=total,
        vm_total=vm_baseline_cost(baseline, months),
        breakeven_requests_per_month=(
            None if mean_billed is None
            else breakeven(pricing, baseline, mean_billed, result.memory_bytes)
        ),
        assumptions=CostAssumptions(
            n_requests=n,
            billed_ms_per_request=mean_billed,
            memory_bytes=result.memory_bytes,
            months=_dec(months),
        ),
        currency=pricing.currency,
    )


def _dec_str(value: Decimal) -> str:
    # Strip trailing zeros without drifting into scientific notation.
    return format(value.normalize(), "f")


def cost_report_to_dict(report: CostReport) -> dict:
    """JSON-ready dict; Decimals become strings to stay exact."""
    assumptions = report.assumptions
    return {
        "currency": report.currency,
        "serverless_total": _dec_str(report.serverless_total),
        "vm_total": _dec_str(report.vm_total),
        "breakeven_requests_per_month": report.breakeven_requests_per_month,
        "assumptions": {
            "n_requests": assumptions.n_requests,
            "billed_ms_per_request": (
                None if assumptions.billed_ms_per_request is None
                else _dec_str(assumptions.billed_ms_per_request)
            ),
            "memory_bytes": assumptions.memory_bytes,
            "months": _dec_str(assumptions.months),
        },
    }


def cost_report_from_dict(payload: Mapping) -> CostReport:
    """Inverse of :func:`cost_report_to_dict`."""
    raw = payload["assumptions"]
    return CostReport(
        serverless_total=Decimal(payload["serverless_total"]),
        vm_total=Decimal(payload["vm_total"]),
        breakeven_requests_per_month=payload["breakeven_requests_per_month"],
        assumptions=CostAssumptions(
            n_requests=raw["n_requests"],
            billed_ms_per_request=(
                None if raw["billed_ms_per_request"] is None
                else Decimal(raw["billed_ms_per_request"])
            ),
            memory_bytes=raw["memory_bytes"],
            months=Decimal(raw["months"]),
        ),
        currency=payload["currency"],
    )


def _money(value: Decimal) -> str:
    # Four decimals, trimmed back to two when the tail is zero.
    text = f"{value.quantize(Decimal('0.0001')):f}"
    if text.endswith("00"):
        text = text[:-2]
    return text


def _plain(value: Decimal) -> str:
    return f"{value.normalize():f}"


def render_cost_table(report: CostReport) -> str:
    """Aligned text comparison, money at up to four decimal places."""
    assumptions = report.assumptions
    be = report.breakeven_requests_per_month
    if be is None:
        be_text = "never (requests are free)"
    elif be == 0:
        be_text = "0 (VM is free)"
    else:
        rps = be / (30 * 24 * 3600)
        be_text = f"{be} requests/month (~{rps:.2f} rps)"
    if assumptions.months == 1:
        vm_label = f"vm baseline ({report.currency}/month)"
    else:
        vm_label = f"vm baseline ({report.currency}, {_plain(assumptions.months)} months)"
    rows = [
        ("requests", f"{assumptions.n_requests}"),
        ("billed ms/request", (
            "n/a" if assumptions.billed_ms_per_request is None
            else _plain(assumptions.billed_ms_per_request)
        )),
        ("memory", f"{assumptions.memory_bytes / (1 << 20):g} MB"),
        (f"serverless total ({report.currency})", _money(report.serverless_total)),
        (vm_label, _money(report.vm_total)),
        ("break-even", be_text),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label.ljust(width)}  {value}" for label, value in rows)


def parse_pricing(payload: Mapping, source: str = "<pricing>") -> dict[str, PricingModel]:
    """Parse the pricing fixture schema into an ordered name -> model map."""
    if set(payload) != {"version", "profiles"}:
        raise ScenarioError(f"{source}: top-level keys must be exactly ['profiles', 'version']")
    if payload["version"] != PRICING_SCHEMA_VERSION:
        raise ScenarioError(f"{source}: unsupported schema version {payload['version']!r}")
    allowed = {"name", "per_million_requests", "per_gb_second", "billing_granularity_ms", "currency"}
    out: dict[str, PricingModel] = {}
    for entry in payload["profiles"]:
        unknown = set(entry) - allowed
        if unknown:
            raise ScenarioError(f"{source}: pricing entry has unknown keys {sorted(unknown)}")
        name = entry.get("name")
        if not name:
            raise ScenarioError(f"{source}: pricing entry missing name")
        if name in out:
            raise ScenarioError(f"{source}: duplicate pricing profile {name!r}")
        try:
            out[name] = PricingModel(
                per_million_requests=entry["per_million_requests"],
                per_gb_second=entry["per_gb_second"],
                billing_granularity_ms=entry.get("billing_granularity_ms", 1),
                currency=entry.get("currency", "USD"),
            )
        except (DomainError, KeyError) as exc:
            raise ScenarioError(f"{source}: profile {name!r}: {exc}") from exc
    return out


def load_pricing(path: str | Path | None = None) -> dict[str, PricingModel]:
    """Load pricing profiles from ``path``, or the bundled ones if None.

    Rates are parsed straight into Decimal; no float ever touches them.
    """
    if path is None:
        text = resources.files("faasplan.data").joinpath("pricing.json").read_text("utf-8")
        source = "data/pricing.json"
    else:
        path = Path(path)
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read pricing from {path}: {exc}") from exc
        source = str(path)
    try:
        payload = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    return parse_pricing(payload, source)
