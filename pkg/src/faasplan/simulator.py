"""Seeded discrete-event simulation of serverless invocations.

Arrivals drive a pool of single-request instances with keep-alive reuse:
an idle instance whose last use is recent enough serves warm, anything
else pays the cold-start penalty on a fresh (or expired) instance.
Service times are resampled with replacement from an empirical latency
profile and rescaled for the configured memory size through the CPU law.

The clock is integer microseconds internally, so a given seed produces
bit-identical results on every run and platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .cost import PricingModel
from .errors import DomainError
from .metrics import (
    SampleSet,
    Summary,
    nearest_rank_index,
    summarize,
    summary_from_dict,
    summary_to_dict,
    write_samples_csv,
)
from .providers import CpuScaling, effective_cpu
from .units import GB, UNLIMITED, Unlimited

TRAFFIC_KINDS = ("poisson_constant", "on_off_burst", "trace_replay")

DEFAULT_KEEP_ALIVE_S = 600.0
# Placeholder penalty: warm-profile measurements say nothing about cold
# behaviour, so runs that care should set this from their own data.
DEFAULT_COLD_START_MS = 1500.0


@dataclass(frozen=True)
class LatencyProfile:
    """Warm execution durations observed at a reference memory size."""

    reference_memory_bytes: int
    samples: SampleSet

    def __post_init__(self):
        if self.reference_memory_bytes <= 0:
            raise DomainError("reference_memory_bytes must be positive")
        if len(self.samples) == 0:
            raise DomainError("a latency profile needs at least one sample")

    @classmethod
    def constant(cls, duration_ms: float, reference_memory_bytes: int) -> "LatencyProfile":
        """Degenerate profile: every draw returns ``duration_ms``."""
        return cls(reference_memory_bytes, SampleSet.from_values([duration_ms]))

    @classmethod
    def from_quantile_anchors(
        cls,
        anchors: Mapping[Union[float, str], float],
        n_samples: int,
        reference_memory_bytes: int,
        head_factor: float = 0.8,
        tail_factor: float = 1.05,
    ) -> "LatencyProfile":
        """Synthesize a sample set whose nearest-rank quantiles hit ``anchors``.

        Values ramp linearly in rank space between anchor ranks; below the
        first anchor they ramp up from ``head_factor`` times its value,
        above the last they ramp to ``tail_factor`` times its value. The
        anchor ranks themselves reproduce the anchor values exactly, so
        summarizing the profile returns the anchors verbatim.

        Args:
            anchors: map of quantile (in (0, 1]) to duration in ms.
            n_samples: size of the synthesized set.

        Raises:
            DomainError: on empty anchors, quantiles outside (0, 1],
                anchor values that decrease as q grows, or ``n_samples``
                too small to give each anchor its own rank.
        """
        if not anchors:
            raise DomainError("anchors must not be empty")
        if n_samples <= 0:
            raise DomainError("n_samples must be positive")
        if not 0 < head_factor <= 1:
            raise DomainError(f"head_factor must lie in (0, 1], got {head_factor}")
        if tail_factor < 1:
            raise DomainError(f"tail_factor must be at least 1, got {tail_factor}")
        parsed = sorted((float(q), float(v)) for q, v in anchors.items())
        for q, v in parsed:
            if not 0 < q <= 1:
                raise DomainError(f"anchor quantile {q} outside (0, 1]")
            if v < 0:
                raise DomainError(f"anchor duration {v} must be non-negative")
        for (_, lo), (_, hi) in zip(parsed, parsed[1:]):
            if hi < lo:
                raise DomainError("anchor durations must be non-decreasing in q")
        ranks = [nearest_rank_index(q, n_samples) for q, _ in parsed]
        for r0, r1 in zip(ranks, ranks[1:]):
            if r1 <= r0:
                raise DomainError(
                    f"n_samples={n_samples} is too small to separate the anchor quantiles"
                )
        control: list[tuple[int, Fraction]] = []
        first_value, last_value = parsed[0][1], parsed[-1][1]
        if ranks[0] > 1:
            control.append((1, Fraction(head_factor) * Fraction(first_value)))
        control.extend((r, Fraction(v)) for r, (_, v) in zip(ranks, parsed))
        if ranks[-1] < n_samples:
            control.append((n_samples, Fraction(tail_factor) * Fraction(last_value)))
        values = [0.0] * n_samples
        # Interpolate in exact rationals, then round once per rank: floats
        # of a non-decreasing rational sequence stay non-decreasing.
        for (r0, v0), (r1, v1) in zip(control, control[1:]):
            span = r1 - r0
            for r in range(r0, r1 + 1):
                t = Fraction(r - r0, span)
                values[r - 1] = float(v0 + t * (v1 - v0))
        if len(control) == 1:
            values = [float(control[0][1])] * n_samples
        return cls(reference_memory_bytes, SampleSet.from_values(values))


@dataclass(frozen=True)
class TrafficPattern:
    """One request-arrival process; fields depend on ``kind``.

    Kinds: ``poisson_constant`` (rate_rps, duration_s), ``on_off_burst``
    (high_rate, low_rate, period_s, duty, duration_s) and
    ``trace_replay`` (explicit non-decreasing timestamps in ms).
    """

    kind: str
    rate_rps: float | None = None
    duration_s: float | None = None
    high_rate: float | None = None
    low_rate: float | None = None
    period_s: float | None = None
    duty: float | None = None
    timestamps: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in TRAFFIC_KINDS:
            raise DomainError(f"unknown traffic kind {self.kind!r}; expected one of {TRAFFIC_KINDS}")
        if self.kind == "poisson_constant":
            self._require(rate_rps=self.rate_rps, duration_s=self.duration_s)
            if self.rate_rps < 0:
                raise DomainError("rate_rps must be non-negative")
            if self.duration_s <= 0:
                raise DomainError("duration_s must be positive")
        elif self.kind == "on_off_burst":
            self._require(
                high_rate=self.high_rate, low_rate=self.low_rate,
                period_s=self.period_s, duty=self.duty, duration_s=self.duration_s,
            )
            if self.high_rate < 0 or self.low_rate < 0:
                raise DomainError("burst rates must be non-negative")
            if self.period_s <= 0 or self.duration_s <= 0:
                raise DomainError("period_s and duration_s must be positive")
            if not 0 <= self.duty <= 1:
                raise DomainError(f"duty must lie in [0, 1], got {self.duty}")
        else:
            if self.timestamps is None:
                raise DomainError("trace_replay requires timestamps")
            object.__setattr__(self, "timestamps", tuple(float(t) for t in self.timestamps))
            previous = None
            for t in self.timestamps:
                if not math.isfinite(t) or t < 0:
                    raise DomainError(f"trace timestamps must be finite and non-negative, got {t}")
                if previous is not None and t < previous:
                    raise DomainError("trace timestamps must be non-decreasing")
                previous = t

    def _require(self, **fields):
        missing = [name for name, value in fields.items() if value is None]
        if missing:
            raise DomainError(f"{self.kind} requires {', '.join(missing)}")

    @classmethod
    def poisson(cls, rate_rps: float, duration_s: float) -> "TrafficPattern":
        return cls(kind="poisson_constant", rate_rps=rate_rps, duration_s=duration_s)

    @classmethod
    def burst(
        cls, high_rate: float, low_rate: float, period_s: float, duty: float, duration_s: float
    ) -> "TrafficPattern":
        return cls(
            kind="on_off_burst", high_rate=high_rate, low_rate=low_rate,
            period_s=period_s, duty=duty, duration_s=duration_s,
        )

    @classmethod
    def trace(cls, timestamps: Sequence[float]) -> "TrafficPattern":
        return cls(kind="trace_replay", timestamps=tuple(timestamps))

    @classmethod
    def steady(cls, rate_rps: float, duration_s: float) -> "TrafficPattern":
        """Evenly spaced trace: rate*duration requests with exact gaps."""
        if rate_rps < 0 or duration_s <= 0:
            raise DomainError("steady needs rate_rps >= 0 and duration_s > 0")
        n = round(rate_rps * duration_s)
        gap_ms = 1000.0 / rate_rps if rate_rps > 0 else 0.0
        return cls.trace([i * gap_ms for i in range(n)])


@dataclass(frozen=True)
class SimulationConfig:
    """Knobs of one simulated deployment.

    ``keep_alive_s`` may be ``math.inf`` for platforms modelled as never
    reclaiming idle instances. ``max_instances`` is the concurrency cap;
    at the cap, requests queue FIFO for the earliest-free instance.
    """

    seed: int
    memory_bytes: int
    scaling: CpuScaling = CpuScaling()
    keep_alive_s: float = DEFAULT_KEEP_ALIVE_S
    cold_start_ms: float = DEFAULT_COLD_START_MS
    max_instances: Union[int, Unlimited] = UNLIMITED

    def __post_init__(self):
        if self.memory_bytes <= 0:
            raise DomainError("memory_bytes must be positive")
        if math.isnan(self.keep_alive_s) or self.keep_alive_s < 0:
            raise DomainError("keep_alive_s must be non-negative (math.inf allowed)")
        if not math.isfinite(self.cold_start_ms) or self.cold_start_ms < 0:
            raise DomainError("cold_start_ms must be finite and non-negative")
        if not isinstance(self.max_instances, Unlimited):
            if self.max_instances <= 0:
                raise DomainError("max_instances must be positive or UNLIMITED")


@dataclass(frozen=True)
class InvocationRecord:
    """One simulated request, all times in ms.

    ``end_ms`` is start + exec, plus the cold-start penalty when the
    instance had to be initialized. ``billed_ms`` is exec rounded up to
    the billing granularity; the penalty itself is not billed.
    """

    arrival_ms: float
    start_ms: float
    end_ms: float
    cold: bool
    instance_id: int
    exec_ms: float
    billed_ms: float


@dataclass(frozen=True)
class SimulationResult:
    """Everything a finished run produced, in arrival order."""

    records: tuple[InvocationRecord, ...]
    cold_fraction: float
    latency_summary: Summary | None
    total_billed_gb_s: float
    memory_bytes: int

    @property
    def latencies_ms(self) -> tuple[float, ...]:
        return tuple(r.end_ms - r.arrival_ms for r in self.records)


def scale_duration(
    base_ms: float,
    reference_memory_bytes: int,
    target_memory_bytes: int,
    scaling: CpuScaling,
) -> float:
    """Rescale a duration measured at one memory size to another.

    Durations shrink in proportion to the effective-CPU ratio and stop
    improving once the grant saturates; identical memory is the identity.

    Raises:
        DomainError: on non-positive durations or memory sizes.
    """
    if base_ms <= 0:
        raise DomainError(f"base_ms must be positive, got {base_ms}")
    return base_ms * (
        effective_cpu(reference_memory_bytes, scaling) / effective_cpu(target_memory_bytes, scaling)
    )


def _poisson_arrivals(rng: np.random.Generator, rate_rps: float, start_ms: float, end_ms: float) -> list[float]:
    out = []
    if rate_rps <= 0:
        return out
    scale = 1000.0 / rate_rps
    t = start_ms + rng.exponential(scale)
    while t < end_ms:
        out.append(t)
        t += rng.exponential(scale)
    return out


def generate_arrivals(pattern: TrafficPattern, seed) -> list[float]:
    """Arrival timestamps in ms for one pattern, deterministic per seed.

    ``seed`` may be anything ``numpy.random.default_rng`` accepts. Traces
    replay verbatim and ignore the seed.
    """
    if pattern.kind == "trace_replay":
        return list(pattern.timestamps)
    rng = np.random.default_rng(seed)
    if pattern.kind == "poisson_constant":
        return _poisson_arrivals(rng, pattern.rate_rps, 0.0, pattern.duration_s * 1000.0)
    duration_ms = pattern.duration_s * 1000.0
    period_ms = pattern.period_s * 1000.0
    segments = []
    t0 = 0.0
    while t0 < duration_ms:
        high_end = min(t0 + pattern.duty * period_ms, duration_ms)
        if high_end > t0:
            segments.append((t0, high_end, pattern.high_rate))
        low_end = min(t0 + period_ms, duration_ms)
        if low_end > high_end:
            segments.append((high_end, low_end, pattern.low_rate))
        t0 += period_ms
    out: list[float] = []
    for seg_start, seg_end, rate in segments:
        out.extend(_poisson_arrivals(rng, rate, seg_start, seg_end))
    return out


@dataclass(slots=True)
class _Instance:
    id: int
    free_at_us: int


def simulate(
    profile: LatencyProfile,
    pattern: TrafficPattern,
    config: SimulationConfig,
    pricing: PricingModel,
) -> SimulationResult:
    """Run one seeded deployment simulation.

    Every arrival yields exactly one record. A request served by an
    instance whose previous request ended within the keep-alive window is
    warm; every other request initializes an instance and pays
    ``cold_start_ms`` before executing. When ``max_instances`` binds,
    requests wait FIFO for the earliest-free instance. Service times are
    profile draws (seeded, with replacement) passed through
    :func:`scale_duration` for the configured memory.
    """
    seed_seq = np.random.SeedSequence(config.seed)
    arrival_seed, service_seed = seed_seq.spawn(2)
    arrivals_ms = generate_arrivals(pattern, arrival_seed)
    n = len(arrivals_ms)

    # One factor serves every draw; scale_duration(d) == d * factor for d > 0.
    factor = scale_duration(
        1.0, profile.reference_memory_bytes, config.memory_bytes, config.scaling
    )
    base_values = profile.samples.values
    rng = np.random.default_rng(service_seed)
    draw_index = rng.integers(0, len(base_values), size=n) if n else ()

    keep_alive_us = math.inf if math.isinf(config.keep_alive_s) else round(config.keep_alive_s * 1e6)
    cold_us = round(config.cold_start_ms * 1000)
    granularity_us = pricing.billing_granularity_ms * 1000
    unlimited_pool = isinstance(config.max_instances, Unlimited)

    instances: list[_Instance] = []
    records: list[InvocationRecord] = []
    latencies: list[float] = []
    billed_total_us = 0
    n_cold = 0

    for i in range(n):
        t = round(arrivals_ms[i] * 1000)
        exec_us = round(base_values[draw_index[i]] * 1000 * factor)
        warm_pool = [
            inst for inst in instances
            if inst.free_at_us <= t and t - inst.free_at_us <= keep_alive_us
        ]
        if warm_pool:
            # Most recently used warm instance; lowest id on ties.
            chosen = max(warm_pool, key=lambda inst: (inst.free_at_us, -inst.id))
            start, cold = t, False
        elif unlimited_pool or len(instances) < config.max_instances:
            chosen = _Instance(len(instances), 0)
            instances.append(chosen)
            start, cold = t, True
        else:
            chosen = min(instances, key=lambda inst: (inst.free_at_us, inst.id))
            start = max(t, chosen.free_at_us)
            cold = start - chosen.free_at_us > keep_alive_us
        end = start + exec_us + (cold_us if cold else 0)
        chosen.free_at_us = end
        billed_us = -(-exec_us // granularity_us) * granularity_us
        billed_total_us += billed_us
        n_cold += cold
        records.append(InvocationRecord(
            arrival_ms=t / 1000,
            start_ms=start / 1000,
            end_ms=end / 1000,
            cold=cold,
            instance_id=chosen.id,
            exec_ms=exec_us / 1000,
            billed_ms=billed_us / 1000,
        ))
        latencies.append((end - t) / 1000)

    memory_gb = config.memory_bytes / GB
    return SimulationResult(
        records=tuple(records),
        cold_fraction=n_cold / n if n else 0.0,
        latency_summary=summarize(latencies) if latencies else None,
        total_billed_gb_s=math.fsum(r.billed_ms for r in records) * memory_gb / 1000,
        memory_bytes=config.memory_bytes,
    )


def export_result_csv(result: SimulationResult, path: str | Path) -> None:
    """Write per-record end-to-end latencies in the shared sample CSV format."""
    samples = SampleSet(
        values=result.latencies_ms,
        timestamps=tuple(r.arrival_ms for r in result.records),
        cold=tuple(r.cold for r in result.records),
        instances=tuple(str(r.instance_id) for r in result.records),
    )
    write_samples_csv(samples, path)


def result_to_dict(result: SimulationResult) -> dict:
    """JSON-ready dict carrying the full result, including billing detail."""
    return {
        "memory_bytes": result.memory_bytes,
        "cold_fraction": result.cold_fraction,
        "total_billed_gb_s": result.total_billed_gb_s,
        "latency_summary": (
            None if result.latency_summary is None else summary_to_dict(result.latency_summary)
        ),
        "records": [
            {
                "arrival_ms": r.arrival_ms,
                "start_ms": r.start_ms,
                "end_ms": r.end_ms,
                "cold": r.cold,
                "instance_id": r.instance_id,
                "exec_ms": r.exec_ms,
                "billed_ms": r.billed_ms,
            }
            for r in result.records
        ],
    }


def result_from_dict(payload: Mapping) -> SimulationResult:
    """Inverse of :func:`result_to_dict`."""
    return SimulationResult(
        records=tuple(
            InvocationRecord(
                arrival_ms=r["arrival_ms"],
                start_ms=r["start_ms"],
                end_ms=r["end_ms"],
                cold=r["cold"],
                instance_id=r["instance_id"],
                exec_ms=r["exec_ms"],
                billed_ms=r["billed_ms"],
            )
            for r in payload["records"]
        ),
        cold_fraction=payload["cold_fraction"],
        latency_summary=(
            None if payload["latency_summary"] is None
            else summary_from_dict(payload["latency_summary"])
        ),
        total_billed_gb_s=payload["total_billed_gb_s"],
        memory_bytes=payload["memory_bytes"],
    )


def save_result_json(result: SimulationResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result), indent=2) + "\n", "utf-8")


def load_result_json(path: str | Path) -> SimulationResult:
    return result_from_dict(json.loads(Path(path).read_text("utf-8")))
