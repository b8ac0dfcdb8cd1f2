"""Serverless platform limits and the memory-to-CPU scaling law.

Hard limits for the major platforms ship as a versioned fixture
(``data/providers.json``). Deployment plans are checked against a chosen
profile, and the slice of a vCPU a function receives at a given memory
size follows a proportional law that saturates once extra cores stop
helping a single-request inference workload.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

from .errors import DomainError, ScenarioError
from .units import MB, UNLIMITED, Limit, Unlimited

if TYPE_CHECKING:  # pragma: no cover
    from .packaging import DeploymentPlan

PROVIDERS_SCHEMA_VERSION = 1

_LIMIT_FIELDS = (
    "max_package_bytes",
    "max_execution_ms",
    "max_memory_bytes",
    "max_request_bytes",
)
_FINITE_FIELDS = ("max_memory_bytes", "max_request_bytes")


@dataclass(frozen=True)
class ProviderLimits:
    """Hard limits of one serverless platform.

    ``max_package_bytes`` and ``max_execution_ms`` may be UNLIMITED on
    platforms that do not restrict them; memory and request size are
    always finite byte counts.
    """

    name: str
    max_package_bytes: Limit
    max_execution_ms: Limit
    max_memory_bytes: int
    max_request_bytes: int

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise DomainError("provider name must be a non-empty string")
        for field in _LIMIT_FIELDS:
            value = getattr(self, field)
            if isinstance(value, Unlimited):
                if field in _FINITE_FIELDS:
                    raise DomainError(f"{self.name}: {field} must be a finite byte count")
                continue
            if isinstance(value, bool) or not isinstance(value, int):
                raise DomainError(
                    f"{self.name}: {field} must be an integer or UNLIMITED, got {value!r}"
                )
            if value <= 0:
                raise DomainError(
                    f"{self.name}: {field} must be strictly positive, got {value}; "
                    "an absent limit is UNLIMITED, never 0"
                )


@dataclass(frozen=True)
class CpuScaling:
    """Proportional memory-to-vCPU law with a usefulness ceiling.

    ``bytes_per_full_cpu`` is the memory grant that buys one full vCPU.
    ``max_useful_cpus`` caps the speedup a single-request inference
    worker can actually exploit, regardless of how many cores the
    platform would allocate at large memory sizes.
    """

    bytes_per_full_cpu: int = 1769 * MB
    max_useful_cpus: float = 1.0

    def __post_init__(self):
        if isinstance(self.bytes_per_full_cpu, bool) or not isinstance(self.bytes_per_full_cpu, int):
            raise DomainError("bytes_per_full_cpu must be an integer byte count")
        if self.bytes_per_full_cpu <= 0:
            raise DomainError(f"bytes_per_full_cpu must be positive, got {self.bytes_per_full_cpu}")
        if not self.max_useful_cpus >= 1:
            raise DomainError(f"max_useful_cpus must be at least 1, got {self.max_useful_cpus}")


def effective_cpu(memory_bytes: int, scaling: CpuScaling) -> float:
    """Fraction of vCPU time a function receives at ``memory_bytes`` of RAM.

    Grows in proportion to memory and saturates at ``scaling.max_useful_cpus``.

    Raises:
        DomainError: if ``memory_bytes`` is not strictly positive.
    """
    if memory_bytes <= 0:
        raise DomainError(f"memory_bytes must be positive, got {memory_bytes}")
    return min(memory_bytes / scaling.bytes_per_full_cpu, scaling.max_useful_cpus)


@dataclass(frozen=True)
class Violation:
    """One exceeded limit: which limit, its value, and the offending value."""

    limit_name: str
    limit_value: int
    actual_value: int


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of checking a plan against provider limits.

    ``passed`` is derived from ``violations``, so the two can never
    disagree.
    """

    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def validate_plan(plan: "DeploymentPlan", limits: ProviderLimits) -> ValidationReport:
    """Check a deployment plan against one platform's hard limits.

    Produces one violation per exceeded limit. UNLIMITED limits can never
    be violated. A plan that does not fit yields a failing report, not an
    exception.
    """
    violations = []
    package_bytes = plan.package.total_bytes
    if not isinstance(limits.max_package_bytes, Unlimited) and package_bytes > limits.max_package_bytes:
        violations.append(Violation("package_size", limits.max_package_bytes, package_bytes))
    if plan.memory_bytes > limits.max_memory_bytes:
        violations.append(Violation("memory", limits.max_memory_bytes, plan.memory_bytes))
    return ValidationReport(tuple(violations))


def validation_report_to_dict(report: ValidationReport) -> dict:
    """JSON-ready dict; inverse of :func:`validation_report_from_dict`."""
    return {
        "passed": report.passed,
        "violations": [
            {
                "limit_name": v.limit_name,
                "limit_value": v.limit_value,
                "actual_value": v.actual_value,
            }
            for v in report.violations
        ],
    }


def validation_report_from_dict(payload: Mapping) -> ValidationReport:
    return ValidationReport(tuple(
        Violation(v["limit_name"], v["limit_value"], v["actual_value"])
        for v in payload["violations"]
    ))


def _limit_from_json(raw, field: str, name: str, source: str) -> Limit:
    if raw is None:
        return UNLIMITED
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ScenarioError(f"{source}: provider {name!r}: {field} must be an integer or null")
    return raw


def parse_provider_limits(payload: Mapping, source: str = "<providers>") -> dict[str, ProviderLimits]:
    """Parse the providers fixture schema into an ordered name -> limits map.

    Unknown or missing fields are rejected rather than ignored, so a typo
    in a limits file cannot silently validate plans against nothing.
    """
    if not isinstance(payload, Mapping):
        raise ScenarioError(f"{source}: top level must be an object")
    expected_top = {"version", "providers"}
    if set(payload) != expected_top:
        raise ScenarioError(
            f"{source}: top-level keys must be exactly {sorted(expected_top)}, got {sorted(payload)}"
        )
    if payload["version"] != PROVIDERS_SCHEMA_VERSION:
        raise ScenarioError(
            f"{source}: unsupported schema version {payload['version']!r} "
            f"(expected {PROVIDERS_SCHEMA_VERSION})"
        )
    entries = payload["providers"]
    if not isinstance(entries, list):
        raise ScenarioError(f"{source}: 'providers' must be a list")
    out: dict[str, ProviderLimits] = {}
    expected_keys = {"name", *_LIMIT_FIELDS}
    for entry in entries:
        if not isinstance(entry, Mapping):
            raise ScenarioError(f"{source}: each provider entry must be an object")
        if set(entry) != expected_keys:
            unknown = sorted(set(entry) - expected_keys)
            missing = sorted(expected_keys - set(entry))
            raise ScenarioError(
                f"{source}: provider entry has unknown keys {unknown} / missing keys {missing}"
            )
        name = entry["name"]
        if name in out:
            raise ScenarioError(f"{source}: duplicate provider {name!r}")
        try:
            out[name] = ProviderLimits(
                name=name,
                max_package_bytes=_limit_from_json(entry["max_package_bytes"], "max_package_bytes", name, source),
                max_execution_ms=_limit_from_json(entry["max_execution_ms"], "max_execution_ms", name, source),
                max_memory_bytes=_limit_from_json(entry["max_memory_bytes"], "max_memory_bytes", name, source),
                max_request_bytes=_limit_from_json(entry["max_request_bytes"], "max_request_bytes", name, source),
            )
        except DomainError as exc:
            raise ScenarioError(f"{source}: {exc}") from exc
    return out


def load_provider_limits(path: str | Path | None = None) -> dict[str, ProviderLimits]:
    """Load provider limits from ``path``, or the bundled defaults if None."""
    if path is None:
        text = resources.files("faasplan.data").joinpath("providers.json").read_text("utf-8")
        source = "data/providers.json"
    else:
        path = Path(path)
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            raise ScenarioError(f"cannot read provider limits from {path}: {exc}") from exc
        source = str(path)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    return parse_provider_limits(payload, source)


def default_provider_limits() -> dict[str, ProviderLimits]:
    """The bundled platform profiles (aws, aws-container, azure, gcp)."""
    return load_provider_limits(None)


def dumps_provider_limits(limits: Iterable[ProviderLimits]) -> str:
    """Serialize limits to the canonical fixture text (round-trips byte for byte)."""

    def limit_json(value: Limit):
        return None if isinstance(value, Unlimited) else value

    payload = {
        "version": PROVIDERS_SCHEMA_VERSION,
        "providers": [
            {
                "name": lim.name,
                "max_package_bytes": limit_json(lim.max_package_bytes),
                "max_execution_ms": limit_json(lim.max_execution_ms),
                "max_memory_bytes": lim.max_memory_bytes,
                "max_request_bytes": lim.max_request_bytes,
            }
            for lim in limits
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def save_provider_limits(limits: Iterable[ProviderLimits], path: str | Path) -> None:
    """Write limits to ``path`` in the canonical fixture format."""
    Path(path).write_text(dumps_provider_limits(limits), "utf-8")
