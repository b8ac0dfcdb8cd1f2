"""Command-line front end: validate, select, simulate, cost, bench.

Every command reads its inputs from flags and JSON scenario files, so a
run is reproducible from the scenario alone. Exit codes: 0 success, 1
domain failure (plan rejected, nothing feasible, error budget blown), 2
configuration or usage problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from decimal import Decimal
from functools import lru_cache
from pathlib import Path
from typing import Mapping

from . import catalog as catalog_mod
from . import cost as cost_mod
from .errors import (
    CatalogError,
    DomainError,
    FaasPlanError,
    NoFeasibleModelError,
    PreflightError,
    ScenarioError,
)
from .harness import BenchRun, BenchTarget, StubServer, export_run, run_bench
from .metrics import (
    format_summary_table,
    read_samples_csv,
    summary_to_dict,
    summarize,
)
from .packaging import (
    DEFAULT_CODE_BYTES,
    DeploymentPackage,
    DeploymentPlan,
    RuntimeLibrary,
    load_runtime_libraries,
)
from .providers import (
    CpuScaling,
    ProviderLimits,
    load_provider_limits,
    validate_plan,
    validation_report_to_dict,
)
from .simulator import (
    LatencyProfile,
    SimulationConfig,
    TrafficPattern,
    export_result_csv,
    load_result_json,
    result_to_dict,
    save_result_json,
    simulate,
)
from .units import MB, UNLIMITED, Unlimited

SCENARIO_SCHEMA_VERSION = 1

_SCENARIO_KEYS = {
    "version", "name", "description", "provider", "pricing", "catalog", "package",
    "memory_mb", "profile", "traffic", "simulation", "memory_sweep_mb", "cost", "vm",
}


class ProfileStore:
    """Resolves named fixtures, preferring files in ``--profile-dir``."""

    def __init__(self, profile_dir: Path | None = None):
        self.profile_dir = Path(profile_dir) if profile_dir is not None else None

    def _override(self, filename: str) -> Path | None:
        if self.profile_dir is not None:
            candidate = self.profile_dir / filename
            if candidate.exists():
                return candidate
        return None

    @lru_cache(maxsize=None)
    def providers(self) -> dict[str, ProviderLimits]:
        return load_provider_limits(self._override("providers.json"))

    @lru_cache(maxsize=None)
    def pricing(self) -> dict[str, cost_mod.PricingModel]:
        return cost_mod.load_pricing(self._override("pricing.json"))

    @lru_cache(maxsize=None)
    def runtimes(self) -> dict[str, RuntimeLibrary]:
        return load_runtime_libraries(self._override("runtimes.json"))

    def provider(self, name: str) -> ProviderLimits:
        table = self.providers()
        if name not in table:
            raise ScenarioError(f"unknown provider {name!r}; available: {', '.join(table)}")
        return table[name]

    def pricing_profile(self, name: str) -> cost_mod.PricingModel:
        table = self.pricing()
        if name not in table:
            raise ScenarioError(f"unknown pricing profile {name!r}; available: {', '.join(table)}")
        return table[name]

    def runtime(self, name: str) -> RuntimeLibrary:
        table = self.runtimes()
        if name not in table:
            raise ScenarioError(f"unknown runtime {name!r}; available: {', '.join(table)}")
        return table[name]

    def catalog(self, source: str) -> list[catalog_mod.ModelArtifact]:
        if source not in catalog_mod.BUILTIN_CATALOGS:
            override = self._override(source)
            if override is not None:
                return catalog_mod.load_catalog(override)
        return catalog_mod.load_catalog(source)


@dataclass
class Scenario:
    """A scenario file resolved against the fixture store."""

    path: Path
    name: str | None
    provider: ProviderLimits | None
    pricing: cost_mod.PricingModel | None
    catalog: list[catalog_mod.ModelArtifact] | None
    package: DeploymentPackage | None
    memory_bytes: int | None
    profile: LatencyProfile | None
    traffic: TrafficPattern | None
    sim_config: SimulationConfig | None
    memory_sweep_mb: list[int] | None
    cost_block: dict | None
    vm: cost_mod.VmBaseline | None


def _require(mapping: Mapping, key: str, context: str):
    if key not in mapping:
        raise ScenarioError(f"{context}: missing required key {key!r}")
    return mapping[key]


def _memory_bytes_from(block: Mapping, context: str, default_mb: int | None = None) -> int:
    if "memory_mb" in block:
        return round(float(block["memory_mb"]) * MB)
    if "memory_bytes" in block:
        return int(block["memory_bytes"])
    if default_mb is not None:
        return default_mb * MB
    raise ScenarioError(f"{context}: missing memory_mb")


def _parse_profile(block: Mapping, scenario_dir: Path, context: str) -> LatencyProfile:
    if "reference_memory_mb" in block:
        reference = round(float(block["reference_memory_mb"]) * MB)
    elif "reference_memory_bytes" in block:
        reference = int(block["reference_memory_bytes"])
    else:
        raise ScenarioError(f"{context}: missing reference_memory_mb")
    sources = [k for k in ("constant_ms", "quantile_anchors", "samples_csv") if k in block]
    if len(sources) != 1:
        raise ScenarioError(
            f"{context}: give exactly one of constant_ms / quantile_anchors / samples_csv"
        )
    kind = sources[0]
    if kind == "constant_ms":
        return LatencyProfile.constant(float(block["constant_ms"]), reference)
    if kind == "quantile_anchors":
        anchors = {float(q): float(v) for q, v in block["quantile_anchors"].items()}
        n_samples = int(_require(block, "n_samples", context))
        return LatencyProfile.from_quantile_anchors(anchors, n_samples, reference)
    samples = read_samples_csv(scenario_dir / str(block["samples_csv"]))
    return LatencyProfile(reference, samples)


def _parse_traffic(block: Mapping, context: str) -> TrafficPattern:
    kind = str(_require(block, "kind", context))
    if kind == "steady":
        return TrafficPattern.steady(float(block["rate_rps"]), float(block["duration_s"]))
    if kind in ("poisson", "poisson_constant"):
        return TrafficPattern.poisson(float(block["rate_rps"]), float(block["duration_s"]))
    if kind in ("burst", "on_off_burst"):
        return TrafficPattern.burst(
            high_rate=float(block["high_rate"]),
            low_rate=float(block["low_rate"]),
            period_s=float(block["period_s"]),
            duty=float(block["duty"]),
            duration_s=float(block["duration_s"]),
        )
    if kind in ("trace", "trace_replay"):
        return TrafficPattern.trace([float(t) for t in block["timestamps"]])
    raise ScenarioError(f"{context}: unknown traffic kind {kind!r}")


def _parse_scaling(block: Mapping | None, context: str) -> CpuScaling:
    if block is None:
        return CpuScaling()
    kwargs = {}
    if "bytes_per_full_cpu" in block:
        kwargs["bytes_per_full_cpu"] = int(block["bytes_per_full_cpu"])
    elif "mb_per_full_cpu" in block:
        kwargs["bytes_per_full_cpu"] = round(float(block["mb_per_full_cpu"]) * MB)
    if "max_useful_cpus" in block:
        kwargs["max_useful_cpus"] = float(block["max_useful_cpus"])
    return CpuScaling(**kwargs)


def _parse_simulation(block: Mapping, context: str, seed_override: int | None) -> SimulationConfig:
    keep_alive = block.get("keep_alive_s", None)
    if keep_alive is None or keep_alive == "inf":
        keep_alive_s = float("inf")
    else:
        keep_alive_s = float(keep_alive)
    max_instances = block.get("max_instances")
    seed = int(block.get("seed", 0)) if seed_override is None else seed_override
    return SimulationConfig(
        seed=seed,
        memory_bytes=_memory_bytes_from(block, context),
        scaling=_parse_scaling(block.get("scaling"), context),
        keep_alive_s=keep_alive_s,
        cold_start_ms=float(block.get("cold_start_ms", 1500.0)),
        max_instances=UNLIMITED if max_instances is None else int(max_instances),
    )


def _resolve_model(entry, scenario_catalog, context: str) -> catalog_mod.ModelArtifact:
    if isinstance(entry, str):
        if scenario_catalog is None:
            raise ScenarioError(f"{context}: model {entry!r} needs a 'catalog' to look it up in")
        for model in scenario_catalog:
            if model.name == entry:
                return model
        raise ScenarioError(f"{context}: model {entry!r} not found in catalog")
    if isinstance(entry, Mapping):
        parsed = catalog_mod.parse_catalog(
            {"version": catalog_mod.CATALOG_SCHEMA_VERSION, "models": [dict(entry)]},
            context,
        )
        return parsed[0]
    raise ScenarioError(f"{context}: model must be a name or an inline object")


def load_scenario(path: str | Path, store: ProfileStore, seed_override: int | None = None) -> Scenario:
    """Load and resolve a scenario file.

    Raises:
        ScenarioError: on unreadable files, schema violations, or names
            that do not resolve against the fixture store.
    """
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        raw = json.loads(text)
        # Money-bearing blocks are re-parsed with exact decimals.
        raw_exact = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    unknown = set(raw) - _SCENARIO_KEYS
    if unknown:
        raise ScenarioError(f"{path}: unknown scenario keys {sorted(unknown)}")
    if raw.get("version") != SCENARIO_SCHEMA_VERSION:
        raise ScenarioError(f"{path}: scenario version must be {SCENARIO_SCHEMA_VERSION}")
    context = str(path)

    provider = store.provider(raw["provider"]) if "provider" in raw else None
    pricing = store.pricing_profile(raw["pricing"]) if "pricing" in raw else None
    models = store.catalog(raw["catalog"]) if "catalog" in raw else None

    package = None
    if "package" in raw:
        block = raw["package"]
        runtime = store.runtime(str(_require(block, "runtime", f"{context}: package")))
        model = _resolve_model(_require(block, "model", f"{context}: package"), models,
                               f"{context}: package")
        if "code_bytes" in block:
            code_bytes = int(block["code_bytes"])
        elif "code_mb" in block:
            code_bytes = round(float(block["code_mb"]) * MB)
        else:
            code_bytes = DEFAULT_CODE_BYTES
        package = DeploymentPackage(code_bytes=code_bytes, runtime=runtime, model=model)

    memory_bytes = round(float(raw["memory_mb"]) * MB) if "memory_mb" in raw else None

    profile = None
    if "profile" in raw:
        profile = _parse_profile(raw["profile"], path.parent, f"{context}: profile")
    traffic = _parse_traffic(raw["traffic"], f"{context}: traffic") if "traffic" in raw else None
    sim_config = None
    if "simulation" in raw:
        sim_config = _parse_simulation(raw["simulation"], f"{context}: simulation", seed_override)

    cost_block = None
    if "cost" in raw:
        block = raw_exact["cost"]
        cost_block = {
            "n_requests": int(_require(block, "n_requests", f"{context}: cost")),
            "billed_ms_per_request": block.get("billed_ms_per_request", Decimal(0)),
            "memory_bytes": _memory_bytes_from(block, f"{context}: cost", default_mb=1024),
            "months": block.get("months", Decimal(1)),
        }

    vm = None
    if "vm" in raw:
        block = raw_exact["vm"]
        vm = cost_mod.VmBaseline(
            monthly_price=_require(block, "monthly_price", f"{context}: vm"),
            memory_bytes=_memory_bytes_from(block, f"{context}: vm", default_mb=1024),
        )

    return Scenario(
        path=path,
        name=raw.get("name"),
        provider=provider,
        pricing=pricing,
        catalog=models,
        package=package,
        memory_bytes=memory_bytes,
        profile=profile,
        traffic=traffic,
        sim_config=sim_config,
        memory_sweep_mb=[int(m) for m in raw["memory_sweep_mb"]] if "memory_sweep_mb" in raw else None,
        cost_block=cost_block,
        vm=vm,
    )


def _emit(payload: dict, args) -> None:
    print(json.dumps(payload, indent=2))


def _mb_text(n_bytes: int) -> str:
    return f"{n_bytes / MB:g} MB"


def _model_dict(model: catalog_mod.ModelArtifact) -> dict:
    return {
        "name": model.name,
        "size_bytes": model.size_bytes,
        "format": model.format,
        "metrics": dict(model.metrics),
        "embedding_dim": model.embedding_dim,
    }


def cmd_validate(args, store: ProfileStore) -> int:
    scenario = load_scenario(args.scenario, store)
    provider = store.provider(args.provider) if args.provider else scenario.provider
    if provider is None:
        raise ScenarioError(f"{scenario.path}: no provider given (scenario key or --provider)")
    if scenario.package is None:
        raise ScenarioError(f"{scenario.path}: validate needs a 'package' block")
    if args.memory_mb is not None:
        memory_bytes = args.memory_mb * MB
    elif scenario.memory_bytes is not None:
        memory_bytes = scenario.memory_bytes
    else:
        memory_bytes = 1024 * MB
    plan = DeploymentPlan(provider=provider.name, package=scenario.package, memory_bytes=memory_bytes)
    report = validate_plan(plan, provider)
    if args.format == "json":
        payload = validation_report_to_dict(report)
        payload.update({
            "provider": provider.name,
            "package_bytes": plan.package.total_bytes,
            "memory_bytes": plan.memory_bytes,
        })
        _emit(payload, args)
    else:
        print(f"provider  {provider.name}")
        print(f"package   {plan.package.total_bytes} B ({_mb_text(plan.package.total_bytes)})")
        print(f"memory    {plan.memory_bytes} B ({_mb_text(plan.memory_bytes)})")
        if report.passed:
            print("PASS")
        else:
            print("FAIL")
            for v in report.violations:
                print(f"  {v.limit_name}: {v.actual_value} B > {v.limit_value} B limit")
    return 0 if report.passed else 1


def cmd_select(args, store: ProfileStore) -> int:
    models = store.catalog(args.catalog)
    runtime = store.runtime(args.runtime)
    if args.max_package_mb is not None:
        budget = round(args.max_package_mb * MB)
    elif args.provider:
        cap = store.provider(args.provider).max_package_bytes
        if isinstance(cap, Unlimited):
            raise ScenarioError(
                f"provider {args.provider!r} does not cap package size; use --max-package-mb"
            )
        budget = cap
    else:
        raise ScenarioError("select needs --provider or --max-package-mb")
    constraints = catalog_mod.SelectionConstraints(
        max_package_bytes=budget,
        code_bytes=round(args.code_mb * MB),
        runtime=runtime,
        objective_metric=args.metric,
        min_score=args.min_score,
    )
    evaluations = catalog_mod.evaluate_candidates(models, constraints)
    feasible = [ev for ev in evaluations if ev.feasible]
    selected = None
    if feasible:
        selected = catalog_mod.select_model(models, constraints)

    if args.format == "json":
        _emit({
            "selected": None if selected is None else _model_dict(selected),
            "objective_metric": args.metric,
            "max_package_bytes": budget,
            "candidates": [
                {
                    "name": ev.model.name,
                    "package_bytes": ev.package_bytes,
                    "score": ev.score,
                    "feasible": ev.feasible,
                    "reason": ev.reason,
                }
                for ev in evaluations
            ],
        }, args)
    else:
        if selected is not None:
            score = selected.score(args.metric)
            print(
                f"selected  {selected.name}  {args.metric}={score:g}  "
                f"package {_mb_text(constraints.code_bytes + runtime.size_bytes + selected.size_bytes)}"
            )
        else:
            print(f"no feasible model for {args.metric} within {_mb_text(budget)}")
        print()
        name_w = max(len(ev.model.name) for ev in evaluations) if evaluations else 4
        for ev in evaluations:
            outcome = "feasible" if ev.feasible else ev.reason
            pkg = _mb_text(ev.package_bytes) if ev.package_bytes is not None else "-"
            score = f"{ev.score:g}" if ev.score is not None else "-"
            print(f"{ev.model.name.ljust(name_w)}  {pkg:>9}  {score:>7}  {outcome}")
    return 0 if selected is not None else 1


def _sweep_rows(scenario: Scenario, pricing, sweep_mb: list[int]):
    rows = []
    for memory_mb in sweep_mb:
        config = replace(scenario.sim_config, memory_bytes=memory_mb * MB)
        result = simulate(scenario.profile, scenario.traffic, config, pricing)
        rows.append((memory_mb, result))
    return rows


def cmd_simulate(args, store: ProfileStore) -> int:
    scenario = load_scenario(args.scenario, store, seed_override=args.seed)
    for field_name in ("profile", "traffic", "sim_config"):
        if getattr(scenario, field_name) is None:
            block = "simulation" if field_name == "sim_config" else field_name
            raise ScenarioError(f"{scenario.path}: simulate needs a {block!r} block")
    pricing = scenario.pricing or store.pricing_profile("aws")

    sweep_mb = None
    if args.memory_sweep:
        sweep_mb = [int(part) for part in args.memory_sweep.split(",") if part.strip()]
    elif scenario.memory_sweep_mb:
        sweep_mb = scenario.memory_sweep_mb

    if sweep_mb:
        rows = _sweep_rows(scenario, pricing, sweep_mb)
        if args.format == "json":
            _emit({
                "sweep": [
                    {
                        "memory_mb": memory_mb,
                        "cold_fraction": result.cold_fraction,
                        "total_billed_gb_s": result.total_billed_gb_s,
                        "latency_summary": (
                            None if result.latency_summary is None
                            else summary_to_dict(result.latency_summary)
                        ),
                    }
                    for memory_mb, result in rows
                ],
            }, args)
        else:
            print(format_summary_table(
                (f"{memory_mb} MB", result.latency_summary)
                for memory_mb, result in rows if result.latency_summary is not None
            ))
        if args.out:
            out = Path(f"{args.out}_sweep.csv")
            with open(out, "w") as fh:
                fh.write("memory_mb,count,mean_ms,q50_ms,q95_ms,q99_ms,cold_fraction,total_billed_gb_s\n")
                for memory_mb, result in rows:
                    s = result.latency_summary
                    fh.write(
                        f"{memory_mb},{s.count if s else 0},"
                        f"{s.mean if s else ''},{s.q50 if s else ''},{s.q95 if s else ''},"
                        f"{s.q99 if s else ''},{result.cold_fraction},{result.total_billed_gb_s}\n"
                    )
        return 0

    result = simulate(scenario.profile, scenario.traffic, scenario.sim_config, pricing)
    if args.format == "json":
        _emit(result_to_dict(result), args)
    else:
        if result.latency_summary is not None:
            print(format_summary_table({"latency_ms": result.latency_summary}))
        n_instances = len({r.instance_id for r in result.records})
        print()
        print(f"requests          {len(result.records)}")
        print(f"instances         {n_instances}")
        print(f"cold fraction     {result.cold_fraction:.4f}")
        print(f"billed GB-seconds {result.total_billed_gb_s:.6f}")
    if args.out:
        export_result_csv(result, Path(f"{args.out}.csv"))
        save_result_json(result, Path(f"{args.out}.json"))
    return 0


def _report_from_samples_csv(path: Path, pricing, baseline, memory_bytes: int, months) -> cost_mod.CostReport:
    samples = read_samples_csv(path)
    n = len(samples)
    billed = [
        cost_mod.billed_duration(v, pricing.billing_granularity_ms) for v in samples.values
    ]
    # Each entry is an exact multiple of the integer granularity.
    billed_total = sum(round(b) for b in billed)
    total = cost_mod.serverless_cost_total(n, billed_total, memory_bytes, pricing)
    mean_billed = Decimal(billed_total) / n if n else None
    return cost_mod.CostReport(
        serverless_total=total,
        vm_total=cost_mod.vm_baseline_cost(baseline, months),
        breakeven_requests_per_month=(
            None if mean_billed is None
            else cost_mod.breakeven(pricing, baseline, mean_billed, memory_bytes)
        ),
        assumptions=cost_mod.CostAssumptions(
            n_requests=n,
            billed_ms_per_request=mean_billed,
            memory_bytes=memory_bytes,
            months=Decimal(str(months)),
        ),
        currency=pricing.currency,
    )


def cmd_cost(args, store: ProfileStore) -> int:
    if bool(args.scenario) == bool(args.result):
        raise ScenarioError("cost needs exactly one of --scenario / --result")
    baseline_override = (
        cost_mod.VmBaseline(monthly_price=args.vm) if args.vm is not None else None
    )
    if args.scenario:
        scenario = load_scenario(args.scenario, store)
        if scenario.cost_block is None:
            raise ScenarioError(f"{scenario.path}: cost needs a 'cost' block")
        pricing = (
            store.pricing_profile(args.pricing) if args.pricing
            else scenario.pricing or store.pricing_profile("aws")
        )
        baseline = baseline_override or scenario.vm or cost_mod.DEFAULT_VM_BASELINE
        block = scenario.cost_block
        months = Decimal(str(args.months)) if args.months is not None else block["months"]
        report = cost_mod.build_cost_report(
            n_requests=block["n_requests"],
            billed_ms_per_request=block["billed_ms_per_request"],
            memory_bytes=block["memory_bytes"],
            pricing=pricing,
            baseline=baseline,
            months=months,
        )
    else:
        pricing = store.pricing_profile(args.pricing or "aws")
        baseline = baseline_override or cost_mod.DEFAULT_VM_BASELINE
        months = args.months if args.months is not None else 1
        result_path = Path(args.result)
        if result_path.suffix == ".json":
            result = load_result_json(result_path)
            report = cost_mod.cost_from_simulation(result, pricing, baseline, months)
        else:
            memory_bytes = (args.memory_mb or 1024) * MB
            report = _report_from_samples_csv(result_path, pricing, baseline, memory_bytes, months)

    if args.format == "json":
        _emit(cost_mod.cost_report_to_dict(report), args)
    else:
        print(cost_mod.render_cost_table(report))
    return 0


def cmd_bench(args, store: ProfileStore) -> int:
    if not args.url and not args.stub:
        raise ScenarioError("bench needs --url (or --stub for an offline run)")
    payload = b""
    if args.payload_file:
        try:
            payload = Path(args.payload_file).read_bytes()
        except OSError as exc:
            raise ScenarioError(f"cannot read payload file: {exc}") from exc
    if args.pattern == "steady":
        pattern = TrafficPattern.steady(args.rate, args.duration)
    else:
        pattern = TrafficPattern.poisson(args.rate, args.duration)
    limits = store.provider(args.limits_profile) if args.limits_profile else None

    stub = None
    try:
        if args.stub:
            stub = StubServer(
                delay_ms=args.stub_delay_ms,
                jitter_ms=args.stub_jitter_ms,
                fail_every=args.stub_fail_every,
            ).start()
            url = stub.url
        else:
            url = args.url
        target = BenchTarget(
            url=url,
            method=args.method,
            payload=payload,
            timeout_ms=args.timeout_ms,
        )
        run = BenchRun(
            target=target,
            pattern=pattern,
            n_warmup=args.warmup,
            provider_limits=limits,
            seed=args.seed if args.seed is not None else 0,
        )
        result = run_bench(run)
    finally:
        if stub is not None:
            stub.stop()

    summary = summarize(result.samples) if len(result.samples) else None
    server_summary = summarize(result.server_exec) if result.server_exec else None
    if args.format == "json":
        _emit({
            "attempts": result.attempts,
            "samples": len(result.samples),
            "warmup_excluded": result.warmup_excluded,
            "errors": dict(result.errors),
            "error_ratio": result.error_ratio,
            "max_schedule_error_ms": result.max_schedule_error_ms,
            "summary": None if summary is None else summary_to_dict(summary),
            "server_exec_summary": None if server_summary is None else summary_to_dict(server_summary),
        }, args)
    else:
        print(f"attempts            {result.attempts}")
        print(f"samples             {len(result.samples)}")
        print(f"warmup excluded     {result.warmup_excluded}")
        error_text = (
            " ".join(f"{k}={v}" for k, v in sorted(result.errors.items())) or "none"
        )
        print(f"errors              {error_text}")
        print(f"max schedule error  {result.max_schedule_error_ms:.2f} ms")
        if summary is not None or server_summary is not None:
            print()
            rows = []
            if summary is not None:
                rows.append(("latency_ms", summary))
            if server_summary is not None:
                rows.append(("server_ms", server_summary))
            print(format_summary_table(rows))
    if args.out:
        export_run(result, args.out)
    if args.max_error_ratio is not None and result.error_ratio > args.max_error_ratio:
        print(
            f"error ratio {result.error_ratio:.4f} exceeds budget {args.max_error_ratio}",
            file=sys.stderr,
        )
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=("table", "json"), default="table",
                        help="output format (default: table)")
    parser.add_argument("--profile-dir", type=Path, default=None,
                        help="directory with providers.json / pricing.json / runtimes.json overrides")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faasplan",
        description="Plan, simulate and benchmark serverless deployments of compact ML models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a deployment plan against provider limits")
    _add_common(p)
    p.add_argument("--scenario", required=True, help="scenario JSON with a package block")
    p.add_argument("--provider", help="override the scenario provider")
    p.add_argument("--memory-mb", type=int, default=None, help="override the plan memory")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("select", help="pick the best model that fits a size budget")
    _add_common(p)
    p.add_argument("--catalog", required=True, help="built-in catalog name or a JSON path")
    p.add_argument("--provider", help="take the package budget from this provider")
    p.add_argument("--max-package-mb", type=float, default=None,
                   help="explicit package budget in MB")
    p.add_argument("--metric", required=True, help="objective metric name")
    p.add_argument("--min-score", type=float, default=None, help="minimum acceptable score")
    p.add_argument("--runtime", default="onnxruntime", help="runtime library (default: onnxruntime)")
    p.add_argument("--code-mb", type=float, default=1.0, help="function code size (default: 1 MB)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", help="run a seeded deployment simulation")
    _add_common(p)
    p.add_argument("--scenario", required=True, help="scenario JSON with profile/traffic/simulation")
    p.add_argument("--memory-sweep", default=None,
                   help="comma-separated memory sizes in MB, one run per size")
    p.add_argument("--out", default=None,
                   help="output prefix; writes <out>.csv and <out>.json (or <out>_sweep.csv)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cost", help="price a workload against a VM baseline")
    _add_common(p)
    p.add_argument("--scenario", default=None, help="scenario JSON with a cost block")
    p.add_argument("--result", default=None,
                   help="price a simulation result (.json) or sample CSV instead")
    p.add_argument("--pricing", default=None, help="pricing profile name (default: aws)")
    p.add_argument("--vm", type=Decimal, default=None, help="override the VM monthly price")
    p.add_argument("--months", type=Decimal, default=None, help="billing horizon (default: 1)")
    p.add_argument("--memory-mb", type=int, default=None,
                   help="memory for CSV results (default: 1024)")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("bench", help="open-loop load generation against a live endpoint")
    _add_common(p)
    p.add_argument("--url", default=None, help="endpoint to hit")
    p.add_argument("--payload-file", default=None, help="request body file")
    p.add_argument("--method", default="POST", help="HTTP method (default: POST)")
    p.add_argument("--rate", type=float, default=1.0, help="requests per second (default: 1)")
    p.add_argument("--duration", type=float, default=10.0, help="run length in seconds (default: 10)")
    p.add_argument("--pattern", choices=("steady", "poisson"), default="steady",
                   help="send schedule (default: steady)")
    p.add_argument("--warmup", type=int, default=10,
                   help="successful responses to exclude up front (default: 10)")
    p.add_argument("--timeout-ms", type=float, default=10_000.0,
                   help="per-request timeout (default: 10000)")
    p.add_argument("--limits-profile", default=None,
                   help="provider whose request cap the payload must pass")
    p.add_argument("--max-error-ratio", type=float, default=None,
                   help="fail the run when the error ratio exceeds this")
    p.add_argument("--out", default=None, help="write post-warmup samples to this CSV")
    p.add_argument("--stub", action="store_true",
                   help="bench the built-in stub server instead of a real endpoint")
    p.add_argument("--stub-delay-ms", type=float, default=50.0,
                   help="stub response delay (default: 50)")
    p.add_argument("--stub-jitter-ms", type=float, default=0.0,
                   help="uniform extra stub delay (default: 0)")
    p.add_argument("--stub-fail-every", type=int, default=None,
                   help="stub fails every k-th request with HTTP 500")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    store = ProfileStore(args.profile_dir)
    try:
        return args.func(args, store)
    except BrokenPipeError:
        # Downstream consumer (head, less) went away; suppress the flush error.
        devnull = os.open(os.devnull, os.O_WRONLY)
        os.dup2(devnull, sys.stdout.fileno())
        return 1
    except NoFeasibleModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for name, reason in exc.rejections.items():
            print(f"  {name}: {reason}", file=sys.stderr)
        return 1
    except PreflightError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.report.violations:
            print(f"  {v.limit_name}: {v.actual_value} B > {v.limit_value} B limit", file=sys.stderr)
        return 1
    except (ScenarioError, CatalogError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FaasPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
