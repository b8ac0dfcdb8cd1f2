import json
import subprocess
import sys
from decimal import Decimal
from pathlib import Path

import pytest

from faasplan import GB, SampleSet, load_pricing, serverless_cost_total, write_samples_csv
from faasplan.cli import main
from faasplan.simulator import load_result_json

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_validate_passing_plan(capsys):
    code = run_cli("validate", "--scenario", SCENARIOS / "tinybert_aws.json")
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out
    assert "provider  aws" in out


def test_validate_failing_plan(capsys):
    code = run_cli("validate", "--scenario", SCENARIOS / "bert_base_aws.json")
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out
    assert "package_size" in out


def test_validate_provider_override_rescues_plan(capsys):
    # the same package fits gcp's larger cap
    code = run_cli("validate", "--scenario", SCENARIOS / "bert_base_aws.json",
                   "--provider", "gcp")
    assert code == 0
    assert "PASS" in capsys.readouterr().out


def test_validate_json_format(capsys):
    code = run_cli("validate", "--scenario", SCENARIOS / "bert_base_aws.json",
                   "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 1
    assert payload["passed"] is False
    assert payload["violations"][0]["limit_name"] == "package_size"
    assert payload["provider"] == "aws"


def test_select_from_provider_budget(capsys):
    code = run_cli("select", "--catalog", "sentiment", "--provider", "aws",
                   "--metric", "f1_macro")
    out = capsys.readouterr().out
    assert code == 0
    assert "selected  MobileBERT" in out
    assert "exceeds" in out  # rationale table shows why larger models lost


def test_select_tight_budget(capsys):
    code = run_cli("select", "--catalog", "sentiment", "--max-package-mb", "90",
                   "--metric", "f1_macro")
    assert code == 0
    assert "selected  TinyBERT" in capsys.readouterr().out


def test_select_sts_target_metric(capsys):
    code = run_cli("select", "--catalog", "sts", "--provider", "aws",
                   "--metric", "spearman_target", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["selected"]["name"] == "AugSMobileBERT_target"
    assert payload["selected"]["metrics"]["spearman_target"] == 61.75
    assert len(payload["candidates"]) == 12


def test_select_no_feasible_model(capsys):
    code = run_cli("select", "--catalog", "sentiment", "--max-package-mb", "100",
                   "--metric", "f1_macro", "--min-score", "0.9")
    out = capsys.readouterr().out
    assert code == 1
    assert "no feasible model" in out


def test_select_unlimited_provider_needs_explicit_budget(capsys):
    code = run_cli("select", "--catalog", "sentiment", "--provider", "azure",
                   "--metric", "f1_macro")
    err = capsys.readouterr().err
    assert code == 2
    assert "does not cap package size" in err


def test_select_missing_catalog_file(capsys):
    code = run_cli("select", "--catalog", "/nonexistent/models.json",
                   "--max-package-mb", "100", "--metric", "f1_macro")
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_simulate_replay_scenario(capsys):
    code = run_cli("simulate", "--scenario", SCENARIOS / "smobilebert_replay.json")
    out = capsys.readouterr().out
    assert code == 0
    assert "requests          5000" in out
    assert "latency_ms" in out


def test_simulate_json_is_deterministic(capsys):
    args = ("simulate", "--scenario", SCENARIOS / "smobilebert_replay.json", "--format", "json")
    assert run_cli(*args) == 0
    first = capsys.readouterr().out
    assert run_cli(*args) == 0
    second = capsys.readouterr().out
    assert first == second
    payload = json.loads(first)
    assert payload["latency_summary"]["count"] == 5000


def test_simulate_seed_override_changes_draws(capsys):
    args = ("simulate", "--scenario", SCENARIOS / "smobilebert_replay.json", "--format", "json")
    run_cli(*args)
    base = capsys.readouterr().out
    run_cli(*args, "--seed", "999")
    reseeded = capsys.readouterr().out
    assert base != reseeded


def test_simulate_writes_outputs(tmp_path, capsys):
    prefix = tmp_path / "run"
    code = run_cli("simulate", "--scenario", SCENARIOS / "smobilebert_replay.json",
                   "--out", prefix)
    capsys.readouterr()
    assert code == 0
    assert (tmp_path / "run.csv").exists()
    result = load_result_json(tmp_path / "run.json")
    assert len(result.records) == 5000


def test_simulate_memory_sweep(capsys):
    code = run_cli("simulate", "--scenario", SCENARIOS / "memory_sweep.json",
                   "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    rows = payload["sweep"]
    assert [r["memory_mb"] for r in rows] == [256, 512, 1024, 2048, 4096]
    q50s = [r["latency_summary"]["q50_ms"] for r in rows]
    assert q50s == sorted(q50s, reverse=True)


def test_simulate_sweep_csv(tmp_path, capsys):
    prefix = tmp_path / "sweep"
    code = run_cli("simulate", "--scenario", SCENARIOS / "memory_sweep.json",
                   "--out", prefix)
    capsys.readouterr()
    assert code == 0
    lines = (tmp_path / "sweep_sweep.csv").read_text().splitlines()
    assert lines[0] == "memory_mb,count,mean_ms,q50_ms,q95_ms,q99_ms,cold_fraction,total_billed_gb_s"
    assert len(lines) == 6


def test_simulate_sweep_flag_overrides_scenario(capsys):
    code = run_cli("simulate", "--scenario", SCENARIOS / "memory_sweep.json",
                   "--memory-sweep", "512,1024", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert [r["memory_mb"] for r in payload["sweep"]] == [512, 1024]


def test_cost_scenario_table(capsys):
    code = run_cli("cost", "--scenario", SCENARIOS / "million_predictions.json")
    out = capsys.readouterr().out
    assert code == 0
    assert "1.8667" in out
    assert "8.00" in out
    assert "4285707 requests/month" in out


def test_cost_scenario_json_is_exact(capsys):
    code = run_cli("cost", "--scenario", SCENARIOS / "million_predictions.json",
                   "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["serverless_total"] == "1.86667"
    assert payload["vm_total"] == "8"
    assert payload["breakeven_requests_per_month"] == 4285707


def test_cost_from_simulation_result(tmp_path, capsys):
    prefix = tmp_path / "run"
    run_cli("simulate", "--scenario", SCENARIOS / "smobilebert_replay.json", "--out", prefix)
    capsys.readouterr()
    code = run_cli("cost", "--result", tmp_path / "run.json", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["assumptions"]["n_requests"] == 5000
    assert Decimal(payload["serverless_total"]) > 0


def test_cost_from_samples_csv_rebills_durations(tmp_path, capsys):
    path = tmp_path / "samples.csv"
    write_samples_csv(SampleSet.from_values([100.0, 150.5]), path)
    code = run_cli("cost", "--result", path, "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    # aws granularity 1 ms: 100 + 151 billed ms at the default 1024 MB
    expected = serverless_cost_total(2, 251, GB, load_pricing()["aws"])
    assert Decimal(payload["serverless_total"]) == expected
    assert payload["assumptions"]["billed_ms_per_request"] == "125.5"


def test_cost_needs_exactly_one_source(capsys):
    code = run_cli("cost", "--scenario", SCENARIOS / "million_predictions.json",
                   "--result", "x.json")
    assert code == 2
    assert "exactly one" in capsys.readouterr().err
    code = run_cli("cost")
    assert code == 2
    capsys.readouterr()


def test_cost_vm_override(capsys):
    code = run_cli("cost", "--scenario", SCENARIOS / "million_predictions.json",
                   "--vm", "40", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["vm_total"] == "40"
    assert payload["breakeven_requests_per_month"] > 4285707


def test_bench_stub_offline(capsys):
    code = run_cli("bench", "--stub", "--stub-delay-ms", "5", "--rate", "20",
                   "--duration", "1", "--warmup", "5", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["attempts"] == 20
    assert payload["samples"] == 15
    assert payload["errors"] == {}
    assert payload["summary"]["q50_ms"] >= 5.0
    assert payload["server_exec_summary"]["q50_ms"] == 5.0


def test_bench_error_budget_enforced(capsys):
    code = run_cli("bench", "--stub", "--stub-delay-ms", "0", "--stub-fail-every", "2",
                   "--rate", "20", "--duration", "0.5", "--warmup", "0",
                   "--max-error-ratio", "0.1")
    captured = capsys.readouterr()
    assert code == 1
    assert "exceeds budget" in captured.err


def test_bench_writes_samples(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = run_cli("bench", "--stub", "--stub-delay-ms", "1", "--rate", "10",
                   "--duration", "0.5", "--warmup", "0", "--out", out)
    capsys.readouterr()
    assert code == 0
    assert len(out.read_text().splitlines()) == 6  # header + 5 samples


def test_bench_needs_url_or_stub(capsys):
    code = run_cli("bench", "--rate", "1", "--duration", "1")
    assert code == 2
    assert "bench needs --url" in capsys.readouterr().err


def test_unknown_provider_exits_2(capsys):
    code = run_cli("validate", "--scenario", SCENARIOS / "tinybert_aws.json",
                   "--provider", "ibm")
    assert code == 2
    assert "unknown provider" in capsys.readouterr().err


def test_missing_scenario_exits_2(capsys):
    code = run_cli("validate", "--scenario", "/nonexistent/s.json")
    assert code == 2
    capsys.readouterr()


def test_profile_dir_override(tmp_path, capsys):
    # the override file replaces the bundled table, so it must also carry
    # the profile the scenario itself names
    (tmp_path / "pricing.json").write_text(json.dumps({
        "version": 1,
        "profiles": [
            {"name": "aws", "per_million_requests": 0.20, "per_gb_second": 0.0000166667},
            {"name": "flat", "per_million_requests": 1.0, "per_gb_second": 0.0},
        ],
    }))
    code = run_cli("cost", "--scenario", SCENARIOS / "million_predictions.json",
                   "--profile-dir", tmp_path, "--pricing", "flat", "--format", "json")
    payload = json.loads(capsys.readouterr().out)
    assert code == 0
    assert payload["serverless_total"] == "1"  # 1M requests at 1.0 per million


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "faasplan.cli", "validate",
         "--scenario", str(SCENARIOS / "tinybert_aws.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
