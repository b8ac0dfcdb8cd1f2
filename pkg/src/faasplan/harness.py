"""Open-loop HTTP load generation against live endpoints.

Requests leave on the traffic pattern's schedule regardless of how slowly
responses come back, so queueing delay shows up in the measurements
instead of silently throttling the generator. A built-in stub responder
makes fully offline runs possible.
"""

from __future__ import annotations

import gc
import random
import socket
import sys
import threading
import time
import urllib.error
import urllib.request
from collections import Counter
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Mapping

from .errors import DomainError, FaasPlanError, PreflightError
from .metrics import (
    DEFAULT_WARMUP,
    SampleRecorder,
    SampleSet,
    warmup_filter,
    write_samples_csv,
)
from .providers import ProviderLimits, ValidationReport, Violation
from .simulator import TrafficPattern, generate_arrivals

EXEC_TIME_HEADER = "X-Exec-Time-Ms"

# Scheduler lead time before the first request, so request zero is not
# already behind schedule while threads warm up.
_START_LEAD_S = 0.05
# Workers are spawned this far ahead of their send slot; thread start-up
# cost then lands inside the wait instead of delaying the send.
_SPAWN_LEAD_S = 0.02


@dataclass(frozen=True)
class BenchTarget:
    """One HTTP endpoint plus the request to hammer it with."""

    url: str
    method: str = "POST"
    headers: Mapping[str, str] = field(default_factory=dict)
    payload: bytes = b""
    timeout_ms: float = 10_000.0

    def __post_init__(self):
        if not self.url:
            raise DomainError("target url must be non-empty")
        if not isinstance(self.payload, (bytes, bytearray)):
            raise DomainError("payload must be bytes")
        object.__setattr__(self, "payload", bytes(self.payload))
        object.__setattr__(self, "headers", dict(self.headers))
        if self.timeout_ms <= 0:
            raise DomainError("timeout_ms must be positive")

    @property
    def payload_bytes(self) -> int:
        return len(self.payload)


def preflight(target: BenchTarget, limits: ProviderLimits) -> ValidationReport:
    """Check the request body against the provider's request-size cap."""
    violations = []
    if target.payload_bytes > limits.max_request_bytes:
        violations.append(
            Violation("request_size", limits.max_request_bytes, target.payload_bytes)
        )
    return ValidationReport(tuple(violations))


@dataclass(frozen=True)
class BenchRun:
    """Configuration of one load-generation run.

    When ``provider_limits`` is given, the run refuses to start if the
    payload would be rejected by that platform anyway.
    """

    target: BenchTarget
    pattern: TrafficPattern
    n_warmup: int = DEFAULT_WARMUP
    provider_limits: ProviderLimits | None = None
    seed: int = 0
    exec_time_header: str | None = EXEC_TIME_HEADER

    def __post_init__(self):
        if self.n_warmup < 0:
            raise DomainError("n_warmup must be non-negative")


@dataclass(frozen=True)
class BenchResult:
    """Outcome of a run: post-warmup samples plus full accounting.

    Every attempt lands in exactly one bucket, so
    ``len(samples) + warmup_excluded + sum(errors.values()) == attempts``.
    ``scheduled_ms``/``sent_ms`` are offsets from the run start for every
    attempt, in send order; their gap is the scheduling error.
    """

    attempts: int
    samples: SampleSet
    warmup_excluded: int
    errors: Mapping[str, int]
    scheduled_ms: tuple[float, ...]
    sent_ms: tuple[float, ...]
    server_exec: SampleSet | None = None

    def __post_init__(self):
        object.__setattr__(self, "errors", dict(self.errors))

    @property
    def error_total(self) -> int:
        return sum(self.errors.values())

    @property
    def error_ratio(self) -> float:
        return self.error_total / self.attempts if self.attempts else 0.0

    @property
    def max_schedule_error_ms(self) -> float:
        if not self.scheduled_ms:
            return 0.0
        return max(s - p for p, s in zip(self.scheduled_ms, self.sent_ms))


def _sleep_until(deadline: float) -> None:
    while True:
        remaining = deadline - time.perf_counter()
        if remaining <= 0:
            return
        time.sleep(remaining)


def _wait_until(deadline: float) -> None:
    # sleep() coarsely, then yield-spin the tail so a late OS wake-up
    # still leaves time to hit the deadline.
    while True:
        remaining = deadline - time.perf_counter()
        if remaining <= 0:
            return
        if remaining > 0.015:
            time.sleep(remaining - 0.015)
        else:
            time.sleep(0)


def _classify(exc: BaseException) -> str:
    if isinstance(exc, urllib.error.HTTPError):
        return "http"
    if isinstance(exc, (TimeoutError, socket.timeout)):
        return "timeout"
    if isinstance(exc, urllib.error.URLError) and isinstance(
        exc.reason, (TimeoutError, socket.timeout)
    ):
        return "timeout"
    return "transport"


def run_bench(run: BenchRun) -> BenchResult:
    """Fire the pattern at the target, open loop, and collect samples.

    Each request runs on its own thread so a slow response never delays
    the next send. Successful responses are timed from just before the
    send to the end of the body; the first ``n_warmup`` successes are
    excluded from the returned samples but still counted.

    Raises:
        PreflightError: if ``run.provider_limits`` is set and the payload
            exceeds the platform's request cap.
    """
    if run.provider_limits is not None:
        report = preflight(run.target, run.provider_limits)
        if not report.passed:
            raise PreflightError(
                f"payload of {run.target.payload_bytes} B exceeds "
                f"{run.provider_limits.name}'s request cap", report,
            )
    offsets_ms = generate_arrivals(run.pattern, run.seed)
    n = len(offsets_ms)
    recorder = SampleRecorder()
    exec_recorder = SampleRecorder()
    errors: Counter = Counter()
    errors_lock = threading.Lock()
    sent_ms = [0.0] * n
    data = run.target.payload or None
    # Built ahead of the schedule so the first send does not pay for it.
    opener = urllib.request.build_opener()

    # One sweep now; a cycle collection during the run stalls every
    # thread past its send slot on a loaded heap. Refcounting alone
    # frees each request and response as it drops.
    gc.collect()

    start = time.perf_counter() + _START_LEAD_S

    def fire(index: int, deadline: float) -> None:
        _wait_until(deadline)
        send = time.perf_counter()
        sent_ms[index] = (send - start) * 1000.0
        request = urllib.request.Request(
            run.target.url,
            data=data,
            method=run.target.method,
            headers=dict(run.target.headers),
        )
        try:
            with opener.open(request, timeout=run.target.timeout_ms / 1000.0) as resp:
                exec_header = (
                    resp.headers.get(run.exec_time_header) if run.exec_time_header else None
                )
                resp.read()
            duration = (time.perf_counter() - send) * 1000.0
        except Exception as exc:  # noqa: BLE001 - every failure is tallied, not raised
            with errors_lock:
                errors[_classify(exc)] += 1
            return
        recorder.record(duration, timestamp_ms=sent_ms[index])
        if exec_header is not None:
            try:
                exec_recorder.record(float(exec_header), timestamp_ms=sent_ms[index])
            except (ValueError, DomainError):
                pass

    threads = []
    # A shorter GIL slice keeps bytecode-heavy workers from sitting on
    # the interpreter while another worker's send slot comes up.
    switch_interval = sys.getswitchinterval()
    sys.setswitchinterval(0.001)
    gc_enabled = gc.isenabled()
    gc.disable()
    try:
        for i, offset in enumerate(offsets_ms):
            deadline = start + offset / 1000.0
            _sleep_until(deadline - _SPAWN_LEAD_S)
            worker = threading.Thread(target=fire, args=(i, deadline), daemon=True)
            worker.start()
            threads.append(worker)
        join_deadline = time.perf_counter() + run.target.timeout_ms / 1000.0 + 5.0
        for worker in threads:
            worker.join(timeout=max(0.0, join_deadline - time.perf_counter()))
    finally:
        sys.setswitchinterval(switch_interval)
        if gc_enabled:
            gc.enable()

    raw = recorder.snapshot()
    samples = warmup_filter(raw, run.n_warmup)
    exec_samples = exec_recorder.snapshot()
    return BenchResult(
        attempts=n,
        samples=samples,
        warmup_excluded=len(raw) - len(samples),
        errors=dict(errors),
        scheduled_ms=tuple(offsets_ms),
        sent_ms=tuple(sent_ms),
        server_exec=exec_samples if len(exec_samples) else None,
    )


def export_run(result: BenchResult, path: str | Path) -> None:
    """Write the post-warmup samples in the shared CSV format."""
    try:
        write_samples_csv(result.samples, path)
    except OSError as exc:
        raise FaasPlanError(f"cannot write samples to {path}: {exc}") from exc


class _StubHandler(BaseHTTPRequestHandler):
    server: "_StubHTTPServer"

    def _respond(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            self.rfile.read(length)
        index, delay_ms, fail = self.server.plan_response()
        if delay_ms > 0:
            time.sleep(delay_ms / 1000.0)
        body = b'{"ok": true}' if not fail else b'{"ok": false}'
        self.send_response(500 if fail else 200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header(EXEC_TIME_HEADER, repr(delay_ms))
        self.send_header("X-Request-Index", str(index))
        self.end_headers()
        self.wfile.write(body)

    do_GET = _respond
    do_POST = _respond

    def log_message(self, *args) -> None:  # silence per-request stderr noise
        pass


class _StubHTTPServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, handler, delay_ms, jitter_ms, fail_every, seed):
        super().__init__(address, handler)
        self._delay_ms = delay_ms
        self._jitter_ms = jitter_ms
        self._fail_every = fail_every
        self._rng = random.Random(seed)
        self._counter = 0
        self._lock = threading.Lock()

    def plan_response(self) -> tuple[int, float, bool]:
        with self._lock:
            self._counter += 1
            index = self._counter
            delay = self._delay_ms
            if self._jitter_ms:
                delay += self._rng.uniform(0.0, self._jitter_ms)
        fail = self._fail_every is not None and index % self._fail_every == 0
        return index, delay, fail


class StubServer:
    """Local HTTP responder with a configurable delay and failure schedule.

    Sleeps ``delay_ms`` (plus uniform jitter up to ``jitter_ms``) before
    answering, and fails every ``fail_every``-th request (1-based) with
    HTTP 500, deterministically. The applied delay is echoed in the
    ``X-Exec-Time-Ms`` response header. Usable as a context manager.
    """

    def __init__(
        self,
        delay_ms: float = 50.0,
        jitter_ms: float = 0.0,
        fail_every: int | None = None,
        seed: int = 0,
        port: int = 0,
    ):
        if delay_ms < 0 or jitter_ms < 0:
            raise DomainError("delay_ms and jitter_ms must be non-negative")
        if fail_every is not None and fail_every < 1:
            raise DomainError("fail_every must be at least 1")
        self._server = _StubHTTPServer(
            ("127.0.0.1", port), _StubHandler, delay_ms, jitter_ms, fail_every, seed
        )
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/"

    @property
    def requests_seen(self) -> int:
        return self._server._counter

    def start(self) -> "StubServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        self._server.server_close()

    def __enter__(self) -> "StubServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
