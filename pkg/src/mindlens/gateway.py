"""Uniform access to chat-completion backends, live HTTP or deterministic mock.

The wire protocol is OpenAI-compatible chat completions: POST a JSON body
with model, messages[{role, content}], temperature, and max_tokens; the
reply text is read from choices[0].message.content. Remote failures never
raise out of complete(): exhausted retries produce a failed result.

complete_batch is the only concurrency point in the pipeline — it fans out
to at most max_in_flight worker threads and paces issuance to the
configured requests-per-minute budget.
"""

from __future__ import annotations

import json
import os
import random
import re
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import httpx

from .util import ValidationError, write_json


class BackendUnavailable(Exception):
    """Transient backend failure (transport error, 429, 5xx); retryable."""


class BackendRejected(Exception):
    """Permanent per-call rejection (non-429 4xx); not retryable."""


@dataclass(frozen=True)
class MockRule:
    """Canned response selected by task tag (over the system prompt) and a
    regex over the user prompt; first matching rule wins."""

    response: str
    task: str | None = None
    pattern: str | None = None


@dataclass(frozen=True)
class MockSpec:
    rules: tuple[MockRule, ...] = ()
    default_response: str = ""
    delay_ms: int = 0
    fail_first_attempts: int = 0


@dataclass(frozen=True)
class BackendConfig:
    name: str
    kind: str = "http"  # "http" or "mock"
    endpoint: str = ""
    model_id: str = ""
    temperature: float = 0.0
    max_output_tokens: int = 512
    timeout_ms: int = 30_000
    max_retries: int = 2
    max_in_flight: int = 4
    requests_per_minute: int | None = None
    api_key_env: str | None = None
    retry_base_ms: int = 500
    retry_cap_ms: int = 30_000
    mock: MockSpec | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("backend name must be non-empty")
        if self.kind not in ("http", "mock"):
            raise ValidationError(f"backend {self.name}: unknown kind {self.kind!r}")
        if self.kind == "http" and not re.match(r"^https?://", self.endpoint):
            raise ValidationError(
                f"backend {self.name}: endpoint must be an http(s) URL, got {self.endpoint!r}"
            )
        if self.temperature < 0:
            raise ValidationError(f"backend {self.name}: temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValidationError(f"backend {self.name}: max_output_tokens must be positive")
        if self.timeout_ms <= 0:
            raise ValidationError(f"backend {self.name}: timeout_ms must be positive")
        if self.max_retries < 0:
            raise ValidationError(f"backend {self.name}: max_retries must be >= 0")
        if self.max_in_flight <= 0:
            raise ValidationError(f"backend {self.name}: max_in_flight must be positive")
        if self.requests_per_minute is not None and self.requests_per_minute <= 0:
            raise ValidationError(
                f"backend {self.name}: requests_per_minute must be positive or null"
            )


@dataclass(frozen=True)
class CompletionResult:
    """One completed (or exhausted) request. latency_ms covers the successful
    attempt, or the last failed one; failure normally means retry exhaustion
    (attempts = max_retries + 1), except for permanent rejections."""

    text: str
    latency_ms: int
    attempts: int
    backend: str
    failed: bool


class MockBackend:
    """Rule-driven stand-in for a chat-completion service.

    Thread-safe; instruments in-flight concurrency so tests can assert the
    gateway's fan-out bound. The failure schedule fails the first N attempts
    of each distinct prompt before succeeding.
    """

    def __init__(self, config: BackendConfig):
        spec = config.mock or MockSpec()
        self.config = config
        self.spec = spec
        self._compiled = [
            (rule, re.compile(rule.pattern) if rule.pattern else None)
            for rule in spec.rules
        ]
        self._lock = threading.Lock()
        self._attempts_by_key: dict[int, int] = {}
        self.calls = 0
        self.in_flight = 0
        self.peak_in_flight = 0

    def send(self, system: str, user: str) -> str:
        with self._lock:
            self.calls += 1
            self.in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
            key = hash((system, user))
            self._attempts_by_key[key] = self._attempts_by_key.get(key, 0) + 1
            attempt = self._attempts_by_key[key]
        try:
            if self.spec.delay_ms > 0:
                time.sleep(self.spec.delay_ms / 1000.0)
            if attempt <= self.spec.fail_first_attempts:
                raise BackendUnavailable(f"mock scheduled failure (attempt {attempt})")
            return self._respond(system, user)
        finally:
            with self._lock:
                self.in_flight -= 1

    def _respond(self, system: str, user: str) -> str:
        system_lower = system.lower()
        for rule, pattern in self._compiled:
            if rule.task is not None and rule.task.lower() not in system_lower:
                continue
            if pattern is not None and pattern.search(user) is None:
                continue
            return rule.response
        return self.spec.default_response


class HttpBackend:
    """OpenAI-compatible chat-completions client over httpx.

    Bearer credentials come from the environment variable named in the
    config, never from flags or files.
    """

    def __init__(self, config: BackendConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {"Content-Type": "application/json"}
        if config.api_key_env:
            token = os.environ.get(config.api_key_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(
            timeout=config.timeout_ms / 1000.0, headers=headers, transport=transport
        )

    def send(self, system: str, user: str) -> str:
        body = {
            "model": self.config.model_id,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_output_tokens,
        }
        try:
            response = self._client.post(self.config.endpoint, json=body)
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"transport error: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            raise BackendUnavailable(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise BackendRejected(f"HTTP {response.status_code}: {response.text[:200]}")
        try:
            payload = response.json()
            return str(payload["choices"][0]["message"]["content"])
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendUnavailable(f"malformed completion payload: {exc}") from exc

    def close(self) -> None:
        self._client.close()


Backend = MockBackend | HttpBackend


def build_backend(config: BackendConfig) -> Backend:
    if config.kind == "mock":
        return MockBackend(config)
    return HttpBackend(config)


def _backoff_sleep(config: BackendConfig, attempt: int, rng: random.Random) -> None:
    # Exponential backoff with full jitter: uniform over [0, min(cap, base * 2^n)].
    cap = config.retry_cap_ms / 1000.0
    base = config.retry_base_ms / 1000.0
    upper = min(cap, base * (2**attempt))
    time.sleep(rng.uniform(0, upper))


def complete(
    backend: Backend | BackendConfig, system_prompt: str, user_prompt: str
) -> CompletionResult:
    """Run one completion with retries; never raises for remote errors."""
    if isinstance(backend, BackendConfig):
        backend = build_backend(backend)
    if not system_prompt or not user_prompt:
        raise ValidationError("prompts must be non-empty")
    config = backend.config
    rng = random.Random()
    latency_ms = 0
    for attempt in range(config.max_retries + 1):
        start = time.perf_counter()
        try:
            text = backend.send(system_prompt, user_prompt)
        except BackendUnavailable:
            latency_ms = int(round((time.perf_counter() - start) * 1000))
            if attempt < config.max_retries:
                _backoff_sleep(config, attempt, rng)
            continue
        except BackendRejected:
            latency_ms = int(round((time.perf_counter() - start) * 1000))
            return CompletionResult(
                text="",
                latency_ms=latency_ms,
                attempts=attempt + 1,
                backend=config.name,
                failed=True,
            )
        latency_ms = int(round((time.perf_counter() - start) * 1000))
        return CompletionResult(
            text=text,
            latency_ms=latency_ms,
            attempts=attempt + 1,
            backend=config.name,
            failed=False,
        )
    return CompletionResult(
        text="",
        latency_ms=latency_ms,
        attempts=config.max_retries + 1,
        backend=config.name,
        failed=True,
    )


class _RateLimiter:
    """Paces request issuance to at most requests_per_minute."""

    def __init__(self, requests_per_minute: int | None):
        self._interval = 60.0 / requests_per_minute if requests_per_minute else 0.0
        self._lock = threading.Lock()
        self._next_free = 0.0

    def acquire(self) -> None:
        if self._interval <= 0:
            return
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next_free)
            self._next_free = slot + self._interval
        wait = slot - now
        if wait > 0:
            time.sleep(wait)


def complete_batch(
    backend: Backend | BackendConfig,
    prompts: Sequence[tuple[str, str, str]],
) -> list[tuple[str, CompletionResult]]:
    """Complete (id, system, user) prompts, preserving input order.

    At most max_in_flight requests are outstanding at any instant; per-item
    failures are recorded in place and never abort the batch.
    """
    if isinstance(backend, BackendConfig):
        backend = build_backend(backend)
    ids = [item[0] for item in prompts]
    if len(set(ids)) != len(ids):
        raise ValidationError("complete_batch prompt ids must be unique")
    if not prompts:
        return []
    limiter = _RateLimiter(backend.config.requests_per_minute)

    def run(item: tuple[str, str, str]) -> CompletionResult:
        limiter.acquire()
        return complete(backend, item[1], item[2])

    with ThreadPoolExecutor(max_workers=backend.config.max_in_flight) as pool:
        futures = [pool.submit(run, item) for item in prompts]
        return [(item[0], fut.result()) for item, fut in zip(prompts, futures)]


@dataclass(frozen=True)
class BenchReport:
    backend: str
    n_prompts: int
    total_wall_ms: int
    mean_latency_ms: float
    median_latency_ms: float
    p95_latency_ms: float
    failures: int

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "n_prompts": self.n_prompts,
            "total_wall_ms": self.total_wall_ms,
            "mean_latency_ms": self.mean_latency_ms,
            "median_latency_ms": self.median_latency_ms,
            "p95_latency_ms": self.p95_latency_ms,
            "failures": self.failures,
        }


def bench(
    backend: Backend | BackendConfig,
    prompts: Sequence[tuple[str, str, str]],
    out: str | Path | None = None,
) -> BenchReport:
    """Time a batch and summarize wall time and latency percentiles."""
    if not prompts:
        raise ValidationError("bench requires at least one prompt")
    if isinstance(backend, BackendConfig):
        backend = build_backend(backend)
    start = time.perf_counter()
    results = complete_batch(backend, prompts)
    wall_ms = int(round((time.perf_counter() - start) * 1000))
    latencies = sorted(result.latency_ms for _, result in results)
    p95_index = max(0, -(-95 * len(latencies) // 100) - 1)
    report = BenchReport(
        backend=backend.config.name,
        n_prompts=len(prompts),
        total_wall_ms=wall_ms,
        mean_latency_ms=round(statistics.fmean(latencies), 3),
        median_latency_ms=float(statistics.median(latencies)),
        p95_latency_ms=float(latencies[p95_index]),
        failures=sum(1 for _, result in results if result.failed),
    )
    if out is not None:
        write_json(out, report.to_dict())
    return report


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------


def _mock_spec_from_dict(obj: dict) -> MockSpec:
    rules = tuple(
        MockRule(
            response=str(rule["response"]),
            task=rule.get("task"),
            pattern=rule.get("pattern"),
        )
        for rule in obj.get("rules", ())
    )
    return MockSpec(
        rules=rules,
        default_response=str(obj.get("default_response", "")),
        delay_ms=int(obj.get("delay_ms", 0)),
        fail_first_attempts=int(obj.get("fail_first_attempts", 0)),
    )


def backend_config_from_dict(obj: dict) -> BackendConfig:
    try:
        return BackendConfig(
            name=str(obj["name"]),
            kind=str(obj.get("kind", "http")),
            endpoint=str(obj.get("endpoint", "")),
            model_id=str(obj.get("model_id", "")),
            temperature=float(obj.get("temperature", 0.0)),
            max_output_tokens=int(obj.get("max_output_tokens", 512)),
            timeout_ms=int(obj.get("timeout_ms", 30_000)),
            max_retries=int(obj.get("max_retries", 2)),
            max_in_flight=int(obj.get("max_in_flight", 4)),
            requests_per_minute=(
                int(obj["requests_per_minute"])
                if obj.get("requests_per_minute") is not None
                else None
            ),
            api_key_env=obj.get("api_key_env"),
            retry_base_ms=int(obj.get("retry_base_ms", 500)),
            retry_cap_ms=int(obj.get("retry_cap_ms", 30_000)),
            mock=_mock_spec_from_dict(obj["mock"]) if obj.get("mock") else None,
        )
    except KeyError as exc:
        raise ValidationError(f"backend config missing required field: {exc}") from exc


def load_backend_configs(path: str | Path) -> dict[str, BackendConfig]:
    """Load a backends file: {"backends": [BackendConfig...]}; names must be unique."""
    path = Path(path)
    obj = json.loads(path.read_text(encoding="utf-8"))
    entries = obj.get("backends", obj if isinstance(obj, list) else None)
    if not isinstance(entries, list):
        raise ValidationError(f"{path}: expected a 'backends' array")
    configs: dict[str, BackendConfig] = {}
    for entry in entries:
        config = backend_config_from_dict(entry)
        if config.name in configs:
            raise ValidationError(f"{path}: duplicate backend name {config.name!r}")
        configs[config.name] = config
    return configs
