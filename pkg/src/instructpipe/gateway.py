"""Chat-completion client with retries and deterministic record/replay.

Three modes:
  live    one HTTP round trip (OpenAI-compatible shape) with exponential
          backoff on transient failures,
  record  live call, then the result is persisted keyed by request digest,
  replay  persisted result only; no network is ever touched.

Cassettes are line-delimited JSON so they diff cleanly in review.
"""

import hashlib
import json
import os
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import httpx

from .errors import (
    CassetteMiss,
    GatewayError,
    MalformedResponse,
    RateLimited,
    TransportError,
)

MODES = ("live", "record", "replay")

MAX_ATTEMPTS = 5
BACKOFF_BASE_S = 0.5
BACKOFF_CAP_S = 30.0

ENDPOINT_ENV = "INSTRUCTPIPE_ENDPOINT"
API_KEY_ENV = "INSTRUCTPIPE_API_KEY"


def request_digest(prompt: str, model: str, temperature: float, max_tokens: int) -> str:
    src = json.dumps(
        {"prompt": prompt, "model": model, "temperature": temperature, "max_tokens": max_tokens},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(src.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    model: str
    temperature: float = 0.7
    max_tokens: int = 4096

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @property
    def digest(self) -> str:
        return request_digest(self.prompt, self.model, self.temperature, self.max_tokens)


@dataclass(frozen=True)
class CompletionResult:
    text: str
    latency_ms: int = 0
    attempt_count: int = 1


class Cassette:
    """Append-only store of completed requests, keyed by request digest."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: Dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with self.path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    obj = json.loads(line)
                    self._entries[obj["request_digest"]] = obj["text"]

    def __contains__(self, digest: str) -> bool:
        return digest in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, digest: str) -> Optional[str]:
        return self._entries.get(digest)

    def put(self, req: CompletionRequest, text: str) -> None:
        digest = req.digest
        with self._lock:
            if digest in self._entries:
                return
            self._entries[digest] = text
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(
                    json.dumps(
                        {
                            "request_digest": digest,
                            "model": req.model,
                            "temperature": req.temperature,
                            "text": text,
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )


Transport = Callable[[CompletionRequest], str]


def http_transport(
    endpoint: Optional[str] = None,
    api_key: Optional[str] = None,
    timeout: float = 120.0,
) -> Transport:
    """OpenAI-compatible chat completion over HTTP.

    Endpoint and credential default to environment variables; the credential
    is never read from config files.
    """
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV, "")
    api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
    if not endpoint:
        raise TransportError(f"no endpoint configured (set {ENDPOINT_ENV})")

    def call(req: CompletionRequest) -> str:
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        }
        try:
            resp = httpx.post(endpoint, json=payload, headers=headers, timeout=timeout)
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code in (502, 503, 504):
            raise _Throttled(f"HTTP {resp.status_code}")
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            content = resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise MalformedResponse(str(exc)) from exc
        if not isinstance(content, str):
            raise MalformedResponse("content is not text")
        return content

    return call


class _Throttled(Exception):
    """Internal marker for retryable throttle responses."""


class Gateway:
    """Uniform completion client; safe for concurrent use."""

    def __init__(
        self,
        cassette: Optional[Cassette] = None,
        transport: Optional[Transport] = None,
        max_attempts: int = MAX_ATTEMPTS,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.cassette = cassette
        self._transport = transport
        self.max_attempts = max_attempts
        self._sleep = sleep
        self.network_calls = 0
        self._rng = random.Random()

    def _require_transport(self) -> Transport:
        if self._transport is None:
            self._transport = http_transport()
        return self._transport

    def _call_with_retries(self, req: CompletionRequest) -> CompletionResult:
        transport = self._require_transport()
        started = time.monotonic()
        last_exc: Exception = TransportError("no attempt made")
        for attempt in range(1, self.max_attempts + 1):
            try:
                self.network_calls += 1
                text = transport(req)
                latency = int((time.monotonic() - started) * 1000)
                return CompletionResult(text=text, latency_ms=latency, attempt_count=attempt)
            except _Throttled as exc:
                last_exc = RateLimited(str(exc))
            except TransportError as exc:
                last_exc = exc
            except MalformedResponse:
                raise
            if attempt < self.max_attempts:
                delay = min(BACKOFF_CAP_S, BACKOFF_BASE_S * (2 ** (attempt - 1)))
                self._sleep(delay * (0.5 + self._rng.random()))
        raise last_exc

    def complete(self, req: CompletionRequest, mode: str) -> CompletionResult:
        if mode not in MODES:
            raise ValueError(f"unknown mode: {mode}")
        if mode == "replay":
            if self.cassette is None:
                raise CassetteMiss(req.digest)
            text = self.cassette.get(req.digest)
            if text is None:
                raise CassetteMiss(req.digest)
            return CompletionResult(text=text, latency_ms=0, attempt_count=1)
        if mode == "record" and self.cassette is not None:
            cached = self.cassette.get(req.digest)
            if cached is not None:
                return CompletionResult(text=cached, latency_ms=0, attempt_count=1)
        result = self._call_with_retries(req)
        if mode == "record":
            if self.cassette is None:
                raise ValueError("record mode requires a cassette")
            self.cassette.put(req, result.text)
        return result

    def batch_complete(
        self,
        reqs: Sequence[CompletionRequest],
        parallelism: int,
        mode: str,
    ) -> List[Union[CompletionResult, GatewayError]]:
        """Complete many requests; results align index-to-index with inputs.

        Per-item failures are carried in the output list as the raised
        GatewayError, never aborting the batch.
        """
        if parallelism < 1:
            raise ValueError("parallelism must be >= 1")

        def one(req: CompletionRequest) -> Union[CompletionResult, GatewayError]:
            try:
                return self.complete(req, mode)
            except GatewayError as exc:
                return exc

        if not reqs:
            return []
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            return list(pool.map(one, reqs))
