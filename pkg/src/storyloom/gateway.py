"""Provider gateway for structured-output chat completions.

Three interchangeable implementations share one calling convention:
``HttpGateway`` speaks an OpenAI-compatible ``/chat/completions`` API,
``MockGateway`` serves scripted responses for tests, and ``ReplayGateway`` /
``RecordingGateway`` persist digest→payload fixture files so whole runs
replay deterministically offline.

Only transport failures and 5xx responses are retried; refusals and
malformed payloads are terminal. API keys are read from the environment at
call time and never logged.
"""
from __future__ import annotations

import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Protocol

import httpx

from .errors import SchemaMismatchError, StoryloomError, ValidityError
from .prompts import PromptSpec

__all__ = [
    "GatewayConfig",
    "GatewayError",
    "TransportError",
    "GatewayTimeoutError",
    "AuthError",
    "RefusalError",
    "ReplayMissError",
    "ScriptError",
    "RequestRecord",
    "Gateway",
    "HttpGateway",
    "MockGateway",
    "ScriptRule",
    "ReplayGateway",
    "RecordingGateway",
    "load_fixture",
    "save_fixture",
]

logger = logging.getLogger(__name__)

ENV_API_KEY = "STORYLOOM_API_KEY"
ENV_BASE_URL = "STORYLOOM_BASE_URL"
ENV_MODEL = "STORYLOOM_MODEL"
ENV_MAX_PARALLEL = "STORYLOOM_MAX_PARALLEL"


class GatewayError(StoryloomError):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """Network failure or non-success HTTP status."""


class GatewayTimeoutError(TransportError):
    """The provider did not answer within the configured timeout."""


class AuthError(GatewayError):
    """Missing or rejected credentials."""


class RefusalError(GatewayError):
    """The provider declined to produce the requested content."""


class ReplayMissError(GatewayError):
    """A replayed request has no recorded response."""

    def __init__(self, digest: str):
        super().__init__(f"no recorded response for request digest {digest}")
        self.digest = digest


class ScriptError(GatewayError):
    """A scripted request matched no rule, or more than one."""


@dataclass(frozen=True)
class GatewayConfig:
    base_url: str = ""
    api_key_env: str = ENV_API_KEY
    model: str = ""
    timeout_s: float = 60.0
    max_retries: int = 2
    max_parallel: int = 8

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValidityError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ValidityError("max_retries must be >= 0")
        if self.max_parallel < 1:
            raise ValidityError("max_parallel must be >= 1")

    @classmethod
    def from_env(cls) -> "GatewayConfig":
        base_url = os.environ.get(ENV_BASE_URL, "")
        if not base_url:
            raise ValidityError(f"{ENV_BASE_URL} is not set")
        return cls(
            base_url=base_url,
            model=os.environ.get(ENV_MODEL, ""),
            max_parallel=int(os.environ.get(ENV_MAX_PARALLEL, "8")),
        )


@dataclass
class RequestRecord:
    purpose: str
    digest: str
    attempts: int
    ok: bool


class Gateway(Protocol):
    def complete_structured(self, prompt: PromptSpec) -> dict[str, Any]:
        """Return a payload conforming to ``prompt.response_schema`` or raise."""
        ...


class _FifoLimiter:
    """Bounds in-flight requests with first-come-first-served admission."""

    def __init__(self, limit: int):
        self._limit = limit
        self._cv = threading.Condition()
        self._queue: deque[int] = deque()
        self._active = 0
        self._ticket = 0

    def __enter__(self):
        with self._cv:
            self._ticket += 1
            ticket = self._ticket
            self._queue.append(ticket)
            while not (self._active < self._limit and self._queue[0] == ticket):
                self._cv.wait()
            self._queue.popleft()
            self._active += 1
        return self

    def __exit__(self, *exc):
        with self._cv:
            self._active -= 1
            self._cv.notify_all()


class _RecordingMixin:
    history: list[RequestRecord]

    def _record(self, prompt: PromptSpec, attempts: int, ok: bool) -> None:
        self.history.append(
            RequestRecord(purpose=prompt.purpose, digest=prompt.digest, attempts=attempts, ok=ok)
        )


class HttpGateway(_RecordingMixin):
    """Real client for an OpenAI-compatible chat-completions endpoint."""

    def __init__(
        self,
        config: GatewayConfig,
        transport: httpx.BaseTransport | None = None,
        sleeper: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self.history = []
        self._sleeper = sleeper
        self._limiter = _FifoLimiter(config.max_parallel)
        self._client = httpx.Client(timeout=config.timeout_s, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise AuthError(f"API key environment variable {self.config.api_key_env} is not set")
        return key

    def complete_structured(self, prompt: PromptSpec) -> dict[str, Any]:
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt.text}],
            "response_format": {
                "type": "json_schema",
                "json_schema": {
                    "name": prompt.purpose,
                    "strict": True,
                    "schema": prompt.response_schema,
                },
            },
        }
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        headers = {"Authorization": f"Bearer {self._api_key()}"}

        attempts = 0
        last_error: GatewayError | None = None
        with self._limiter:
            while attempts <= self.config.max_retries:
                attempts += 1
                logger.debug(
                    "gateway request purpose=%s digest=%s attempt=%d",
                    prompt.purpose,
                    prompt.digest[:12],
                    attempts,
                )
                try:
                    response = self._client.post(url, json=body, headers=headers)
                except httpx.TimeoutException as exc:
                    last_error = GatewayTimeoutError(f"request timed out: {exc}")
                except httpx.TransportError as exc:
                    last_error = TransportError(f"transport failure: {exc}")
                else:
                    if response.status_code in (401, 403):
                        self._record(prompt, attempts, ok=False)
                        raise AuthError(f"provider rejected credentials ({response.status_code})")
                    if response.status_code >= 500:
                        last_error = TransportError(f"server error {response.status_code}")
                    elif response.status_code != 200:
                        self._record(prompt, attempts, ok=False)
                        raise TransportError(f"unexpected status {response.status_code}")
                    else:
                        payload = self._parse(response)
                        self._record(prompt, attempts, ok=True)
                        return payload
                if attempts <= self.config.max_retries:
                    self._sleeper(0.5 * (2 ** (attempts - 1)))
        self._record(prompt, attempts, ok=False)
        assert last_error is not None
        raise last_error

    def _parse(self, response: httpx.Response) -> dict[str, Any]:
        try:
            data = response.json()
            choice = data["choices"][0]
            message = choice["message"]
        except (ValueError, KeyError, IndexError) as exc:
            raise SchemaMismatchError("choices[0].message", f"malformed response: {exc}")
        if message.get("refusal") or choice.get("finish_reason") == "content_filter":
            raise RefusalError(str(message.get("refusal") or "content filtered"))
        content = message.get("content")
        if not isinstance(content, str):
            raise SchemaMismatchError("choices[0].message.content", "missing content")
        try:
            payload = json.loads(content)
        except json.JSONDecodeError as exc:
            raise SchemaMismatchError("choices[0].message.content", f"invalid JSON: {exc}")
        if not isinstance(payload, dict):
            raise SchemaMismatchError("choices[0].message.content", "payload is not an object")
        return payload


@dataclass
class ScriptRule:
    """Matches requests by purpose and/or prompt substring; serves one response."""

    purpose: str | None = None
    contains: str | None = None
    payload: dict[str, Any] | None = None
    error: Exception | None = None

    def matches(self, prompt: PromptSpec) -> bool:
        if self.purpose is not None and self.purpose != prompt.purpose:
            return False
        if self.contains is not None and self.contains not in prompt.text:
            return False
        return True


class MockGateway(_RecordingMixin):
    """Deterministic scripted gateway; touches no network and fails loudly."""

    def __init__(self, rules: list[ScriptRule] | None = None):
        self.rules = rules or []
        self.history = []
        self._lock = threading.Lock()

    def add(self, **kwargs) -> "MockGateway":
        self.rules.append(ScriptRule(**kwargs))
        return self

    def complete_structured(self, prompt: PromptSpec) -> dict[str, Any]:
        hits = [rule for rule in self.rules if rule.matches(prompt)]
        if len(hits) != 1:
            with self._lock:
                self._record(prompt, attempts=1, ok=False)
            detail = "no script rule" if not hits else f"{len(hits)} script rules"
            raise ScriptError(
                f"{detail} matched request purpose={prompt.purpose!r} digest={prompt.digest[:12]}"
            )
        rule = hits[0]
        with self._lock:
            self._record(prompt, attempts=1, ok=rule.error is None)
        if rule.error is not None:
            raise rule.error
        assert rule.payload is not None
        return rule.payload


_ERROR_KINDS: dict[str, type[GatewayError]] = {
    "refusal": RefusalError,
    "transport": TransportError,
    "timeout": GatewayTimeoutError,
    "auth": AuthError,
}


def load_fixture(path: str | Path) -> dict[str, Any]:
    data = json.loads(Path(path).read_text("utf-8"))
    if data.get("version") != 1:
        raise ValidityError(f"unsupported fixture version {data.get('version')!r}, expected 1")
    return data["responses"]


def save_fixture(path: str | Path, responses: dict[str, Any]) -> None:
    """Write a fixture file atomically, replacing any previous one."""
    path = Path(path)
    doc = {"version": 1, "responses": responses}
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n", "utf-8")
    os.replace(tmp, path)


class ReplayGateway(_RecordingMixin):
    """Serves recorded digest→payload pairs; a miss names the digest.

    A recorded payload of the form ``{"$error": "refusal", ...}`` raises the
    corresponding gateway error, so failure paths replay offline too.
    """

    def __init__(self, source: str | Path | dict[str, Any]):
        if isinstance(source, (str, Path)):
            self.responses = load_fixture(source)
        else:
            self.responses = dict(source)
        self.history = []
        self._lock = threading.Lock()

    def complete_structured(self, prompt: PromptSpec) -> dict[str, Any]:
        payload = self.responses.get(prompt.digest)
        with self._lock:
            self._record(prompt, attempts=1, ok=payload is not None)
        if payload is None:
            raise ReplayMissError(prompt.digest)
        if isinstance(payload, dict) and "$error" in payload:
            kind = _ERROR_KINDS.get(payload["$error"], GatewayError)
            raise kind(payload.get("message", payload["$error"]))
        return payload


class RecordingGateway(_RecordingMixin):
    """Wraps another gateway, capturing digest→payload pairs into a fixture."""

    def __init__(self, inner: Gateway, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self.responses: dict[str, Any] = {}
        self.history = []
        self._lock = threading.Lock()

    def complete_structured(self, prompt: PromptSpec) -> dict[str, Any]:
        payload = self.inner.complete_structured(prompt)
        with self._lock:
            self.responses[prompt.digest] = payload
            self._record(prompt, attempts=1, ok=True)
        return payload

    def flush(self) -> None:
        save_fixture(self.path, self.responses)

    def __enter__(self) -> "RecordingGateway":
        return self

    def __exit__(self, *exc) -> None:
        self.flush()
