"""Completion backends and completion post-processing.

Two implementations of the same contract: a remote HTTP chat-completion
backend (de-facto industry JSON schema) and a scripted deterministic
backend used for reproducible tests and offline runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from .errors import BackendUnavailableError, NoScriptMatchError, RateLimitedError

_FENCE = "```"


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_tokens: int = 512
    temperature: float = 0.0
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    backend_id: str
    latency: float


class CompletionBackend(Protocol):
    backend_id: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


@dataclass(frozen=True)
class ScriptRule:
    match: str  # "substring" or "hash" (sha256 hex of the full prompt)
    pattern: str
    completion: str

    def matches(self, prompt: str) -> bool:
        if self.match == "substring":
            return self.pattern in prompt
        if self.match == "hash":
            return hashlib.sha256(prompt.encode("utf-8")).hexdigest() == self.pattern
        raise ValueError(f"unknown matcher kind {self.match!r}")


@dataclass
class ScriptedBackend:
    """Deterministic canned-completion backend; first matching rule wins."""

    rules: list[ScriptRule]
    default: str | None = None
    backend_id: str = "scripted"

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        rules = [
            ScriptRule(match=r["match"], pattern=r["pattern"], completion=r["completion"])
            for r in data["rules"]
        ]
        return cls(
            rules=rules,
            default=data.get("default"),
            backend_id=data.get("backend_id", "scripted"),
        )

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        for rule in self.rules:
            if rule.matches(request.prompt):
                return CompletionResponse(
                    text=rule.completion, backend_id=self.backend_id, latency=0.0
                )
        if self.default is not None:
            return CompletionResponse(text=self.default, backend_id=self.backend_id, latency=0.0)
        raise NoScriptMatchError("no script rule matched the prompt and no default is set")


@dataclass
class HttpCompletionBackend:
    """Chat-completion endpoint client with bounded retries.

    Retries transport errors, 5xx and 429 with exponential backoff;
    after the attempt budget, persistent rate limiting is surfaced as
    its own error so callers can tell it apart from an outage. In-flight
    requests are capped to respect provider rate limits.
    """

    endpoint: str
    model: str
    token_env: str = "CODELOOP_API_TOKEN"
    max_attempts: int = 3
    backoff_base: float = 1.0
    request_timeout: float = 60.0
    max_in_flight: int = 4
    backend_id: str = "http"
    _session: requests.Session = field(default_factory=requests.Session, repr=False)

    def __post_init__(self):
        self._gate = threading.BoundedSemaphore(self.max_in_flight)

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "stop": list(request.stop_sequences),
        }
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"

        start = time.monotonic()
        last_error: str = ""
        rate_limited = False
        with self._gate:
            for attempt in range(self.max_attempts):
                if attempt:
                    time.sleep(self.backoff_base * (2 ** (attempt - 1)))
                try:
                    resp = self._session.post(
                        self.endpoint, json=body, headers=headers, timeout=self.request_timeout
                    )
                except requests.RequestException as exc:
                    last_error, rate_limited = str(exc), False
                    continue
                if resp.status_code == 429:
                    last_error, rate_limited = "rate limited (429)", True
                    continue
                if resp.status_code >= 500:
                    last_error, rate_limited = f"server error ({resp.status_code})", False
                    continue
                if resp.status_code >= 400:
                    raise BackendUnavailableError(
                        f"completion request rejected ({resp.status_code}): {resp.text[:500]}"
                    )
                try:
                    text = resp.json()["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    raise BackendUnavailableError(
                        f"malformed completion response: {exc}"
                    ) from exc
                return CompletionResponse(
                    text=text, backend_id=self.backend_id, latency=time.monotonic() - start
                )
        if rate_limited:
            raise RateLimitedError(
                f"still rate limited after {self.max_attempts} attempts"
            )
        raise BackendUnavailableError(
            f"backend unavailable after {self.max_attempts} attempts: {last_error}"
        )


def complete(request: CompletionRequest, backend: CompletionBackend) -> CompletionResponse:
    return backend.complete(request)


def extract_code(completion: str) -> str:
    """Pull runnable code out of a raw completion.

    Returns the contents of the first fenced block if any, otherwise the
    completion itself with leading/trailing blank lines stripped. Bad
    extractions are not an error: the sandbox's compile check catches them.
    """
    lines = completion.split("\n")
    open_idx = None
    for i, line in enumerate(lines):
        if line.strip().startswith(_FENCE):
            open_idx = i
            break
    if open_idx is None:
        return completion.strip("\n")
    body = []
    for line in lines[open_idx + 1:]:
        if line.strip().startswith(_FENCE):
            break
        body.append(line)
    return "\n".join(body).strip("\n")
