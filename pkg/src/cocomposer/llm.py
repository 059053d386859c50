"""Chat-completion backends.

`HttpBackend` speaks the OpenAI-style ``/chat/completions`` protocol over
httpx with exponential-backoff retries; both the transport and the sleep
function are injectable so tests never touch the network or the clock.
`ScriptedBackend` replays canned replies keyed by agent name and turn
index for fully deterministic sessions.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import httpx

_ROLES = ("system", "user", "assistant")

# Statuses worth retrying; other 4xx failures are permanent.
_RETRYABLE_STATUSES = frozenset({408, 429})


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str
    author_name: str | None = None

    def __post_init__(self) -> None:
        if self.role not in _ROLES:
            raise ValueError(f"role must be one of {_ROLES}, got {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message must have content")


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    endpoint_url: str
    temperature: float = 0.7
    max_output_tokens: int = 4096
    request_timeout: float = 120.0
    max_retries: int = 3

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if not self.endpoint_url:
            raise ValueError("endpoint_url must be non-empty")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")


class BackendError(Exception):
    """A completion request failed.

    ``kind`` is one of ``timeout`` (network trouble), ``http_status``
    (non-retryable or persistently failing status), ``exhausted_script``
    (scripted backend ran out of replies) or ``malformed_response``.
    """

    def __init__(self, kind: str, message: str, status: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.status = status


class Backend(Protocol):
    def complete(self, config: ModelConfig, messages: Sequence[ChatMessage]) -> ChatMessage:
        ...


def _author(messages: Sequence[ChatMessage]) -> str | None:
    return messages[0].author_name if messages else None


class HttpBackend:
    """POSTs to ``{endpoint_url}/chat/completions`` with bearer auth."""

    def __init__(
        self,
        api_key: str | None = None,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self._api_key = api_key if api_key is not None else os.environ.get(
            "COCOMPOSER_API_KEY", ""
        )
        self._client = httpx.Client(transport=transport)
        self._sleep = sleep

    def complete(self, config: ModelConfig, messages: Sequence[ChatMessage]) -> ChatMessage:
        if not messages:
            raise ValueError("messages must be non-empty")
        if not self._api_key:
            raise ValueError("no API key (pass api_key or set COCOMPOSER_API_KEY)")
        url = config.endpoint_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": config.model_id,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": config.temperature,
            "max_tokens": config.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {self._api_key}"}
        last_error: BackendError | None = None
        for attempt in range(config.max_retries + 1):
            try:
                response = self._client.post(
                    url, json=payload, headers=headers, timeout=config.request_timeout
                )
            except httpx.HTTPError as err:
                last_error = BackendError("timeout", f"transport failure: {err}")
            else:
                status = response.status_code
                if status == 200:
                    return self._parse(response, messages)
                message = f"chat completion returned HTTP {status}"
                if status in _RETRYABLE_STATUSES or 500 <= status <= 599:
                    last_error = BackendError("http_status", message, status)
                else:
                    raise BackendError("http_status", message, status)
            if attempt < config.max_retries:
                self._sleep(2**attempt)
        assert last_error is not None
        raise last_error

    def _parse(self, response: httpx.Response, messages: Sequence[ChatMessage]) -> ChatMessage:
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as err:
            raise BackendError(
                "malformed_response", f"cannot extract completion: {err}"
            ) from err
        if not isinstance(content, str) or not content:
            raise BackendError("malformed_response", "completion content is empty")
        return ChatMessage("assistant", content, author_name=_author(messages))


@dataclass
class ScriptedBackend:
    """Replays canned replies per agent name, in call order.

    ``replies`` maps an agent name (the ``author_name`` of the leading
    system message) to the sequence of replies for that agent's turns.
    """

    replies: dict[str, Sequence[str]]
    calls: list[tuple[str | None, tuple[ChatMessage, ...]]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._cursor: dict[str, int] = {name: 0 for name in self.replies}
        self._lock = threading.Lock()

    def complete(self, config: ModelConfig, messages: Sequence[ChatMessage]) -> ChatMessage:
        if not messages:
            raise ValueError("messages must be non-empty")
        name = _author(messages)
        with self._lock:
            self.calls.append((name, tuple(messages)))
            if name not in self.replies:
                raise BackendError("exhausted_script", f"no script for agent {name!r}")
            turn = self._cursor[name]
            script = self.replies[name]
            if turn >= len(script):
                raise BackendError(
                    "exhausted_script",
                    f"agent {name!r} has no reply for turn {turn}",
                )
            self._cursor[name] = turn + 1
        return ChatMessage("assistant", script[turn], author_name=name)
