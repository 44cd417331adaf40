"""Text-completion backends: an OpenAI-style HTTP client and a scripted stand-in."""

from __future__ import annotations

import enum
import json
import logging
import os
import random
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Protocol

log = logging.getLogger(__name__)


class Purpose(str, enum.Enum):
    TALK = "talk"
    SUMMARY = "summary"
    VOTE_DECLARATION = "vote_declaration"
    TARGET_DECISION = "target_decision"
    ATTACK_DECISION = "attack_decision"


DEFAULT_TEMPERATURE = {
    Purpose.TALK: 0.7,
    Purpose.VOTE_DECLARATION: 0.7,
    Purpose.SUMMARY: 0.0,
    Purpose.TARGET_DECISION: 0.0,
    Purpose.ATTACK_DECISION: 0.0,
}

DEFAULT_MODELS = {"default": "gpt-4-turbo", "vote_declaration": "gpt-3.5-turbo"}

SYSTEM_PROMPT = "You are an AI agent playing the Werewolf game. Follow the instructions in the user message."


class BackendFailure(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    purpose: Purpose = Purpose.TALK
    max_tokens: int = 512
    temperature: float | None = None
    model_id: str | None = None
    # Structured view of the agent's memory. Never sent over HTTP; the scripted
    # backend reads it instead of parsing prose.
    digest: Mapping[str, Any] = field(default_factory=dict, compare=False, repr=False)


@dataclass
class BackendConfig:
    base_url: str = "https://api.openai.com/v1"
    api_key_env: str = "OPENAI_API_KEY"
    models: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_MODELS))
    timeout: float = 60.0
    retry_count: int = 3
    retry_backoff: float = 1.0
    system_prompt: str = SYSTEM_PROMPT

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any] | None) -> BackendConfig:
        data = dict(data or {})
        if "api_key" in data:
            raise ConfigError("api keys are read from the environment; set api_key_env instead")
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown backend keys: {sorted(unknown)}")
        models = dict(DEFAULT_MODELS)
        models.update(data.pop("models", None) or {})
        bad = set(models) - {"default"} - {p.value for p in Purpose}
        if bad:
            raise ConfigError(f"unknown purposes in model map: {sorted(bad)}")
        return cls(models=models, **data)

    def model_for(self, purpose: Purpose) -> str:
        return self.models.get(purpose.value, self.models["default"])


def route(request: CompletionRequest, config: BackendConfig) -> CompletionRequest:
    """Fill in model and temperature from the per-purpose configuration."""
    return replace(
        request,
        model_id=request.model_id or config.model_for(request.purpose),
        temperature=DEFAULT_TEMPERATURE[request.purpose]
        if request.temperature is None
        else request.temperature,
    )


class Backend(Protocol):
    def complete(self, request: CompletionRequest) -> str: ...


class HTTPBackend:
    """Chat-completions client (``POST {base_url}/chat/completions``)."""

    def __init__(self, config: BackendConfig | None = None) -> None:
        self.config = config or BackendConfig()

    def _api_key(self) -> str | None:
        return os.environ.get(self.config.api_key_env) if self.config.api_key_env else None

    def payload(self, request: CompletionRequest) -> dict[str, Any]:
        request = route(request, self.config)
        return {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": self.config.system_prompt},
                {"role": "user", "content": request.prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }

    def complete(self, request: CompletionRequest) -> str:
        body = json.dumps(self.payload(request)).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        key = self._api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.config.retry_count + 1):
            if attempt:
                time.sleep(self.config.retry_backoff * 2 ** (attempt - 1))
            req = urllib.request.Request(url, data=body, headers=headers, method="POST")
            try:
                with urllib.request.urlopen(req, timeout=self.config.timeout) as resp:
                    data = json.loads(resp.read().decode("utf-8"))
            except urllib.error.HTTPError as exc:
                last_error = exc
                if exc.code != 429 and exc.code < 500:
                    break
                continue
            except (urllib.error.URLError, TimeoutError, ConnectionError, json.JSONDecodeError) as exc:
                last_error = exc
                continue
            try:
                text = data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                last_error = exc
                continue
            if text and text.strip():
                return text
            last_error = BackendFailure("empty completion")
        raise BackendFailure(f"completion failed after {self.config.retry_count + 1} attempts: {last_error}")


class ScriptedBackend:
    """Deterministic rule-based completions for offline matches.

    Output is a pure function of (request digest, call counter, seed). Use one
    instance per agent so counters stay independent.
    """

    def __init__(self, seed: int = 0, agent: int = 0, config: BackendConfig | None = None) -> None:
        self.seed = seed
        self.agent = agent
        self.config = config or BackendConfig()
        self.calls = 0

    def complete(self, request: CompletionRequest) -> str:
        from .scripted import scripted_policy

        request = route(request, self.config)
        rng = random.Random(f"{self.seed}:{self.agent}:{self.calls}")
        self.calls += 1
        text = scripted_policy(request.digest, rng)
        if not text:
            raise BackendFailure("scripted policy produced no text")
        return text


class RecordingBackend:
    """Wraps another backend and keeps every routed request with its completion."""

    def __init__(self, inner: Backend, config: BackendConfig | None = None) -> None:
        self.inner = inner
        self.config = config or getattr(inner, "config", None) or BackendConfig()
        self.calls: list[tuple[CompletionRequest, str]] = []

    def complete(self, request: CompletionRequest) -> str:
        text = self.inner.complete(request)
        self.calls.append((route(request, self.config), text))
        return text
