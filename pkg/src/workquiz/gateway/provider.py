"""Provider clients: a real chat-completions HTTP client and its config."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Mapping, Protocol

import httpx

from .templates import PromptRequest

log = logging.getLogger(__name__)


class ProviderError(RuntimeError):
    """Transport or provider failure that survived the retry budget."""


class LLMProvider(Protocol):
    def complete(self, request: PromptRequest) -> str: ...


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str
    model_name: str
    api_key: str = ""
    timeout_s: float = 30.0
    max_retries: int = 2

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "ProviderConfig":
        env = os.environ if env is None else env
        endpoint = env.get("WORKQUIZ_ENDPOINT", "")
        model_name = env.get("WORKQUIZ_MODEL", "")
        if not endpoint or not model_name:
            raise ProviderError(
                "WORKQUIZ_ENDPOINT and WORKQUIZ_MODEL must be set to use the HTTP provider"
            )
        return cls(
            endpoint=endpoint,
            model_name=model_name,
            api_key=env.get("WORKQUIZ_API_KEY", ""),
            timeout_s=float(env.get("WORKQUIZ_TIMEOUT_S", "30")),
            max_retries=int(env.get("WORKQUIZ_MAX_RETRIES", "2")),
        )


def validate_request(request: PromptRequest) -> None:
    """Preconditions shared by every provider."""
    if not request.messages:
        raise ValueError("PromptRequest.messages must be non-empty")
    if not request.system_prompt.strip():
        raise ValueError("PromptRequest.system_prompt must be non-empty")


class HttpProvider:
    """OpenAI-style chat completions client with bounded retries."""

    def __init__(self, config: ProviderConfig, backoff_s: float = 0.5):
        self.config = config
        self.backoff_s = backoff_s

    def complete(self, request: PromptRequest) -> str:
        validate_request(request)
        cfg = self.config
        url = cfg.endpoint.rstrip("/") + "/chat/completions"
        payload = {
            "model": cfg.model_name,
            "messages": [{"role": "system", "content": request.system_prompt}]
            + [dict(m) for m in request.messages],
        }
        headers = {}
        if cfg.api_key:
            headers["Authorization"] = f"Bearer {cfg.api_key}"

        last_error: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                time.sleep(self.backoff_s * attempt)
            try:
                response = httpx.post(url, json=payload, headers=headers, timeout=cfg.timeout_s)
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = ProviderError(f"provider returned {response.status_code}")
                    log.warning("provider attempt %d failed: %s", attempt + 1, last_error)
                    continue
                response.raise_for_status()
                return response.json()["choices"][0]["message"]["content"]
            except httpx.TransportError as exc:
                last_error = exc
                log.warning("provider attempt %d failed: %s", attempt + 1, exc)
            except (httpx.HTTPStatusError, KeyError, IndexError, ValueError) as exc:
                # Malformed or rejected request: retrying will not help.
                raise ProviderError(f"provider rejected the request: {exc}") from exc
        raise ProviderError(
            f"provider unreachable after {cfg.max_retries + 1} attempt(s): {last_error}"
        )


def complete(request: PromptRequest, provider: LLMProvider) -> str:
    """Issue one completion. Kept as a function for symmetry with the ops."""
    return provider.complete(request)
