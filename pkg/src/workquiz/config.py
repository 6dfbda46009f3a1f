"""Service configuration: one JSON file, environment overrides for secrets.

The file carries everything an operator tunes: provider endpoint, quiz
policy, review weights, bearer tokens, storage path. Provider fields can be
overridden by WORKQUIZ_* environment variables so credentials stay out of
the file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .domain import QuizPolicy, validate_policy
from .gateway import LLMProvider, HttpProvider, MockProvider, ProviderConfig
from .pool import ReviewWeightParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AppConfig:
    storage_path: Optional[str] = None
    tokens: dict[str, str] = field(default_factory=dict)  # bearer token -> user_id
    policy: QuizPolicy = field(default_factory=QuizPolicy)
    weight_params: ReviewWeightParams = field(default_factory=ReviewWeightParams)
    provider: dict[str, Any] = field(default_factory=dict)
    fixtures_path: Optional[str] = None
    user_language: str = "Korean"
    timezone: str = "UTC"
    scheduler_enabled: bool = False
    scheduler_interval_s: float = 30.0
    evening_cutoff_hour: int = 18

    def __post_init__(self) -> None:
        problems = validate_policy(self.policy)
        if problems:
            raise ConfigError("invalid quiz policy: " + "; ".join(problems))
        for token, user_id in self.tokens.items():
            if not token or not user_id:
                raise ConfigError("tokens must map non-empty token -> non-empty user_id")
        if not 0 <= self.evening_cutoff_hour <= 23:
            raise ConfigError("evening_cutoff_hour must be an hour of day")
        if self.scheduler_interval_s <= 0:
            raise ConfigError("scheduler_interval_s must be strictly positive")


_KNOWN_KEYS = {
    "storage_path",
    "tokens",
    "policy",
    "weight_params",
    "provider",
    "fixtures_path",
    "user_language",
    "timezone",
    "scheduler_enabled",
    "scheduler_interval_s",
    "evening_cutoff_hour",
}

_PROVIDER_ENV = {
    "endpoint": "WORKQUIZ_ENDPOINT",
    "model_name": "WORKQUIZ_MODEL",
    "api_key": "WORKQUIZ_API_KEY",
    "timeout_s": "WORKQUIZ_TIMEOUT_S",
    "max_retries": "WORKQUIZ_MAX_RETRIES",
}


def load_config(
    path: Optional[Union[str, Path]] = None,
    env: Mapping[str, str] = os.environ,
) -> AppConfig:
    """Read the config file and fold in environment overrides.

    No file at all is valid: every field has a workable default, which is
    what the in-memory test setups rely on.
    """
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")

    unknown = set(data) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    provider = dict(data.get("provider", {}))
    for key, var in _PROVIDER_ENV.items():
        if var in env:
            provider[key] = env[var]

    try:
        policy = QuizPolicy(**data.get("policy", {}))
        weight_params = ReviewWeightParams(**data.get("weight_params", {}))
    except TypeError as exc:
        raise ConfigError(f"bad policy or weight_params field: {exc}") from exc

    return AppConfig(
        storage_path=data.get("storage_path"),
        tokens=dict(data.get("tokens", {})),
        policy=policy,
        weight_params=weight_params,
        provider=provider,
        fixtures_path=data.get("fixtures_path"),
        user_language=data.get("user_language", "Korean"),
        timezone=data.get("timezone", "UTC"),
        scheduler_enabled=bool(data.get("scheduler_enabled", False)),
        scheduler_interval_s=float(data.get("scheduler_interval_s", 30.0)),
        evening_cutoff_hour=int(data.get("evening_cutoff_hour", 18)),
    )


def build_provider(config: AppConfig) -> LLMProvider:
    """Fixtures when configured, live HTTP otherwise."""
    if config.fixtures_path is not None:
        return MockProvider.from_jsonl(config.fixtures_path)
    numeric: dict[str, Any] = dict(config.provider)
    if "timeout_s" in numeric:
        numeric["timeout_s"] = float(numeric["timeout_s"])
    if "max_retries" in numeric:
        numeric["max_retries"] = int(numeric["max_retries"])
    return HttpProvider(ProviderConfig(**numeric))
