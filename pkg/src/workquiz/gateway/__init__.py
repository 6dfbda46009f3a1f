"""LLM access layer: templates, providers, structured-output parsing."""

from __future__ import annotations

from typing import Any

from .mock import FixtureMissingError, MockProvider
from .parsing import ParseError, parse_structured
from .provider import (
    HttpProvider,
    LLMProvider,
    ProviderConfig,
    ProviderError,
    complete,
)
from .templates import (
    SCHEMA_TAGS,
    TEMPLATES,
    PromptRequest,
    TemplateError,
    fixture_key,
    list_templates,
    render_template,
)


class Gateway:
    """Render a template, run the provider, parse the result."""

    def __init__(self, provider: LLMProvider):
        self.provider = provider

    def call(self, template: str, variables: dict[str, Any]) -> tuple[Any, str]:
        """Returns (parsed value, raw provider text)."""
        request = render_template(template, variables)
        raw = self.provider.complete(request)
        return parse_structured(raw, request.schema_tag), raw


__all__ = [
    "Gateway",
    "FixtureMissingError",
    "MockProvider",
    "ParseError",
    "parse_structured",
    "HttpProvider",
    "LLMProvider",
    "ProviderConfig",
    "ProviderError",
    "complete",
    "SCHEMA_TAGS",
    "TEMPLATES",
    "PromptRequest",
    "TemplateError",
    "fixture_key",
    "list_templates",
    "render_template",
]
