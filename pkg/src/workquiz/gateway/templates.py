"""Prompt templates.

Prompt texts live as versioned assets under ``prompts/``. Rendering is a pure
function of (template name, variables): byte-identical output for identical
inputs. Unknown templates and unbound or unexpected variables raise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Callable

from ..utils import canonical_json, stable_hash

SCHEMA_TAGS = (
    "intent_label",
    "response_payload",
    "question_batch",
    "evaluation",
    "context_extraction",
)


class TemplateError(ValueError):
    """Unknown template, unbound placeholder, or unexpected variable."""


@dataclass(frozen=True)
class PromptRequest:
    """A fully rendered provider request.

    ``fixture_key`` is a stable digest of (template, variables) used by the
    mock provider to look up scripted responses.
    """

    template: str
    system_prompt: str
    messages: tuple[dict[str, str], ...]
    schema_tag: str
    fixture_key: str

    def __post_init__(self) -> None:
        if self.schema_tag not in SCHEMA_TAGS:
            raise TemplateError(f"unknown schema tag: {self.schema_tag!r}")


def fixture_key(template: str, variables: dict[str, Any]) -> str:
    try:
        digest = stable_hash({"template": template, "vars": variables})
    except TypeError as exc:
        raise TemplateError(f"template variables must be JSON-serializable: {exc}") from None
    return f"{template}:{digest}"


def _history_messages(history: list[dict[str, str]]) -> list[dict[str, str]]:
    out = []
    for turn in history:
        role = "user" if turn.get("author") == "user" else "assistant"
        out.append({"role": role, "content": turn.get("text", "")})
    return out


def _messages_intent(v: dict[str, Any]) -> list[dict[str, str]]:
    return [{"role": "user", "content": v["text"]}]


def _messages_response(v: dict[str, Any]) -> list[dict[str, str]]:
    msgs = _history_messages(v["history"])
    msgs.append({"role": "user", "content": f"[Intention: {v['intent']}]\n{v['text']}"})
    return msgs


def _messages_context(v: dict[str, Any]) -> list[dict[str, str]]:
    return [{"role": "user", "content": v["capture_text"]}]


def _messages_filter(v: dict[str, Any]) -> list[dict[str, str]]:
    body = canonical_json({"query": v["user_text"], "answer": v["assistant_text"]})
    return [{"role": "user", "content": body}]


def _messages_generation(v: dict[str, Any]) -> list[dict[str, str]]:
    body = canonical_json(
        {
            "exchange": {"query": v["user_text"], "answer": v["assistant_text"]},
            "history": v["history"],
            "work_context": v["work_context"],
            "samples": v["samples"],
            "count": v["count"],
            "attempt": v["attempt"],
        }
    )
    return [{"role": "user", "content": body}]


def _messages_evaluation(v: dict[str, Any]) -> list[dict[str, str]]:
    return [{"role": "user", "content": canonical_json({"question": v["question"]})}]


def _messages_refine(v: dict[str, Any]) -> list[dict[str, str]]:
    body = canonical_json({"question": v["question"], "rationale": v["rationale"]})
    return [{"role": "user", "content": body}]


@dataclass(frozen=True)
class _TemplateSpec:
    asset: str
    schema_tag: str
    variables: tuple[str, ...]
    system_vars: tuple[str, ...]
    build_messages: Callable[[dict[str, Any]], list[dict[str, str]]]


TEMPLATES: dict[str, _TemplateSpec] = {
    "intent_classifier": _TemplateSpec(
        asset="intent_classifier.txt",
        schema_tag="intent_label",
        variables=("text",),
        system_vars=(),
        build_messages=_messages_intent,
    ),
    "response_generator": _TemplateSpec(
        asset="response_generator.txt",
        schema_tag="response_payload",
        variables=("user_language", "intent", "text", "history"),
        system_vars=("user_language",),
        build_messages=_messages_response,
    ),
    "context_extractor": _TemplateSpec(
        asset="context_extractor.txt",
        schema_tag="context_extraction",
        variables=("capture_text",),
        system_vars=(),
        build_messages=_messages_context,
    ),
    "language_filter": _TemplateSpec(
        asset="language_filter.txt",
        schema_tag="intent_label",
        variables=("user_text", "assistant_text"),
        system_vars=(),
        build_messages=_messages_filter,
    ),
    "question_generator": _TemplateSpec(
        asset="question_generator.txt",
        schema_tag="question_batch",
        variables=(
            "user_text",
            "assistant_text",
            "history",
            "work_context",
            "samples",
            "count",
            "attempt",
        ),
        system_vars=(),
        build_messages=_messages_generation,
    ),
    "question_evaluator": _TemplateSpec(
        asset="question_evaluator.txt",
        schema_tag="evaluation",
        variables=("question",),
        system_vars=(),
        build_messages=_messages_evaluation,
    ),
    "question_refiner": _TemplateSpec(
        asset="question_refiner.txt",
        schema_tag="question_batch",
        variables=("question", "rationale"),
        system_vars=(),
        build_messages=_messages_refine,
    ),
}


@lru_cache(maxsize=None)
def _load_asset(filename: str) -> str:
    return (resources.files(__package__) / "prompts" / filename).read_text(encoding="utf-8")


def render_template(name: str, variables: dict[str, Any]) -> PromptRequest:
    """Render a named template into a PromptRequest. Deterministic."""
    spec = TEMPLATES.get(name)
    if spec is None:
        raise TemplateError(f"unknown template: {name!r}")
    missing = set(spec.variables) - set(variables)
    if missing:
        raise TemplateError(f"unbound placeholder(s) for {name}: {sorted(missing)}")
    extra = set(variables) - set(spec.variables)
    if extra:
        raise TemplateError(f"unexpected variable(s) for {name}: {sorted(extra)}")

    system_prompt = _load_asset(spec.asset)
    for var in spec.system_vars:
        token = "{" + var + "}"
        if token not in system_prompt:
            raise TemplateError(f"asset {spec.asset} is missing placeholder {token}")
        system_prompt = system_prompt.replace(token, str(variables[var]))

    return PromptRequest(
        template=name,
        system_prompt=system_prompt,
        messages=tuple(spec.build_messages(variables)),
        schema_tag=spec.schema_tag,
        fixture_key=fixture_key(name, variables),
    )


def list_templates() -> list[str]:
    return sorted(TEMPLATES)
