"""Lenient parsing of provider output into typed values.

Providers wrap JSON in code fences or surround it with prose; the parser
tolerates that. What it never does is guess: an unknown intent label or a
payload that fits no variant is a ParseError carrying the offending span.
"""

from __future__ import annotations

import json
import re
from typing import Any, Optional

from ..domain import (
    DictionaryPayload,
    DomainError,
    EvaluationResult,
    QueryIntent,
    QuestionDraft,
    RefinementPayload,
    StructuredResponse,
    TaskContext,
    TextPayload,
    TranslationPayload,
    payload_from_dict,
)

_FENCE_RE = re.compile(r"```(?:[a-zA-Z0-9_-]+)?\s*\n?(.*?)```", re.DOTALL)


class ParseError(ValueError):
    """Provider output did not match the expected schema."""

    def __init__(self, message: str, raw: str, span: Optional[str] = None):
        self.raw = raw
        self.span = span if span is not None else raw
        super().__init__(f"{message} (offending span: {self.span[:200]!r})")


def _extract_json(raw: str) -> Optional[tuple[Any, str]]:
    """Find the first decodable JSON value in the text, fences included."""
    candidates = [m.group(1) for m in _FENCE_RE.finditer(raw)]
    candidates.append(raw)
    decoder = json.JSONDecoder()
    opener = re.compile(r"[{\[]")
    for text in candidates:
        # Earliest opener wins so an array is never mistaken for its first
        # element.
        match = opener.search(text)
        while match is not None:
            idx = match.start()
            try:
                obj, end = decoder.raw_decode(text[idx:])
            except json.JSONDecodeError:
                match = opener.search(text, idx + 1)
                continue
            return obj, text[idx : idx + end]
    return None


def _parse_intent(raw: str) -> QueryIntent:
    label = raw.strip().strip("\"'`").strip(".").strip()
    try:
        return QueryIntent.parse(label)
    except DomainError:
        raise ParseError("not a valid intent label", raw, span=label) from None


# Field that identifies each payload variant when no explicit type tag is set.
_PAYLOAD_MARKERS = (
    ("headword", "dictionary"),
    ("translated", "translation"),
    ("refined", "refinement"),
    ("body", "text"),
)


def _parse_payload(raw: str) -> StructuredResponse:
    found = _extract_json(raw)
    if found is None:
        # Plain prose is the text variant by design: only the three
        # structured intents answer in JSON.
        if not raw.strip():
            raise ParseError("empty response", raw)
        return TextPayload(body=raw.strip())
    obj, span = found
    if not isinstance(obj, dict):
        raise ParseError("payload must be a JSON object", raw, span=span)
    data = dict(obj)
    if "type" not in data:
        for marker, kind in _PAYLOAD_MARKERS:
            if marker in data:
                data["type"] = kind
                break
    try:
        return payload_from_dict(data)
    except (DomainError, KeyError, TypeError) as exc:
        raise ParseError(f"payload does not fit any variant: {exc}", raw, span=span) from None


def _draft_from_obj(obj: Any, raw: str, span: str) -> QuestionDraft:
    if not isinstance(obj, dict):
        raise ParseError("question item must be a JSON object", raw, span=span)
    try:
        stem = obj["stem"]
        key = obj["key"]
        distractors = obj["distractors"]
        explanation = obj["explanation"]
        rationale = obj["rationale"]
    except KeyError as exc:
        raise ParseError(f"question item is missing field {exc}", raw, span=span) from None
    if not isinstance(distractors, list) or not all(isinstance(d, str) for d in distractors):
        raise ParseError("distractors must be a list of strings", raw, span=span)
    fields = (stem, key, explanation, rationale)
    if not all(isinstance(f, str) for f in fields):
        raise ParseError("question fields must be strings", raw, span=span)
    return QuestionDraft(
        stem=stem,
        key=key,
        distractors=tuple(distractors),
        explanation=explanation,
        rationale=rationale,
    )


def _parse_question_batch(raw: str) -> list[QuestionDraft]:
    found = _extract_json(raw)
    if found is None:
        raise ParseError("no JSON question batch found", raw)
    obj, span = found
    items = obj if isinstance(obj, list) else [obj]
    return [_draft_from_obj(item, raw, span) for item in items]


def _parse_evaluation(raw: str) -> EvaluationResult:
    found = _extract_json(raw)
    if found is None:
        raise ParseError("no JSON evaluation found", raw)
    obj, span = found
    if not isinstance(obj, dict):
        raise ParseError("evaluation must be a JSON object", raw, span=span)
    answerability = obj.get("answerability")
    proficiency = obj.get("proficiency")
    if not isinstance(answerability, bool) or not isinstance(proficiency, bool):
        raise ParseError("evaluation criteria must be booleans", raw, span=span)
    rationale = obj.get("rationale", "")
    if not isinstance(rationale, str):
        raise ParseError("evaluation rationale must be a string", raw, span=span)
    try:
        return EvaluationResult(
            answerability=answerability, proficiency=proficiency, rationale=rationale
        )
    except DomainError as exc:
        raise ParseError(str(exc), raw, span=span) from None


def _parse_context(raw: str) -> TaskContext:
    found = _extract_json(raw)
    if found is None:
        raise ParseError("no JSON context found", raw)
    obj, span = found
    if not isinstance(obj, dict):
        raise ParseError("context must be a JSON object", raw, span=span)
    try:
        return TaskContext(
            surrounding_text=obj["surrounding_text"],
            task_description=obj["task_description"],
            source="client_supplied",
        )
    except (DomainError, KeyError, TypeError) as exc:
        raise ParseError(f"context does not fit the schema: {exc}", raw, span=span) from None


_PARSERS = {
    "intent_label": _parse_intent,
    "response_payload": _parse_payload,
    "question_batch": _parse_question_batch,
    "evaluation": _parse_evaluation,
    "context_extraction": _parse_context,
}


def parse_structured(raw: str, schema_tag: str) -> Any:
    """Parse raw provider text according to the expected schema tag."""
    parser = _PARSERS.get(schema_tag)
    if parser is None:
        raise ParseError(f"unknown schema tag {schema_tag!r}", raw)
    return parser(raw)
