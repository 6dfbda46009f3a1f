"""Factories and mock-fixture builders shared across test modules."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Any, Optional

from workquiz.domain import PoolEntry, Question, QueryIntent, TaskContext
from workquiz.gateway import MockProvider, fixture_key
from workquiz.quizgen import (
    GenerationInput,
    evaluation_vars,
    filter_vars,
    generation_vars,
    refine_vars,
)
from workquiz.utils import canonical_json

T0 = datetime(2026, 3, 2, 9, 0, tzinfo=timezone.utc)


def make_question(i: int = 0, marked: bool = False, hint: Optional[str] = None, **overrides) -> Question:
    fields: dict[str, Any] = dict(
        id=f"q{i}",
        stem=f"Sample sentence {i} needs the ____ word.",
        options=(f"alpha{i}", f"beta{i}", f"gamma{i}"),
        key_index=i % 3,
        explanation=f"Option {i % 3} fits the sentence {i}.",
        rationale="Matches a workplace usage pattern.",
        source_message_id=f"m{i}",
        marked_source=marked,
        context_hint=hint,
    )
    fields.update(overrides)
    return Question(**fields)


def make_entry(
    i: int = 0,
    exposures: int = 0,
    attempts: int = 0,
    wrong: int = 0,
    stale_days: Optional[float] = None,
    marked: bool = False,
    created_at: Optional[datetime] = None,
    now: datetime = T0,
    question: Optional[Question] = None,
) -> PoolEntry:
    last = None if stale_days is None else now - timedelta(days=stale_days)
    return PoolEntry(
        question=question or make_question(i, marked=marked),
        created_at=created_at or (T0 - timedelta(days=30) + timedelta(minutes=i)),
        exposures=exposures,
        attempts=attempts,
        wrong_attempts=wrong,
        last_practiced=last,
    )


def make_context(text: str = "the patient's airway to ensure proper breathing") -> TaskContext:
    return TaskContext(
        surrounding_text=text,
        task_description="writing a clinical handover email",
        source="client_supplied",
    )


def make_generation_input(
    i: int = 0,
    intent: QueryIntent = QueryIntent.LOOKUP,
    context: Optional[TaskContext] = None,
    marked: bool = False,
    samples: Optional[tuple] = None,
) -> GenerationInput:
    return GenerationInput(
        user_text=f"what does term{i} mean?",
        assistant_text=canonical_json({"type": "text", "body": f"term{i} explained"}),
        history=(),
        samples=samples
        or (
            {
                "stem": "Please ____ the form.",
                "key": "complete",
                "distractors": ["completion", "completely"],
                "explanation": "A verb is needed.",
                "rationale": "Common office request.",
            },
        ),
        source_message_id=f"m{i}",
        user_intent=intent,
        marked_source=marked,
        context=context,
    )


def draft_dict(
    i: int = 0,
    stem: Optional[str] = None,
    key: Optional[str] = None,
    distractors: Optional[list[str]] = None,
    explanation: str = "The key fits the blank.",
    rationale: str = "Suits the learner.",
) -> dict[str, Any]:
    return {
        "stem": stem if stem is not None else f"The draft sentence {i} has a ____ blank.",
        "key": key if key is not None else f"key{i}",
        "distractors": distractors if distractors is not None else [f"wrong{i}a", f"wrong{i}b"],
        "explanation": explanation,
        "rationale": rationale,
    }


# ── mock fixture builders ────────────────────────────────────────────────


def add_intent_fixture(mock: MockProvider, text: str, label: str) -> None:
    mock.add(fixture_key("intent_classifier", {"text": text}), label)


def add_filter_fixture(mock: MockProvider, generation_input: GenerationInput, label: str) -> None:
    mock.add(fixture_key("language_filter", filter_vars(generation_input)), label)


def add_response_fixture(
    mock: MockProvider,
    intent: QueryIntent,
    text: str,
    response_text: str,
    history: Optional[list[dict[str, str]]] = None,
    user_language: str = "Korean",
) -> None:
    variables = {
        "user_language": user_language,
        "intent": intent.value,
        "text": text,
        "history": history or [],
    }
    mock.add(fixture_key("response_generator", variables), response_text)


def add_generation_fixture(
    mock: MockProvider,
    generation_input: GenerationInput,
    drafts: list[dict[str, Any]],
    count: int,
    attempt: int = 1,
) -> None:
    key = fixture_key("question_generator", generation_vars(generation_input, count, attempt))
    mock.add(key, canonical_json(drafts))


def add_evaluation_fixture(
    mock: MockProvider,
    question: Question,
    answerability: bool,
    proficiency: bool,
    rationale: str = "",
) -> None:
    key = fixture_key("question_evaluator", evaluation_vars(question))
    mock.add(
        key,
        canonical_json(
            {"answerability": answerability, "proficiency": proficiency, "rationale": rationale}
        ),
    )


def add_refine_fixture(
    mock: MockProvider, question: Question, rationale: str, new_draft: dict[str, Any]
) -> None:
    key = fixture_key("question_refiner", refine_vars(question, rationale))
    mock.add(key, canonical_json(new_draft))


def add_extraction_fixture(
    mock: MockProvider, capture_text: str, surrounding_text: str, task_description: str
) -> None:
    key = fixture_key("context_extractor", {"capture_text": capture_text})
    mock.add(
        key,
        canonical_json(
            {"surrounding_text": surrounding_text, "task_description": task_description}
        ),
    )


# ── whole-export fixture scripting ───────────────────────────────────────

OFFTOPIC_MARKERS = ("lunch", "monitor", "weather")


def script_export_fixtures(
    export_path,
    fixtures_path,
    user_id: str = "default",
    questions_per_pair: int = 2,
) -> dict[str, int]:
    """Derive a complete all-pass mock fixture set for a chat export.

    Imports the export into a scratch store, then scripts one filter call
    per text-intent pair, one generation batch, and one passing evaluation
    per question. Returns the expected pipeline totals.
    """
    import json
    from pathlib import Path

    from workquiz.cli import _import_line, _import_thread
    from workquiz.quizgen import (
        build_question,
        generation_input_from_pair,
        load_exam_samples,
    )
    from workquiz.domain import QuestionDraft
    from workquiz.store import Store

    store = Store(None)
    thread = _import_thread(store, user_id)
    for line in Path(export_path).read_text().splitlines():
        if line.strip():
            _import_line(store, user_id, thread, json.loads(line))

    mock = MockProvider()
    samples = load_exam_samples()
    expected = {"pairs": 0, "filtered": 0, "accepted": 0}
    for index, pair in enumerate(store.pending_pairs(user_id)):
        generation_input = generation_input_from_pair(store, pair, samples)
        offtopic = any(m in generation_input.user_text for m in OFFTOPIC_MARKERS)
        if generation_input.user_intent is QueryIntent.TEXT:
            add_filter_fixture(mock, generation_input, "text" if offtopic else "lookup")
        if offtopic:
            expected["filtered"] += 1
            continue
        expected["pairs"] += 1
        drafts = [draft_dict(index * 10 + j) for j in range(questions_per_pair)]
        add_generation_fixture(mock, generation_input, drafts, count=questions_per_pair)
        hint = (
            generation_input.context.task_description
            if generation_input.context
            else None
        )
        for d in drafts:
            built = build_question(
                QuestionDraft(
                    stem=d["stem"],
                    key=d["key"],
                    distractors=tuple(d["distractors"]),
                    explanation=d["explanation"],
                    rationale=d["rationale"],
                ),
                generation_input.source_message_id,
                marked_source=generation_input.marked_source,
                context_hint=hint,
            )
            add_evaluation_fixture(mock, built, True, True)
            expected["accepted"] += 1
    mock.dump_jsonl(fixtures_path)
    return expected
