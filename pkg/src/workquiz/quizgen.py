"""Question generation with a bounded quality-assurance loop.

Per candidate the budget is ``max_generation_attempts`` total generation
calls: the initial generation plus refinements. Every version and verdict
lands in the audit trail, accepted or not. Under the mock provider the whole
pipeline is deterministic: same inputs and fixtures, same outcomes, byte for
byte.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from typing import Any, Optional

from .domain import (
    EvaluationResult,
    InvalidQuestionError,
    PairRecord,
    Question,
    QueryIntent,
    QuestionDraft,
    QuizPolicy,
    TaskContext,
    validate_format,
)
from .gateway import Gateway, ParseError, ProviderError
from .store import Store
from .utils import canonical_json, stable_hash

log = logging.getLogger(__name__)


class QuizgenError(ValueError):
    """Misuse of the generation pipeline (bad preconditions)."""


class PartialBatchError(RuntimeError):
    """Generation produced fewer valid questions than requested.

    ``salvageable`` holds the valid ones; ``defects`` maps the index of each
    rejected draft to its format errors.
    """

    def __init__(self, requested: int, salvageable: list[Question], defects: list[tuple[int, list]]):
        self.requested = requested
        self.salvageable = salvageable
        self.defects = defects
        detail = "; ".join(
            f"draft {i}: {', '.join(e.code for e in errors)}" for i, errors in defects
        )
        super().__init__(
            f"only {len(salvageable)} of {requested} requested questions were valid "
            f"(salvageable: {[q.id for q in salvageable]}; defects: {detail})"
        )


class QaAbortedError(RuntimeError):
    """Provider or parsing failure mid-loop. The trail so far is preserved."""

    def __init__(self, trail: list["QaStep"], cause: Exception):
        self.trail = trail
        self.cause = cause
        super().__init__(f"qa loop aborted after {len(trail)} evaluation(s): {cause}")


@dataclass(frozen=True)
class GenerationInput:
    """Everything one pair contributes to question generation."""

    user_text: str
    assistant_text: str
    history: tuple[dict[str, str], ...]
    samples: tuple[dict[str, Any], ...]
    source_message_id: str
    user_intent: QueryIntent
    marked_source: bool = False
    context: Optional[TaskContext] = None

    def __post_init__(self) -> None:
        if not self.samples:
            raise QuizgenError("GenerationInput.samples must be non-empty")
        if not self.source_message_id:
            raise QuizgenError("GenerationInput.source_message_id must be non-empty")


@dataclass(frozen=True)
class QaStep:
    """One (question version, verdict) link of the audit trail."""

    question: Question
    evaluation: EvaluationResult

    def to_dict(self) -> dict[str, Any]:
        return {"question": self.question.to_dict(), "evaluation": self.evaluation.to_dict()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QaStep":
        return cls(
            question=Question.from_dict(data["question"]),
            evaluation=EvaluationResult.from_dict(data["evaluation"]),
        )


@dataclass(frozen=True)
class QaOutcome:
    """Terminal result of the QA loop for one candidate."""

    status: str  # "accepted" | "discarded"
    attempts_used: int
    trail: tuple[QaStep, ...]
    question: Optional[Question] = None

    def __post_init__(self) -> None:
        if self.status not in ("accepted", "discarded"):
            raise QuizgenError(f"QaOutcome.status must be accepted|discarded, got {self.status!r}")
        if (self.question is not None) != (self.status == "accepted"):
            raise QuizgenError("QaOutcome.question is present iff status == accepted")

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status,
            "attempts_used": self.attempts_used,
            "trail": [step.to_dict() for step in self.trail],
            "question": self.question.to_dict() if self.question else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QaOutcome":
        return cls(
            status=data["status"],
            attempts_used=data["attempts_used"],
            trail=tuple(QaStep.from_dict(s) for s in data.get("trail", [])),
            question=Question.from_dict(data["question"]) if data.get("question") else None,
        )


@dataclass(frozen=True)
class PairOutcome:
    """What became of one polled pair."""

    pair_id: str
    language_related: bool
    outcomes: tuple[QaOutcome, ...] = ()

    @property
    def accepted(self) -> list[Question]:
        return [o.question for o in self.outcomes if o.question is not None]

    def to_dict(self) -> dict[str, Any]:
        return {
            "pair_id": self.pair_id,
            "language_related": self.language_related,
            "outcomes": [o.to_dict() for o in self.outcomes],
        }


def load_exam_samples() -> tuple[dict[str, Any], ...]:
    """The shipped few-shot bank of exam-style example questions."""
    raw = (resources.files(__package__) / "assets" / "exam_samples.json").read_text("utf-8")
    return tuple(json.loads(raw)["samples"])


def question_id(source_message_id: str, stem: str, options: tuple[str, ...]) -> str:
    """Content-derived id: identical content maps to the identical id."""
    return "q-" + stable_hash([source_message_id, stem, list(options)])


def build_question(
    draft: QuestionDraft,
    source_message_id: str,
    marked_source: bool = False,
    context_hint: Optional[str] = None,
) -> Question:
    """Place the key deterministically and construct a validated Question."""
    options, key_index = draft.placement()
    if len(options) != 3:
        # Question requires exactly 3 options; construction would fail with
        # a tuple arity error before the format check could report it.
        raise InvalidQuestionError(validate_format(draft))
    return Question(
        id=question_id(source_message_id, draft.stem, options),
        stem=draft.stem,
        options=(options[0], options[1], options[2]),
        key_index=key_index,
        explanation=draft.explanation,
        rationale=draft.rationale,
        source_message_id=source_message_id,
        marked_source=marked_source,
        context_hint=context_hint,
    )


def _question_vars(question: Question) -> dict[str, Any]:
    """The canonical shape the evaluator and refiner see."""
    return {
        "stem": question.stem,
        "options": list(question.options),
        "key": question.key,
        "explanation": question.explanation,
        "rationale": question.rationale,
    }


# Template variable builders. Public so fixture sets can be keyed with the
# exact dicts the pipeline sends.


def filter_vars(generation_input: GenerationInput) -> dict[str, Any]:
    return {
        "user_text": generation_input.user_text,
        "assistant_text": generation_input.assistant_text,
    }


def generation_vars(
    generation_input: GenerationInput, count: int, attempt: int
) -> dict[str, Any]:
    context = generation_input.context
    work_context = ""
    if context is not None:
        work_context = f"{context.task_description}\n{context.surrounding_text}"
    return {
        "user_text": generation_input.user_text,
        "assistant_text": generation_input.assistant_text,
        "history": list(generation_input.history),
        "work_context": work_context,
        "samples": list(generation_input.samples),
        "count": count,
        "attempt": attempt,
    }


def evaluation_vars(question: Question) -> dict[str, Any]:
    return {"question": _question_vars(question)}


def refine_vars(question: Question, rationale: str) -> dict[str, Any]:
    return {"question": _question_vars(question), "rationale": rationale}


def _normalized(text: str) -> str:
    return " ".join(text.split()).casefold()


class QuizGenerator:
    def __init__(
        self,
        gateway: Gateway,
        policy: Optional[QuizPolicy] = None,
        samples: Optional[tuple[dict[str, Any], ...]] = None,
    ):
        self.gateway = gateway
        self.policy = policy or QuizPolicy()
        self.samples = tuple(samples) if samples is not None else load_exam_samples()

    # ── filtering ────────────────────────────────────────────────────

    def is_language_query(self, generation_input: GenerationInput) -> bool:
        """True when the exchange concerns English language use.

        The three structured intents are language queries by definition and
        cost no provider call. Plain-text exchanges are judged by the
        provider on substance.
        """
        if generation_input.user_intent != QueryIntent.TEXT:
            return True
        verdict, _raw = self.gateway.call("language_filter", filter_vars(generation_input))
        return verdict != QueryIntent.TEXT

    # ── generation ───────────────────────────────────────────────────

    def _generation_call(
        self, generation_input: GenerationInput, count: int, attempt: int
    ) -> list[QuestionDraft]:
        drafts, _raw = self.gateway.call(
            "question_generator", generation_vars(generation_input, count, attempt)
        )
        return drafts

    def generate_questions(self, generation_input: GenerationInput, count: int) -> list[Question]:
        """One batch generation call, format-validated.

        Raises PartialBatchError when fewer than ``count`` drafts survive
        validation, listing the ones that did. When two candidates end up
        with the same key, the later one is regenerated once and then kept
        regardless of the retry's key.
        """
        if count <= 0:
            raise QuizgenError("count must be strictly positive")
        drafts = self._generation_call(generation_input, count, attempt=1)

        hint = generation_input.context.task_description if generation_input.context else None
        questions: list[Question] = []
        defects: list[tuple[int, list]] = []
        for index, draft in enumerate(drafts):
            errors = validate_format(draft)
            if errors:
                defects.append((index, errors))
                continue
            questions.append(
                build_question(
                    draft,
                    generation_input.source_message_id,
                    marked_source=generation_input.marked_source,
                    context_hint=hint,
                )
            )
        if len(questions) < count:
            raise PartialBatchError(count, questions, defects)
        questions = questions[:count]

        # Distinctness rule: duplicate keys get one regeneration, then stand.
        seen_keys: set[str] = set()
        for position, question in enumerate(questions):
            key = _normalized(question.key)
            if key in seen_keys:
                replacement = self._regenerate_single(generation_input, position + 1, hint)
                if replacement is not None:
                    questions[position] = replacement
                seen_keys.add(_normalized(questions[position].key))
            else:
                seen_keys.add(key)
        return questions

    def _regenerate_single(
        self, generation_input: GenerationInput, attempt: int, hint: Optional[str]
    ) -> Optional[Question]:
        try:
            drafts = self._generation_call(generation_input, count=1, attempt=attempt)
        except (ProviderError, ParseError):
            log.warning("regeneration for duplicate key failed; keeping the duplicate")
            return None
        for draft in drafts:
            if not validate_format(draft):
                return build_question(
                    draft,
                    generation_input.source_message_id,
                    marked_source=generation_input.marked_source,
                    context_hint=hint,
                )
        return None

    # ── evaluation and refinement ────────────────────────────────────

    def evaluate_question(self, question: Question) -> EvaluationResult:
        """One provider call judging both criteria at once."""
        verdict, _raw = self.gateway.call("question_evaluator", evaluation_vars(question))
        return verdict

    def refine_question(self, question: Question, evaluation: EvaluationResult) -> Question:
        """Rewrite a failed question guided by the evaluation rationale."""
        if evaluation.passed:
            raise QuizgenError("refine_question requires a failed evaluation")
        if not evaluation.rationale.strip():
            raise QuizgenError("refine_question requires a non-empty rationale")
        drafts, _raw = self.gateway.call(
            "question_refiner", refine_vars(question, evaluation.rationale)
        )
        if not drafts:
            raise ParseError("refiner returned no question", _raw)
        return build_question(
            drafts[0],
            question.source_message_id,
            marked_source=question.marked_source,
            context_hint=question.context_hint,
        )

    # ── the loop ─────────────────────────────────────────────────────

    def run_qa_loop(self, question: Question) -> QaOutcome:
        """Evaluate, refine, repeat within the generation budget.

        The candidate passed in counts as generation attempt 1. With a budget
        of 3 that allows at most 2 refinements and exactly as many evaluation
        calls as generation attempts, never a fourth.
        """
        budget = self.policy.max_generation_attempts
        trail: list[QaStep] = []
        attempts_used = 1
        current = question
        while True:
            try:
                verdict = self.evaluate_question(current)
            except (ProviderError, ParseError) as exc:
                raise QaAbortedError(trail, exc) from exc
            trail.append(QaStep(question=current, evaluation=verdict))
            if verdict.passed:
                return QaOutcome(
                    status="accepted",
                    attempts_used=attempts_used,
                    trail=tuple(trail),
                    question=current,
                )
            if attempts_used >= budget:
                return QaOutcome(
                    status="discarded", attempts_used=attempts_used, trail=tuple(trail)
                )
            try:
                current = self.refine_question(current, verdict)
            except (ProviderError, ParseError, InvalidQuestionError) as exc:
                raise QaAbortedError(trail, exc) from exc
            attempts_used += 1

    # ── whole pair ───────────────────────────────────────────────────

    def process_pair(self, pair_id: str, generation_input: GenerationInput) -> PairOutcome:
        """Filter, generate, and QA one pair. Rejected pairs cost nothing more."""
        if not self.is_language_query(generation_input):
            return PairOutcome(pair_id=pair_id, language_related=False)
        questions = self.generate_questions(generation_input, self.policy.questions_per_pair)
        outcomes = tuple(self.run_qa_loop(q) for q in questions)
        return PairOutcome(pair_id=pair_id, language_related=True, outcomes=outcomes)


def generation_input_from_pair(
    store: Store, pair: PairRecord, samples: tuple[dict[str, Any], ...]
) -> GenerationInput:
    """Reconstruct the generation input for a queued pair from the store."""
    thread = store.get_thread(pair.thread_id)
    by_id = {m.id: m for m in thread.messages}
    user_message = by_id[pair.user_message_id]
    assistant_message = by_id[pair.assistant_message_id]
    history = tuple(
        {"author": m.author, "text": m.text}
        for m in thread.messages
        if m.created_at < user_message.created_at and m.id != user_message.id
    )
    assistant_text = (
        canonical_json(assistant_message.payload.to_dict())
        if assistant_message.payload is not None
        else assistant_message.text
    )
    intent = assistant_message.intent or user_message.intent or QueryIntent.TEXT
    return GenerationInput(
        user_text=user_message.text,
        assistant_text=assistant_text,
        history=history,
        samples=samples,
        source_message_id=assistant_message.id,
        user_intent=intent,
        marked_source=assistant_message.marked,
        context=user_message.context,
    )
