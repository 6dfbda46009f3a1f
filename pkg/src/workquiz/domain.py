"""Shared vocabulary of the service.

Every type here serializes to plain JSON via ``to_dict`` / ``from_dict`` and
survives the round trip with equality. Invariants are enforced at
construction: there is no constructor path that yields an invalid value.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime
from enum import Enum
from typing import Any, Optional, Union

from .utils import iso, parse_iso, stable_hash

BLANK = "____"


class DomainError(ValueError):
    """Raised when a domain value would violate its invariants."""


# ── intents ──────────────────────────────────────────────────────────────


class QueryIntent(str, Enum):
    """The four query intents. Nothing else is a valid intent."""

    LOOKUP = "lookup"
    TRANSLATION = "translation"
    PROOFREAD = "proofread"
    TEXT = "text"

    @classmethod
    def parse(cls, value: str) -> "QueryIntent":
        """Strict parse. Unknown labels raise, never coerce to a default."""
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise DomainError(f"unknown intent label: {value!r}") from None


# ── task context ─────────────────────────────────────────────────────────

CONTEXT_SOURCES = ("client_supplied", "image_understanding")


@dataclass(frozen=True)
class TaskContext:
    """Work context attached to a query: what was on screen, what the task is."""

    surrounding_text: str
    task_description: str
    source: str = "client_supplied"

    def __post_init__(self) -> None:
        if not self.surrounding_text.strip():
            raise DomainError("TaskContext.surrounding_text must be non-empty")
        if not self.task_description.strip():
            raise DomainError("TaskContext.task_description must be non-empty")
        if self.source not in CONTEXT_SOURCES:
            raise DomainError(f"TaskContext.source must be one of {CONTEXT_SOURCES}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "surrounding_text": self.surrounding_text,
            "task_description": self.task_description,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TaskContext":
        return cls(
            surrounding_text=data["surrounding_text"],
            task_description=data["task_description"],
            source=data.get("source", "client_supplied"),
        )


# ── structured response payloads ─────────────────────────────────────────


@dataclass(frozen=True)
class DictionaryPayload:
    """Dictionary-style answer to a lookup query."""

    headword: str
    meanings: tuple[str, ...]
    synonyms: tuple[str, ...] = ()
    example_sentences: tuple[str, ...] = ()

    kind = "dictionary"

    def __post_init__(self) -> None:
        if not self.headword.strip():
            raise DomainError("DictionaryPayload.headword must be non-empty")
        if not self.meanings:
            raise DomainError("DictionaryPayload.meanings must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "headword": self.headword,
            "meanings": list(self.meanings),
            "synonyms": list(self.synonyms),
            "example_sentences": list(self.example_sentences),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DictionaryPayload":
        return cls(
            headword=data["headword"],
            meanings=tuple(data["meanings"]),
            synonyms=tuple(data.get("synonyms", ())),
            example_sentences=tuple(data.get("example_sentences", ())),
        )


@dataclass(frozen=True)
class TranslationPayload:
    """Translation plus an explanation of nuance choices."""

    original: str
    translated: str
    explanation: str = ""

    kind = "translation"

    def __post_init__(self) -> None:
        if not self.original.strip():
            raise DomainError("TranslationPayload.original must be non-empty")
        if not self.translated.strip():
            raise DomainError("TranslationPayload.translated must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "original": self.original,
            "translated": self.translated,
            "explanation": self.explanation,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TranslationPayload":
        return cls(
            original=data["original"],
            translated=data["translated"],
            explanation=data.get("explanation", ""),
        )


@dataclass(frozen=True)
class RefinementPayload:
    """Proofread text with the reasoning behind the edits."""

    original: str
    refined: str
    rationale: str = ""

    kind = "refinement"

    def __post_init__(self) -> None:
        if not self.original.strip():
            raise DomainError("RefinementPayload.original must be non-empty")
        if not self.refined.strip():
            raise DomainError("RefinementPayload.refined must be non-empty")
        # An unchanged text is only acceptable when the rationale says why.
        if self.original == self.refined and not self.rationale.strip():
            raise DomainError(
                "RefinementPayload with original == refined needs a rationale"
            )

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.kind,
            "original": self.original,
            "refined": self.refined,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RefinementPayload":
        return cls(
            original=data["original"],
            refined=data["refined"],
            rationale=data.get("rationale", ""),
        )


@dataclass(frozen=True)
class TextPayload:
    """Plain prose reply for queries outside the three structured intents."""

    body: str

    kind = "text"

    def __post_init__(self) -> None:
        if not self.body.strip():
            raise DomainError("TextPayload.body must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.kind, "body": self.body}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TextPayload":
        return cls(body=data["body"])


StructuredResponse = Union[
    DictionaryPayload, TranslationPayload, RefinementPayload, TextPayload
]

_PAYLOAD_TYPES: dict[str, type] = {
    "dictionary": DictionaryPayload,
    "translation": TranslationPayload,
    "refinement": RefinementPayload,
    "text": TextPayload,
}

# Which payload variant each intent must produce, and back.
INTENT_TO_PAYLOAD_KIND: dict[QueryIntent, str] = {
    QueryIntent.LOOKUP: "dictionary",
    QueryIntent.TRANSLATION: "translation",
    QueryIntent.PROOFREAD: "refinement",
    QueryIntent.TEXT: "text",
}
PAYLOAD_KIND_TO_INTENT = {v: k for k, v in INTENT_TO_PAYLOAD_KIND.items()}


def payload_from_dict(data: dict[str, Any]) -> StructuredResponse:
    kind = data.get("type")
    if kind not in _PAYLOAD_TYPES:
        raise DomainError(f"unknown payload type: {kind!r}")
    return _PAYLOAD_TYPES[kind].from_dict(data)


def payload_matches_intent(payload: StructuredResponse, intent: QueryIntent) -> bool:
    return payload.kind == INTENT_TO_PAYLOAD_KIND[intent]


# ── chat messages and threads ────────────────────────────────────────────


@dataclass
class ChatMessage:
    """One turn of the assistant chat.

    ``payload`` is present exactly when the author is the assistant.
    ``marked`` and ``context`` are author-restricted: only assistant messages
    can be marked, only user messages can carry a task context.
    """

    id: str
    thread_id: str
    author: str  # "user" | "assistant"
    text: str
    created_at: datetime
    intent: Optional[QueryIntent] = None
    payload: Optional[StructuredResponse] = None
    context: Optional[TaskContext] = None
    marked: bool = False

    def __post_init__(self) -> None:
        if self.author not in ("user", "assistant"):
            raise DomainError(f"ChatMessage.author must be user|assistant, got {self.author!r}")
        if not self.id:
            raise DomainError("ChatMessage.id must be non-empty")
        if (self.payload is not None) != (self.author == "assistant"):
            raise DomainError("ChatMessage.payload is present iff author == assistant")
        if self.marked and self.author != "assistant":
            raise DomainError("only assistant messages can be marked")
        if self.context is not None and self.author != "user":
            raise DomainError("only user messages can carry a task context")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "thread_id": self.thread_id,
            "author": self.author,
            "text": self.text,
            "created_at": iso(self.created_at),
            "intent": self.intent.value if self.intent else None,
            "payload": self.payload.to_dict() if self.payload else None,
            "context": self.context.to_dict() if self.context else None,
            "marked": self.marked,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ChatMessage":
        return cls(
            id=data["id"],
            thread_id=data["thread_id"],
            author=data["author"],
            text=data["text"],
            created_at=parse_iso(data["created_at"]),
            intent=QueryIntent.parse(data["intent"]) if data.get("intent") else None,
            payload=payload_from_dict(data["payload"]) if data.get("payload") else None,
            context=TaskContext.from_dict(data["context"]) if data.get("context") else None,
            marked=data.get("marked", False),
        )


@dataclass
class ChatThread:
    """An append-only conversation owned by one user."""

    id: str
    user_id: str
    created_at: datetime
    title: str = ""
    messages: list[ChatMessage] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "created_at": iso(self.created_at),
            "title": self.title,
            "messages": [m.to_dict() for m in self.messages],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ChatThread":
        return cls(
            id=data["id"],
            user_id=data["user_id"],
            created_at=parse_iso(data["created_at"]),
            title=data.get("title", ""),
            messages=[ChatMessage.from_dict(m) for m in data.get("messages", [])],
        )


# ── questions ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class FormatError:
    """One structural defect in a question candidate."""

    code: str
    message: str

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message}


class InvalidQuestionError(DomainError):
    def __init__(self, errors: list[FormatError]):
        self.errors = errors
        super().__init__("; ".join(f"{e.code}: {e.message}" for e in errors))


def _normalize_option(option: str) -> str:
    return " ".join(option.split()).casefold()


def check_question_format(
    stem: str,
    options: tuple[str, ...] | list[str],
    key_index: int,
    explanation: str,
) -> list[FormatError]:
    """Total structural check. Returns every violation, never raises.

    Option distinctness is judged after whitespace collapsing and case
    folding, so "Rise" and " rise " count as duplicates.
    """
    errors: list[FormatError] = []
    if not stem.strip():
        errors.append(FormatError("empty_stem", "stem must be non-empty"))
    blanks = stem.count(BLANK)
    if blanks != 1:
        errors.append(
            FormatError("blank_count", f"stem must contain exactly one {BLANK!r} marker, found {blanks}")
        )
    if len(options) != 3:
        errors.append(
            FormatError("option_count", f"exactly 3 options required, found {len(options)}")
        )
    if any(not str(o).strip() for o in options):
        errors.append(FormatError("empty_option", "options must be non-empty"))
    key_valid = isinstance(key_index, int) and 0 <= key_index < len(options)
    if not key_valid:
        errors.append(
            FormatError("invalid_key_index", f"key_index {key_index!r} out of range for {len(options)} options")
        )
    normalized = [_normalize_option(str(o)) for o in options]
    seen_pairs = set()
    for i in range(len(options)):
        for j in range(i + 1, len(options)):
            if normalized[i] and normalized[i] == normalized[j] and (i, j) not in seen_pairs:
                seen_pairs.add((i, j))
                if key_valid and key_index in (i, j):
                    errors.append(
                        FormatError(
                            "key_among_distractors",
                            f"key option {options[key_index]!r} also appears as a distractor",
                        )
                    )
                else:
                    errors.append(
                        FormatError("duplicate_options", f"options {i} and {j} are duplicates")
                    )
    if not explanation.strip():
        errors.append(FormatError("empty_explanation", "explanation must be non-empty"))
    return errors


@dataclass(frozen=True)
class Question:
    """A fill-in-the-blank item with three options.

    Structural invariants (one blank, three distinct options, valid key,
    non-empty explanation) are checked in ``__post_init__``, so a Question
    that exists is a Question that validates.
    """

    id: str
    stem: str
    options: tuple[str, str, str]
    key_index: int
    explanation: str
    rationale: str
    source_message_id: str
    marked_source: bool = False
    context_hint: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise DomainError("Question.id must be non-empty")
        if not self.source_message_id:
            raise DomainError("Question.source_message_id must be non-empty")
        errors = check_question_format(self.stem, self.options, self.key_index, self.explanation)
        if errors:
            raise InvalidQuestionError(errors)

    @property
    def key(self) -> str:
        return self.options[self.key_index]

    def with_marked_source(self, marked: bool) -> "Question":
        return replace(self, marked_source=marked)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "stem": self.stem,
            "options": list(self.options),
            "key_index": self.key_index,
            "explanation": self.explanation,
            "rationale": self.rationale,
            "source_message_id": self.source_message_id,
            "marked_source": self.marked_source,
            "context_hint": self.context_hint,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Question":
        return cls(
            id=data["id"],
            stem=data["stem"],
            options=tuple(data["options"]),
            key_index=data["key_index"],
            explanation=data["explanation"],
            rationale=data["rationale"],
            source_message_id=data["source_message_id"],
            marked_source=data.get("marked_source", False),
            context_hint=data.get("context_hint"),
        )


@dataclass(frozen=True)
class QuestionDraft:
    """A question candidate exactly as the provider produced it, unvalidated."""

    stem: str
    key: str
    distractors: tuple[str, ...]
    explanation: str
    rationale: str

    def placement(self) -> tuple[tuple[str, ...], int]:
        """Deterministic option order.

        The key's slot is derived from a content hash, so identical drafts
        always place identically and exports stay byte-stable without any
        RNG state in the generation pipeline.
        """
        slots = len(self.distractors) + 1
        index = int(stable_hash([self.stem, self.key], length=8), 16) % slots
        options = list(self.distractors)
        options.insert(index, self.key)
        return tuple(options), index

    def to_dict(self) -> dict[str, Any]:
        return {
            "stem": self.stem,
            "key": self.key,
            "distractors": list(self.distractors),
            "explanation": self.explanation,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuestionDraft":
        return cls(
            stem=data["stem"],
            key=data["key"],
            distractors=tuple(data["distractors"]),
            explanation=data["explanation"],
            rationale=data["rationale"],
        )


def validate_format(candidate: "Question | QuestionDraft") -> list[FormatError]:
    """Every format violation of a question or a draft. Total, never raises.

    Constructed Question values always come back clean; drafts are checked
    with their deterministic option placement applied.
    """
    if isinstance(candidate, Question):
        return check_question_format(
            candidate.stem, candidate.options, candidate.key_index, candidate.explanation
        )
    options, key_index = candidate.placement()
    return check_question_format(candidate.stem, options, key_index, candidate.explanation)


@dataclass(frozen=True)
class EvaluationResult:
    """Reviewer verdict on one candidate. Failure must come with a reason."""

    answerability: bool
    proficiency: bool
    rationale: str = ""

    def __post_init__(self) -> None:
        if not (self.answerability and self.proficiency) and not self.rationale.strip():
            raise DomainError("EvaluationResult failing a criterion requires a rationale")

    @property
    def passed(self) -> bool:
        return self.answerability and self.proficiency

    def to_dict(self) -> dict[str, Any]:
        return {
            "answerability": self.answerability,
            "proficiency": self.proficiency,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvaluationResult":
        return cls(
            answerability=data["answerability"],
            proficiency=data["proficiency"],
            rationale=data.get("rationale", ""),
        )


# ── practice pool ────────────────────────────────────────────────────────


@dataclass
class PoolEntry:
    """Per-question practice counters. ``exposures == 0`` means never shown."""

    question: Question
    created_at: datetime
    exposures: int = 0
    attempts: int = 0
    wrong_attempts: int = 0
    last_practiced: Optional[datetime] = None

    def __post_init__(self) -> None:
        if min(self.exposures, self.attempts, self.wrong_attempts) < 0:
            raise DomainError("PoolEntry counters must be non-negative")
        if self.wrong_attempts > self.attempts:
            raise DomainError("PoolEntry.wrong_attempts cannot exceed attempts")

    @property
    def is_new(self) -> bool:
        return self.exposures == 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "question": self.question.to_dict(),
            "created_at": iso(self.created_at),
            "exposures": self.exposures,
            "attempts": self.attempts,
            "wrong_attempts": self.wrong_attempts,
            "last_practiced": iso(self.last_practiced) if self.last_practiced else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PoolEntry":
        return cls(
            question=Question.from_dict(data["question"]),
            created_at=parse_iso(data["created_at"]),
            exposures=data.get("exposures", 0),
            attempts=data.get("attempts", 0),
            wrong_attempts=data.get("wrong_attempts", 0),
            last_practiced=parse_iso(data["last_practiced"]) if data.get("last_practiced") else None,
        )


# ── quiz policy ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class QuizPolicy:
    """Knobs of quiz assembly and question generation."""

    quiz_size: int = 10
    new_count: int = 7
    review_count: int = 3
    options_per_question: int = 3
    questions_per_pair: int = 2
    max_generation_attempts: int = 3
    poll_interval_s: int = 300

    def to_dict(self) -> dict[str, Any]:
        return {
            "quiz_size": self.quiz_size,
            "new_count": self.new_count,
            "review_count": self.review_count,
            "options_per_question": self.options_per_question,
            "questions_per_pair": self.questions_per_pair,
            "max_generation_attempts": self.max_generation_attempts,
            "poll_interval_s": self.poll_interval_s,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuizPolicy":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


def validate_policy(policy: QuizPolicy) -> list[str]:
    """Return every violated policy invariant. Empty list means valid."""
    violations: list[str] = []
    counts = {
        "quiz_size": policy.quiz_size,
        "new_count": policy.new_count,
        "review_count": policy.review_count,
        "options_per_question": policy.options_per_question,
        "questions_per_pair": policy.questions_per_pair,
        "max_generation_attempts": policy.max_generation_attempts,
        "poll_interval_s": policy.poll_interval_s,
    }
    for name, value in counts.items():
        if value <= 0:
            violations.append(f"{name} must be strictly positive, got {value}")
    if policy.new_count + policy.review_count != policy.quiz_size:
        violations.append(
            "new_count + review_count must equal quiz_size "
            f"({policy.new_count} + {policy.review_count} != {policy.quiz_size})"
        )
    return violations


# ── quizzes ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class QuizItem:
    """One slot of an assembled quiz. ``was_new`` records the partition."""

    question: Question
    was_new: bool

    def to_dict(self) -> dict[str, Any]:
        return {"question": self.question.to_dict(), "was_new": self.was_new}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuizItem":
        return cls(question=Question.from_dict(data["question"]), was_new=data["was_new"])


@dataclass
class Quiz:
    """An ordered, duplicate-free selection of questions for one sitting."""

    id: str
    user_id: str
    items: list[QuizItem]
    created_at: datetime
    partial: bool = False

    def __post_init__(self) -> None:
        ids = [item.question.id for item in self.items]
        if len(set(ids)) != len(ids):
            raise DomainError("Quiz items must be pairwise distinct questions")

    @property
    def question_ids(self) -> list[str]:
        return [item.question.id for item in self.items]

    def question_by_id(self, question_id: str) -> QuizItem:
        for item in self.items:
            if item.question.id == question_id:
                return item
        raise KeyError(question_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "items": [i.to_dict() for i in self.items],
            "created_at": iso(self.created_at),
            "partial": self.partial,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Quiz":
        return cls(
            id=data["id"],
            user_id=data["user_id"],
            items=[QuizItem.from_dict(i) for i in data["items"]],
            created_at=parse_iso(data["created_at"]),
            partial=data.get("partial", False),
        )


# ── generation queue ─────────────────────────────────────────────────────


@dataclass
class PairRecord:
    """A query-response pair queued for question generation.

    ``consumed`` flips exactly once, when a poll hands the pair off. That is
    the at-most-once delivery commit point.
    """

    id: str
    user_id: str
    thread_id: str
    user_message_id: str
    assistant_message_id: str
    created_at: datetime
    consumed: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "thread_id": self.thread_id,
            "user_message_id": self.user_message_id,
            "assistant_message_id": self.assistant_message_id,
            "created_at": iso(self.created_at),
            "consumed": self.consumed,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PairRecord":
        return cls(
            id=data["id"],
            user_id=data["user_id"],
            thread_id=data["thread_id"],
            user_message_id=data["user_message_id"],
            assistant_message_id=data["assistant_message_id"],
            created_at=parse_iso(data["created_at"]),
            consumed=data.get("consumed", False),
        )


# ── quiz sessions ────────────────────────────────────────────────────────

SESSION_STATES = ("active", "completed", "abandoned")


@dataclass(frozen=True)
class Submission:
    """One answer submission, append-only once logged."""

    question_id: str
    option_index: int
    correct: bool
    created_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "question_id": self.question_id,
            "option_index": self.option_index,
            "correct": self.correct,
            "created_at": iso(self.created_at),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Submission":
        return cls(
            question_id=data["question_id"],
            option_index=data["option_index"],
            correct=data["correct"],
            created_at=parse_iso(data["created_at"]),
        )


@dataclass
class QuizSession:
    """Requeue-until-correct state machine over one quiz.

    ``queue`` holds the questions still owed an eventual correct answer, in
    presentation order. ``version`` supports optimistic concurrency: a stale
    writer loses.
    """

    id: str
    user_id: str
    quiz_id: str
    queue: list[str]
    solved: list[str]
    submissions: list[Submission]
    state: str
    version: int
    started_at: datetime
    completed_at: Optional[datetime] = None

    def __post_init__(self) -> None:
        if self.state not in SESSION_STATES:
            raise DomainError(f"QuizSession.state must be one of {SESSION_STATES}")
        if set(self.queue) & set(self.solved):
            raise DomainError("QuizSession.queue and solved must be disjoint")
        if self.state == "completed" and self.queue:
            raise DomainError("completed session cannot have queued questions")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_id": self.user_id,
            "quiz_id": self.quiz_id,
            "queue": list(self.queue),
            "solved": list(self.solved),
            "submissions": [s.to_dict() for s in self.submissions],
            "state": self.state,
            "version": self.version,
            "started_at": iso(self.started_at),
            "completed_at": iso(self.completed_at) if self.completed_at else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "QuizSession":
        return cls(
            id=data["id"],
            user_id=data["user_id"],
            quiz_id=data["quiz_id"],
            queue=list(data["queue"]),
            solved=list(data["solved"]),
            submissions=[Submission.from_dict(s) for s in data.get("submissions", [])],
            state=data["state"],
            version=data["version"],
            started_at=parse_iso(data["started_at"]),
            completed_at=parse_iso(data["completed_at"]) if data.get("completed_at") else None,
        )


# ── JSON schemas ─────────────────────────────────────────────────────────

_TS = {"type": "string", "format": "date-time"}

JSON_SCHEMAS: dict[str, dict[str, Any]] = {
    "QueryIntent": {"type": "string", "enum": [i.value for i in QueryIntent]},
    "TaskContext": {
        "type": "object",
        "required": ["surrounding_text", "task_description"],
        "properties": {
            "surrounding_text": {"type": "string", "minLength": 1},
            "task_description": {"type": "string", "minLength": 1},
            "source": {"type": "string", "enum": list(CONTEXT_SOURCES)},
        },
    },
    "StructuredResponse": {
        "oneOf": [
            {
                "type": "object",
                "required": ["type", "headword", "meanings"],
                "properties": {
                    "type": {"const": "dictionary"},
                    "headword": {"type": "string", "minLength": 1},
                    "meanings": {"type": "array", "items": {"type": "string"}, "minItems": 1},
                    "synonyms": {"type": "array", "items": {"type": "string"}},
                    "example_sentences": {"type": "array", "items": {"type": "string"}},
                },
            },
            {
                "type": "object",
                "required": ["type", "original", "translated"],
                "properties": {
                    "type": {"const": "translation"},
                    "original": {"type": "string", "minLength": 1},
                    "translated": {"type": "string", "minLength": 1},
                    "explanation": {"type": "string"},
                },
            },
            {
                "type": "object",
                "required": ["type", "original", "refined"],
                "properties": {
                    "type": {"const": "refinement"},
                    "original": {"type": "string", "minLength": 1},
                    "refined": {"type": "string", "minLength": 1},
                    "rationale": {"type": "string"},
                },
            },
            {
                "type": "object",
                "required": ["type", "body"],
                "properties": {"type": {"const": "text"}, "body": {"type": "string", "minLength": 1}},
            },
        ]
    },
    "ChatMessage": {
        "type": "object",
        "required": ["id", "thread_id", "author", "text", "created_at"],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "thread_id": {"type": "string"},
            "author": {"type": "string", "enum": ["user", "assistant"]},
            "text": {"type": "string"},
            "created_at": _TS,
            "intent": {"oneOf": [{"type": "null"}, {"$ref": "#/QueryIntent"}]},
            "payload": {"oneOf": [{"type": "null"}, {"$ref": "#/StructuredResponse"}]},
            "context": {"oneOf": [{"type": "null"}, {"$ref": "#/TaskContext"}]},
            "marked": {"type": "boolean"},
        },
    },
    "ChatThread": {
        "type": "object",
        "required": ["id", "user_id", "created_at", "messages"],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "user_id": {"type": "string", "minLength": 1},
            "created_at": _TS,
            "title": {"type": "string"},
            "messages": {"type": "array", "items": {"$ref": "#/ChatMessage"}},
        },
    },
    "Question": {
        "type": "object",
        "required": [
            "id", "stem", "options", "key_index", "explanation",
            "rationale", "source_message_id",
        ],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "stem": {"type": "string", "minLength": 1},
            "options": {
                "type": "array",
                "items": {"type": "string", "minLength": 1},
                "minItems": 3,
                "maxItems": 3,
            },
            "key_index": {"type": "integer", "minimum": 0, "maximum": 2},
            "explanation": {"type": "string", "minLength": 1},
            "rationale": {"type": "string"},
            "source_message_id": {"type": "string", "minLength": 1},
            "marked_source": {"type": "boolean"},
            "context_hint": {"oneOf": [{"type": "null"}, {"type": "string"}]},
        },
    },
    "QuestionDraft": {
        "type": "object",
        "required": ["stem", "key", "distractors", "explanation", "rationale"],
        "properties": {
            "stem": {"type": "string"},
            "key": {"type": "string"},
            "distractors": {"type": "array", "items": {"type": "string"}},
            "explanation": {"type": "string"},
            "rationale": {"type": "string"},
        },
    },
    "EvaluationResult": {
        "type": "object",
        "required": ["answerability", "proficiency"],
        "properties": {
            "answerability": {"type": "boolean"},
            "proficiency": {"type": "boolean"},
            "rationale": {"type": "string"},
        },
    },
    "PoolEntry": {
        "type": "object",
        "required": ["question", "created_at", "exposures", "attempts", "wrong_attempts"],
        "properties": {
            "question": {"$ref": "#/Question"},
            "created_at": _TS,
            "exposures": {"type": "integer", "minimum": 0},
            "attempts": {"type": "integer", "minimum": 0},
            "wrong_attempts": {"type": "integer", "minimum": 0},
            "last_practiced": {"oneOf": [{"type": "null"}, _TS]},
        },
    },
    "QuizPolicy": {
        "type": "object",
        "properties": {
            "quiz_size": {"type": "integer", "minimum": 1},
            "new_count": {"type": "integer", "minimum": 1},
            "review_count": {"type": "integer", "minimum": 1},
            "options_per_question": {"type": "integer", "minimum": 1},
            "questions_per_pair": {"type": "integer", "minimum": 1},
            "max_generation_attempts": {"type": "integer", "minimum": 1},
            "poll_interval_s": {"type": "integer", "minimum": 1},
        },
    },
    "Quiz": {
        "type": "object",
        "required": ["id", "user_id", "items", "created_at"],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "user_id": {"type": "string", "minLength": 1},
            "items": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["question", "was_new"],
                    "properties": {
                        "question": {"$ref": "#/Question"},
                        "was_new": {"type": "boolean"},
                    },
                },
            },
            "created_at": _TS,
            "partial": {"type": "boolean"},
        },
    },
    "PairRecord": {
        "type": "object",
        "required": [
            "id", "user_id", "thread_id", "user_message_id",
            "assistant_message_id", "created_at",
        ],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "user_id": {"type": "string", "minLength": 1},
            "thread_id": {"type": "string"},
            "user_message_id": {"type": "string"},
            "assistant_message_id": {"type": "string"},
            "created_at": _TS,
            "consumed": {"type": "boolean"},
        },
    },
    "Submission": {
        "type": "object",
        "required": ["question_id", "option_index", "correct", "created_at"],
        "properties": {
            "question_id": {"type": "string"},
            "option_index": {"type": "integer", "minimum": 0},
            "correct": {"type": "boolean"},
            "created_at": _TS,
        },
    },
    "QuizSession": {
        "type": "object",
        "required": [
            "id", "user_id", "quiz_id", "queue", "solved",
            "submissions", "state", "version", "started_at",
        ],
        "properties": {
            "id": {"type": "string", "minLength": 1},
            "user_id": {"type": "string", "minLength": 1},
            "quiz_id": {"type": "string", "minLength": 1},
            "queue": {"type": "array", "items": {"type": "string"}},
            "solved": {"type": "array", "items": {"type": "string"}},
            "submissions": {"type": "array", "items": {"$ref": "#/Submission"}},
            "state": {"type": "string", "enum": list(SESSION_STATES)},
            "version": {"type": "integer", "minimum": 0},
            "started_at": _TS,
            "completed_at": {"oneOf": [{"type": "null"}, _TS]},
        },
    },
}
