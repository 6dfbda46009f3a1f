"""REST surface over the service modules.

The API adds no business logic: every success and error below is fully
determined by an underlying module contract. Handlers translate domain
exceptions into a closed set of machine-readable error codes.

Quiz payloads never include the answer key or the explanation; those only
travel back in answer feedback. The client cannot cheat by inspecting
traffic.
"""

from __future__ import annotations

import logging
from contextlib import asynccontextmanager
from random import Random
from typing import Any, Optional

from fastapi import Depends, FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import AppConfig, build_provider
from .conversation import (
    ConversationError,
    ConversationService,
    VariantMismatchError,
    apply_intent_template,
)
from .domain import (
    ChatMessage,
    ChatThread,
    DomainError,
    InvalidQuestionError,
    QueryIntent,
    Quiz,
    QuizSession,
    TaskContext,
)
from .gateway import (
    FixtureMissingError,
    Gateway,
    ParseError,
    ProviderError,
)
from .pool import (
    NoQuestionsError,
    activity_summary,
    assemble_quiz,
    notify_eligible,
)
from .quizgen import QuizGenerator
from .scheduler import Scheduler
from .session import (
    InactiveSessionError,
    InvalidOptionError,
    OutOfOrderError,
    SessionError,
    SessionService,
    progress,
)
from .store import NotFoundError, Store, VersionConflictError

log = logging.getLogger(__name__)

# The published closed set. Every error response carries one of these.
ERROR_CODES = frozenset(
    {
        "unauthorized",
        "forbidden",
        "not_found",
        "invalid_request",
        "invalid_option",
        "out_of_order",
        "inactive_session",
        "no_questions",
        "version_conflict",
        "provider_error",
        "invalid_output",
    }
)


class ApiError(Exception):
    def __init__(
        self,
        code: str,
        message: str,
        status: int,
        detail: Optional[Any] = None,
    ):
        assert code in ERROR_CODES, f"unpublished error code {code!r}"
        self.code = code
        self.message = message
        self.status = status
        self.detail = detail
        super().__init__(message)


def _api_error_response(error: ApiError) -> JSONResponse:
    body: dict[str, Any] = {"code": error.code, "message": error.message}
    if error.detail is not None:
        body["detail"] = error.detail
    return JSONResponse(status_code=error.status, content=body)


# ── request bodies ───────────────────────────────────────────────────────


class ThreadBody(BaseModel):
    title: str = ""


class ContextBody(BaseModel):
    surrounding_text: str
    task_description: str
    source: str = "client_supplied"


class MessageBody(BaseModel):
    text: str
    intent: Optional[str] = None
    context: Optional[ContextBody] = None


class MarkBody(BaseModel):
    marked: bool


class QuizBody(BaseModel):
    seed: Optional[int] = None


class AnswerBody(BaseModel):
    question_id: str
    option_index: int
    expected_version: Optional[int] = Field(default=None, ge=0)


# ── serialization ────────────────────────────────────────────────────────


def _public_question(question) -> dict[str, Any]:
    """The pre-submission view: no key, no explanation, no rationale."""
    return {
        "id": question.id,
        "stem": question.stem,
        "options": list(question.options),
        "context_hint": question.context_hint,
        "marked_source": question.marked_source,
    }


def _quiz_json(quiz: Quiz) -> dict[str, Any]:
    return {
        "id": quiz.id,
        "user_id": quiz.user_id,
        "created_at": quiz.created_at.isoformat(),
        "partial": quiz.partial,
        "items": [
            {"question": _public_question(item.question), "was_new": item.was_new}
            for item in quiz.items
        ],
    }


def _session_json(session: QuizSession) -> dict[str, Any]:
    return {
        "id": session.id,
        "quiz_id": session.quiz_id,
        "state": session.state,
        "version": session.version,
        "queue": list(session.queue),
        "solved": list(session.solved),
        "progress": progress(session),
    }


def _thread_json(thread: ChatThread) -> dict[str, Any]:
    return {
        "id": thread.id,
        "title": thread.title,
        "created_at": thread.created_at.isoformat(),
        "messages": [_message_json(m) for m in thread.messages],
    }


def _message_json(message: ChatMessage) -> dict[str, Any]:
    return {
        "id": message.id,
        "thread_id": message.thread_id,
        "author": message.author,
        "text": message.text,
        "created_at": message.created_at.isoformat(),
        "intent": message.intent.value if message.intent else None,
        "payload": message.payload.to_dict() if message.payload else None,
        "marked": message.marked,
        "context": message.context.to_dict() if message.context else None,
    }


# ── the app ──────────────────────────────────────────────────────────────


class AppState:
    """Everything handlers share, wired once at startup."""

    def __init__(self, config: AppConfig, store: Store, gateway: Gateway):
        self.config = config
        self.store = store
        self.gateway = gateway
        self.conversations = ConversationService(
            store, gateway, user_language=config.user_language
        )
        self.sessions = SessionService(store)
        self.generator = QuizGenerator(gateway, policy=config.policy)
        self.scheduler = Scheduler(store, self.generator)


def create_app(
    config: Optional[AppConfig] = None,
    store: Optional[Store] = None,
    provider=None,
) -> FastAPI:
    config = config or AppConfig()
    store = store or Store(config.storage_path)
    provider = provider if provider is not None else build_provider(config)
    state = AppState(config, store, Gateway(provider))

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if config.scheduler_enabled:
            state.scheduler.start(config.scheduler_interval_s)
        yield
        state.scheduler.stop()

    app = FastAPI(
        title="workquiz",
        version="0.1.0",
        lifespan=lifespan,
        description="Chat-driven English practice service: threads, question pool, quizzes.",
    )
    app.state.services = state

    @app.exception_handler(ApiError)
    async def handle_api_error(request: Request, error: ApiError) -> JSONResponse:
        return _api_error_response(error)

    def current_user(request: Request) -> str:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token:
            raise ApiError("unauthorized", "missing bearer token", 401)
        user_id = config.tokens.get(token)
        if user_id is None:
            raise ApiError("unauthorized", "unknown token", 401)
        return user_id

    def owned(entity, user_id: str, kind: str):
        """Cross-user access is an authorization error, not a 404: the
        entity exists, the caller just does not own it."""
        if entity.user_id != user_id:
            raise ApiError("forbidden", f"{kind} belongs to another user", 403)
        return entity

    # ── threads ──────────────────────────────────────────────────────

    @app.post("/threads")
    def create_thread(body: ThreadBody, user_id: str = Depends(current_user)):
        thread = state.conversations.create_thread(user_id, title=body.title)
        return _thread_json(thread)

    @app.get("/threads")
    def list_threads(user_id: str = Depends(current_user)):
        threads = state.store.threads_for_user(user_id)
        return {"threads": [_thread_json(t) for t in threads]}

    @app.get("/threads/{thread_id}")
    def get_thread(thread_id: str, user_id: str = Depends(current_user)):
        thread = _translate(lambda: state.store.get_thread(thread_id))
        return _thread_json(owned(thread, user_id, "thread"))

    @app.post("/threads/{thread_id}/messages")
    def post_message(
        thread_id: str, body: MessageBody, user_id: str = Depends(current_user)
    ):
        thread = _translate(lambda: state.store.get_thread(thread_id))
        owned(thread, user_id, "thread")
        explicit: Optional[QueryIntent] = None
        text = body.text
        if body.intent is not None:
            explicit = _translate(lambda: QueryIntent.parse(body.intent))
            if explicit is not QueryIntent.TEXT:
                text = apply_intent_template(explicit, body.text)
        context = (
            TaskContext(
                surrounding_text=body.context.surrounding_text,
                task_description=body.context.task_description,
                source=body.context.source,
            )
            if body.context
            else None
        )

        user_message, assistant_message = _translate(
            lambda: state.conversations.post_message(
                thread_id, text, explicit_intent=explicit, context=context
            )
        )
        return {
            "user_message": _message_json(user_message),
            "assistant_message": _message_json(assistant_message),
        }

    @app.post("/messages/{message_id}/mark")
    def mark_message(
        message_id: str, body: MarkBody, user_id: str = Depends(current_user)
    ):
        thread, _ = _translate(lambda: state.store.find_message(message_id))
        owned(thread, user_id, "message")
        message = _translate(lambda: state.conversations.set_mark(message_id, body.marked))
        return _message_json(message)

    # ── dashboard and notifications ──────────────────────────────────

    @app.get("/dashboard")
    def dashboard(user_id: str = Depends(current_user)):
        from .session import dashboard_stats

        return dashboard_stats(state.store, user_id, tz=config.timezone)

    @app.get("/notifications/eligibility")
    def eligibility(user_id: str = Depends(current_user)):
        from .utils import utcnow

        summary = activity_summary(state.store, user_id, utcnow(), tz=config.timezone)
        eligible, reasons = notify_eligible(
            summary, utcnow(), evening_cutoff_hour=config.evening_cutoff_hour
        )
        return {"eligible": eligible, "reasons": reasons}

    # ── quizzes ──────────────────────────────────────────────────────

    @app.post("/quizzes")
    def start_quiz(body: QuizBody, user_id: str = Depends(current_user)):
        rng = Random(body.seed) if body.seed is not None else Random()
        quiz = _translate(
            lambda: assemble_quiz(
                state.store, user_id, config.policy, config.weight_params, rng
            )
        )
        session = state.sessions.start(quiz)
        return {"quiz": _quiz_json(quiz), "session": _session_json(session)}

    @app.get("/quizzes/{quiz_id}")
    def get_quiz(quiz_id: str, user_id: str = Depends(current_user)):
        quiz = _translate(lambda: state.store.get_quiz(quiz_id))
        owned(quiz, user_id, "quiz")
        sessions = [
            s for s in state.store.sessions_for_user(user_id) if s.quiz_id == quiz_id
        ]
        return {
            "quiz": _quiz_json(quiz),
            "session": _session_json(sessions[-1]) if sessions else None,
        }

    @app.post("/quizzes/{quiz_id}/answers")
    def submit_answer(
        quiz_id: str, body: AnswerBody, user_id: str = Depends(current_user)
    ):
        quiz = _translate(lambda: state.store.get_quiz(quiz_id))
        owned(quiz, user_id, "quiz")
        sessions = [
            s for s in state.store.sessions_for_user(user_id) if s.quiz_id == quiz_id
        ]
        if not sessions:
            raise ApiError("not_found", f"no session for quiz {quiz_id!r}", 404)
        result = _translate(
            lambda: state.sessions.submit(
                sessions[-1].id,
                body.question_id,
                body.option_index,
                expected_version=body.expected_version,
            )
        )
        return {
            "correct": result.correct,
            "explanation": result.explanation,
            "key_index": result.key_index,
            "completed": result.completed,
            "session": _session_json(result.session),
        }

    # ── health ───────────────────────────────────────────────────────

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    return app


# ── exception translation ────────────────────────────────────────────────

_ERROR_MAP: list[tuple[type, str, int]] = [
    (NotFoundError, "not_found", 404),
    (VersionConflictError, "version_conflict", 409),
    (InvalidOptionError, "invalid_option", 400),
    (OutOfOrderError, "out_of_order", 409),
    (InactiveSessionError, "inactive_session", 409),
    (NoQuestionsError, "no_questions", 409),
    (VariantMismatchError, "invalid_output", 502),
    (ParseError, "invalid_output", 502),
    (InvalidQuestionError, "invalid_output", 502),
    (FixtureMissingError, "provider_error", 502),
    (ProviderError, "provider_error", 502),
    (ConversationError, "invalid_request", 400),
    (SessionError, "invalid_request", 400),
    (DomainError, "invalid_request", 400),
    (ValueError, "invalid_request", 400),
]


def _translate(action):
    """Run a module call, mapping its domain exceptions onto the closed
    error code set. Order matters: most specific first."""
    try:
        return action()
    except ApiError:
        raise
    except tuple(t for t, _, _ in _ERROR_MAP) as exc:
        for exc_type, code, status in _ERROR_MAP:
            if isinstance(exc, exc_type):
                raise ApiError(code, str(exc), status) from exc
        raise  # unreachable
