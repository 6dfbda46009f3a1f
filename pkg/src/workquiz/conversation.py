"""Chat orchestration.

The user's query goes through intent classification (skipped entirely when
the intent was chosen explicitly), then a single response-generation call
that carries the full thread history. The returned payload variant must
match the intent; anything else is a hard error that keeps the raw text.
"""

from __future__ import annotations

import logging
import uuid
from dataclasses import replace
from datetime import datetime
from typing import Optional

from .domain import (
    ChatMessage,
    ChatThread,
    PairRecord,
    QueryIntent,
    StructuredResponse,
    TaskContext,
    payload_matches_intent,
)
from .gateway import Gateway
from .store import Store
from .utils import utcnow

log = logging.getLogger(__name__)


class ConversationError(ValueError):
    """Misuse of the chat surface (wrong author, duplicate context, ...)."""


class VariantMismatchError(RuntimeError):
    """Provider answered with a payload variant that contradicts the intent."""

    def __init__(self, intent: QueryIntent, payload: StructuredResponse, raw: str):
        self.intent = intent
        self.payload = payload
        self.raw = raw
        super().__init__(
            f"intent {intent.value!r} requires a matching payload, got {payload.kind!r}"
        )


# Boilerplate inserted into the chatbox when the user presses an intent
# button. The user can edit it before sending.
INTENT_TEMPLATES: dict[QueryIntent, str] = {
    QueryIntent.LOOKUP: (
        "Please explain the meaning of the following word (or expression) "
        "in detail in dictionary format"
    ),
    QueryIntent.TRANSLATION: (
        "Translate the following text naturally between English and Korean. "
        "Please also explain how the nuance and context of the sentences are "
        "reflected in the translation."
    ),
    QueryIntent.PROOFREAD: (
        "Proofread the following text into more accurate and natural English. "
        "Please also provide an explanation of the changes and the reasons "
        "behind them."
    ),
}


def apply_intent_template(intent: QueryIntent, user_text: str) -> str:
    """Prepend the intent boilerplate. The text intent has no template."""
    template = INTENT_TEMPLATES.get(intent)
    if template is None:
        raise ConversationError(f"intent {intent.value!r} has no query template")
    return f"{template}\n{user_text}"


def _new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex}"


class ConversationService:
    def __init__(self, store: Store, gateway: Gateway, user_language: str = "Korean"):
        self.store = store
        self.gateway = gateway
        self.user_language = user_language

    # ── threads ──────────────────────────────────────────────────────

    def create_thread(self, user_id: str, title: str = "", now: Optional[datetime] = None) -> ChatThread:
        thread = ChatThread(
            id=_new_id("t"), user_id=user_id, created_at=now or utcnow(), title=title
        )
        self.store.put_thread(thread)
        return thread

    # ── intent ───────────────────────────────────────────────────────

    def classify_intent(self, text: str) -> QueryIntent:
        """LLM-backed classification. Unknown labels raise, no silent default."""
        intent, _raw = self.gateway.call("intent_classifier", {"text": text})
        return intent

    # ── response generation ──────────────────────────────────────────

    def generate_response(
        self,
        thread: ChatThread,
        user_message: ChatMessage,
        intent: QueryIntent,
        now: Optional[datetime] = None,
    ) -> ChatMessage:
        """One provider call with the full history. Never re-classifies."""
        history = [{"author": m.author, "text": m.text} for m in thread.messages]
        payload, raw = self.gateway.call(
            "response_generator",
            {
                "user_language": self.user_language,
                "intent": intent.value,
                "text": user_message.text,
                "history": history,
            },
        )
        if not payload_matches_intent(payload, intent):
            raise VariantMismatchError(intent, payload, raw)
        return ChatMessage(
            id=_new_id("m"),
            thread_id=thread.id,
            author="assistant",
            text=raw,
            created_at=now or utcnow(),
            intent=intent,
            payload=payload,
        )

    def post_message(
        self,
        thread_id: str,
        text: str,
        explicit_intent: Optional[QueryIntent] = None,
        context: Optional[TaskContext] = None,
        now: Optional[datetime] = None,
    ) -> tuple[ChatMessage, ChatMessage]:
        """Append a user turn, generate the assistant turn, queue the pair.

        An explicitly selected intent bypasses the classifier: zero
        classifier calls are made in that case.
        """
        thread = self.store.get_thread(thread_id)
        intent = explicit_intent if explicit_intent is not None else self.classify_intent(text)
        timestamp = now or utcnow()
        user_message = ChatMessage(
            id=_new_id("m"),
            thread_id=thread.id,
            author="user",
            text=text,
            created_at=timestamp,
            intent=intent,
            context=context,
        )
        assistant_message = self.generate_response(thread, user_message, intent, now=timestamp)
        with self.store.transaction():
            thread.messages.append(user_message)
            thread.messages.append(assistant_message)
            self.store.put_thread(thread)
            self.store.enqueue_pair(
                PairRecord(
                    id=_new_id("p"),
                    user_id=thread.user_id,
                    thread_id=thread.id,
                    user_message_id=user_message.id,
                    assistant_message_id=assistant_message.id,
                    created_at=timestamp,
                )
            )
        return user_message, assistant_message

    # ── context ──────────────────────────────────────────────────────

    def extract_task_context(self, capture_text: str, source: str = "client_supplied") -> TaskContext:
        """Turn raw captured text into a TaskContext via the provider.

        The surrounding text must be a verbatim subset of the capture;
        a provider that paraphrases is rejected.
        """
        context, _raw = self.gateway.call("context_extractor", {"capture_text": capture_text})
        if _collapse(context.surrounding_text) not in _collapse(capture_text):
            raise ConversationError(
                "extracted surrounding_text is not a verbatim subset of the capture"
            )
        return replace(context, source=source)

    def attach_context(self, message_id: str, context: TaskContext) -> ChatMessage:
        """Attach context to a user message. One context per message, ever."""
        thread, message = self.store.find_message(message_id)
        if message.author != "user":
            raise ConversationError("context can only be attached to user messages")
        if message.context is not None:
            raise ConversationError(f"message {message_id!r} already has a context")
        with self.store.transaction():
            message.context = context
            self.store.put_thread(thread)
        return message

    # ── marking ──────────────────────────────────────────────────────

    def set_mark(self, message_id: str, marked: bool) -> ChatMessage:
        """Mark or unmark an assistant message. Idempotent.

        The flag also propagates to pool questions generated from this
        message, so review weighting sees it immediately.
        """
        thread, message = self.store.find_message(message_id)
        if message.author != "assistant":
            raise ConversationError("only assistant messages can be marked")
        with self.store.transaction():
            message.marked = marked
            self.store.put_thread(thread)
            self.store.set_pool_marked(thread.user_id, message_id, marked)
        return message


def _collapse(text: str) -> str:
    return " ".join(text.split())
