"""Durable embedded store.

One JSON file, rewritten atomically (temp file + rename + fsync) at the end
of every transaction. A single re-entrant lock serializes writers, which is
plenty at desk scale. Constructed with ``path=None`` it becomes a purely
in-memory store for tests.

The public methods form the repository interface; nothing above this module
touches the file layout.
"""

from __future__ import annotations

import json
import os
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from .domain import (
    ChatMessage,
    ChatThread,
    PairRecord,
    PoolEntry,
    Quiz,
    QuizSession,
)


class StoreError(RuntimeError):
    pass


class NotFoundError(StoreError):
    """No entity with that id."""


class VersionConflictError(StoreError):
    """Optimistic concurrency check failed: somebody else wrote first."""


class Store:
    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._lock = threading.RLock()
        self._depth = 0
        self.threads: dict[str, ChatThread] = {}
        self.pairs: dict[str, PairRecord] = {}
        self.pool: dict[str, dict[str, PoolEntry]] = {}
        self.quizzes: dict[str, Quiz] = {}
        self.sessions: dict[str, QuizSession] = {}
        if self.path and self.path.exists():
            self._load()

    # ── persistence ──────────────────────────────────────────────────

    def _load(self) -> None:
        data = json.loads(self.path.read_text(encoding="utf-8"))
        self.threads = {t["id"]: ChatThread.from_dict(t) for t in data.get("threads", [])}
        self.pairs = {p["id"]: PairRecord.from_dict(p) for p in data.get("pairs", [])}
        self.pool = {
            user_id: {e["question"]["id"]: PoolEntry.from_dict(e) for e in entries}
            for user_id, entries in data.get("pool", {}).items()
        }
        self.quizzes = {q["id"]: Quiz.from_dict(q) for q in data.get("quizzes", [])}
        self.sessions = {s["id"]: QuizSession.from_dict(s) for s in data.get("sessions", [])}

    def _snapshot(self) -> dict:
        return {
            "threads": [t.to_dict() for t in self.threads.values()],
            "pairs": [p.to_dict() for p in self.pairs.values()],
            "pool": {
                user_id: [e.to_dict() for e in entries.values()]
                for user_id, entries in self.pool.items()
            },
            "quizzes": [q.to_dict() for q in self.quizzes.values()],
            "sessions": [s.to_dict() for s in self.sessions.values()],
        }

    def _save(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        payload = json.dumps(self._snapshot(), sort_keys=True, separators=(",", ":"))
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, self.path)

    @contextmanager
    def transaction(self) -> Iterator["Store"]:
        """Mutations belong inside a transaction; commit saves once, at the top level."""
        with self._lock:
            self._depth += 1
            try:
                yield self
            finally:
                self._depth -= 1
                if self._depth == 0:
                    self._save()

    # ── threads and messages ─────────────────────────────────────────

    def put_thread(self, thread: ChatThread) -> None:
        with self.transaction():
            self.threads[thread.id] = thread

    def get_thread(self, thread_id: str) -> ChatThread:
        thread = self.threads.get(thread_id)
        if thread is None:
            raise NotFoundError(f"thread {thread_id!r} not found")
        return thread

    def threads_for_user(self, user_id: str) -> list[ChatThread]:
        threads = [t for t in self.threads.values() if t.user_id == user_id]
        return sorted(threads, key=lambda t: (t.created_at, t.id))

    def find_message(self, message_id: str) -> tuple[ChatThread, ChatMessage]:
        for thread in self.threads.values():
            for message in thread.messages:
                if message.id == message_id:
                    return thread, message
        raise NotFoundError(f"message {message_id!r} not found")

    # ── pair queue ───────────────────────────────────────────────────

    def enqueue_pair(self, pair: PairRecord) -> bool:
        """Idempotent by pair id. Returns False when the id already exists."""
        with self.transaction():
            if pair.id in self.pairs:
                return False
            self.pairs[pair.id] = pair
            return True

    def pending_pairs(self, user_id: Optional[str] = None) -> list[PairRecord]:
        pairs = [
            p
            for p in self.pairs.values()
            if not p.consumed and (user_id is None or p.user_id == user_id)
        ]
        return sorted(pairs, key=lambda p: (p.created_at, p.id))

    def consume_pending_pairs(self, user_id: Optional[str] = None) -> list[PairRecord]:
        """Hand off every pending pair and commit the consumption atomically.

        A crash before this transaction commits leaves the pairs pending, so
        the next poll re-delivers exactly them.
        """
        with self.transaction():
            pending = self.pending_pairs(user_id)
            for pair in pending:
                pair.consumed = True
            return pending

    def requeue_pairs(self, pair_ids: list[str]) -> None:
        with self.transaction():
            for pair_id in pair_ids:
                if pair_id in self.pairs:
                    self.pairs[pair_id].consumed = False

    # ── practice pool ────────────────────────────────────────────────

    def get_pool(self, user_id: str) -> dict[str, PoolEntry]:
        return self.pool.get(user_id, {})

    def upsert_pool_entry(self, user_id: str, entry: PoolEntry) -> None:
        with self.transaction():
            self.pool.setdefault(user_id, {})[entry.question.id] = entry

    def get_pool_entry(self, user_id: str, question_id: str) -> PoolEntry:
        entry = self.pool.get(user_id, {}).get(question_id)
        if entry is None:
            raise NotFoundError(f"pool entry {question_id!r} not found for {user_id!r}")
        return entry

    def set_pool_marked(self, user_id: str, source_message_id: str, marked: bool) -> int:
        """Propagate a (un)mark to every question generated from the message."""
        changed = 0
        with self.transaction():
            for question_id, entry in self.pool.get(user_id, {}).items():
                if entry.question.source_message_id == source_message_id:
                    if entry.question.marked_source != marked:
                        entry.question = entry.question.with_marked_source(marked)
                        changed += 1
        return changed

    # ── quizzes and sessions ─────────────────────────────────────────

    def put_quiz(self, quiz: Quiz) -> None:
        with self.transaction():
            self.quizzes[quiz.id] = quiz

    def get_quiz(self, quiz_id: str) -> Quiz:
        quiz = self.quizzes.get(quiz_id)
        if quiz is None:
            raise NotFoundError(f"quiz {quiz_id!r} not found")
        return quiz

    def put_session(self, session: QuizSession, expected_version: Optional[int] = None) -> None:
        """Write a session, optionally enforcing the version we read."""
        with self.transaction():
            current = self.sessions.get(session.id)
            if expected_version is not None and current is not None:
                if current.version != expected_version:
                    raise VersionConflictError(
                        f"session {session.id!r}: expected version {expected_version}, "
                        f"found {current.version}"
                    )
            self.sessions[session.id] = session

    def get_session(self, session_id: str) -> QuizSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"session {session_id!r} not found")
        return session

    def sessions_for_user(self, user_id: str) -> list[QuizSession]:
        sessions = [s for s in self.sessions.values() if s.user_id == user_id]
        return sorted(sessions, key=lambda s: (s.started_at, s.id))
