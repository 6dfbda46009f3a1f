"""Quiz sessions: requeue until correct.

The head of the queue is the only answerable question. A wrong answer sends
it to the tail; a right answer retires it into ``solved``. The submission
log is append-only and replaying it over the quiz reproduces the session
state exactly.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass
from datetime import datetime
from typing import Optional
from zoneinfo import ZoneInfo

from .domain import Quiz, QuizItem, QuizSession, Submission
from .store import Store, VersionConflictError
from .utils import utcnow


class SessionError(ValueError):
    pass


class InactiveSessionError(SessionError):
    """Submissions are only valid against an active session."""


class OutOfOrderError(SessionError):
    """Answered question is not the current head of the queue."""


class InvalidOptionError(SessionError):
    """Option index outside the question's options."""


@dataclass(frozen=True)
class SubmissionResult:
    correct: bool
    explanation: str
    key_index: int
    completed: bool
    session: QuizSession


def start_session(
    quiz: Quiz, now: Optional[datetime] = None, session_id: Optional[str] = None
) -> QuizSession:
    if not quiz.items:
        raise SessionError("cannot start a session on an empty quiz")
    return QuizSession(
        id=session_id or f"s-{uuid.uuid4().hex}",
        user_id=quiz.user_id,
        quiz_id=quiz.id,
        queue=list(quiz.question_ids),
        solved=[],
        submissions=[],
        state="active",
        version=0,
        started_at=now or utcnow(),
    )


def current_question(session: QuizSession, quiz: Quiz) -> tuple[QuizItem, list[str]]:
    """The head item plus its badges: "new" on first-ever exposure, "star"
    when the source message was marked."""
    if session.state != "active":
        raise InactiveSessionError(f"session {session.id!r} is {session.state}")
    item = quiz.question_by_id(session.queue[0])
    badges = []
    if item.was_new:
        badges.append("new")
    if item.question.marked_source:
        badges.append("star")
    return item, badges


def submit_answer(
    session: QuizSession,
    quiz: Quiz,
    question_id: str,
    option_index: int,
    now: Optional[datetime] = None,
) -> SubmissionResult:
    """Grade locally, mutate the session, log the submission."""
    if session.state != "active":
        raise InactiveSessionError(f"session {session.id!r} is {session.state}")
    if not session.queue or session.queue[0] != question_id:
        head = session.queue[0] if session.queue else None
        raise OutOfOrderError(
            f"question {question_id!r} is not the current question ({head!r})"
        )
    item = quiz.question_by_id(question_id)
    if not isinstance(option_index, int) or not 0 <= option_index < len(item.question.options):
        raise InvalidOptionError(
            f"option_index {option_index!r} out of range for {len(item.question.options)} options"
        )
    timestamp = now or utcnow()
    correct = option_index == item.question.key_index
    session.queue.pop(0)
    if correct:
        session.solved.append(question_id)
    else:
        session.queue.append(question_id)
    session.submissions.append(
        Submission(
            question_id=question_id,
            option_index=option_index,
            correct=correct,
            created_at=timestamp,
        )
    )
    session.version += 1
    completed = not session.queue
    if completed:
        session.state = "completed"
        session.completed_at = timestamp
    return SubmissionResult(
        correct=correct,
        explanation=item.question.explanation,
        key_index=item.question.key_index,
        completed=completed,
        session=session,
    )


def progress(session: QuizSession) -> float:
    """Solved fraction of the quiz."""
    total = len(session.solved) + len(session.queue)
    if total == 0:
        return 1.0
    return len(session.solved) / total


def abandon(session: QuizSession) -> QuizSession:
    """Explicit abandonment is the only way a session stops being resumable."""
    if session.state == "active":
        session.state = "abandoned"
        session.version += 1
    return session


def replay(
    quiz: Quiz,
    submissions: list[Submission],
    session_id: str,
    started_at: datetime,
) -> QuizSession:
    """Rebuild the session state implied by a submission log."""
    session = start_session(quiz, now=started_at, session_id=session_id)
    for submission in submissions:
        submit_answer(
            session,
            quiz,
            submission.question_id,
            submission.option_index,
            now=submission.created_at,
        )
    return session


# ── store-backed service ─────────────────────────────────────────────────


class SessionService:
    """Persistence, optimistic concurrency, and pool counter updates."""

    def __init__(self, store: Store):
        self.store = store

    def start(self, quiz: Quiz, now: Optional[datetime] = None) -> QuizSession:
        session = start_session(quiz, now=now)
        self.store.put_session(session)
        return session

    def submit(
        self,
        session_id: str,
        question_id: str,
        option_index: int,
        now: Optional[datetime] = None,
        expected_version: Optional[int] = None,
    ) -> SubmissionResult:
        """Submit against the stored session.

        The write is compare-and-swap on the version read here, so of two
        concurrent submits exactly one wins.
        """
        timestamp = now or utcnow()
        with self.store.transaction():
            stored = self.store.get_session(session_id)
            if expected_version is not None and stored.version != expected_version:
                raise VersionConflictError(
                    f"session {session_id!r}: expected version {expected_version}, "
                    f"found {stored.version}"
                )
            quiz = self.store.get_quiz(stored.quiz_id)
            # Work on a copy so a failed CAS leaves the stored state untouched.
            session = QuizSession.from_dict(stored.to_dict())
            result = submit_answer(session, quiz, question_id, option_index, now=timestamp)
            self.store.put_session(session, expected_version=stored.version)
            entry = self.store.get_pool_entry(session.user_id, question_id)
            entry.attempts += 1
            if not result.correct:
                entry.wrong_attempts += 1
            entry.last_practiced = timestamp
            self.store.upsert_pool_entry(session.user_id, entry)
        return result

    def abandon(self, session_id: str) -> QuizSession:
        with self.store.transaction():
            session = self.store.get_session(session_id)
            abandon(session)
            self.store.put_session(session)
        return session


def dashboard_stats(
    store: Store,
    user_id: str,
    now: Optional[datetime] = None,
    tz: str = "UTC",
) -> dict[str, int]:
    """The three home counters. "Today" is the user's local calendar day."""
    now = now or utcnow()
    zone = ZoneInfo(tz)
    today = now.astimezone(zone).date()
    completed = [
        s for s in store.sessions_for_user(user_id)
        if s.state == "completed" and s.completed_at is not None
    ]
    quizzes_today = sum(
        1 for s in completed if s.completed_at.astimezone(zone).date() == today
    )
    new_available = sum(1 for e in store.get_pool(user_id).values() if e.exposures == 0)
    return {
        "quizzes_today": quizzes_today,
        "quizzes_total": len(completed),
        "new_questions_available": new_available,
    }
