"""Session mechanics: requeue until correct, replay, concurrency, stats."""

from __future__ import annotations

from datetime import timedelta
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from workquiz.domain import Quiz, QuizItem
from workquiz.session import (
    InactiveSessionError,
    InvalidOptionError,
    OutOfOrderError,
    SessionError,
    SessionService,
    abandon,
    current_question,
    dashboard_stats,
    progress,
    replay,
    start_session,
    submit_answer,
)
from workquiz.store import Store, VersionConflictError

from helpers import T0, make_entry, make_question


def make_quiz(n: int = 10, new_count: int = 7, quiz_id: str = "qz1") -> Quiz:
    items = [
        QuizItem(question=make_question(i, marked=(i == 3)), was_new=i < new_count)
        for i in range(n)
    ]
    return Quiz(id=quiz_id, user_id="u1", items=items, created_at=T0)


def test_start_session_queues_every_question() -> None:
    quiz = make_quiz()
    session = start_session(quiz, now=T0)
    assert list(session.queue) == [f"q{i}" for i in range(10)]
    assert session.state == "active"
    assert session.version == 0
    assert progress(session) == 0.0


def test_start_rejects_empty_quiz() -> None:
    with pytest.raises(SessionError, match="empty"):
        start_session(Quiz(id="qz0", user_id="u1", items=[], created_at=T0), now=T0)


def test_current_question_badges() -> None:
    quiz = make_quiz()
    session = start_session(quiz, now=T0)
    item, badges = current_question(session, quiz)
    assert item.question.id == "q0"
    assert badges == ["new"]

    # Walk to the marked question and check the star shows up.
    for i in range(3):
        submit_answer(session, quiz, f"q{i}", quiz.question_by_id(f"q{i}").question.key_index, now=T0)
    _, badges = current_question(session, quiz)
    assert badges == ["new", "star"]


def test_correct_answer_retires_the_question() -> None:
    quiz = make_quiz(3, new_count=3)
    session = start_session(quiz, now=T0)
    result = submit_answer(session, quiz, "q0", 0, now=T0)
    assert result.correct is True
    assert result.completed is False
    assert session.solved == ["q0"]
    assert list(session.queue) == ["q1", "q2"]
    assert session.version == 1


def test_wrong_answer_requeues_at_the_tail() -> None:
    quiz = make_quiz(3, new_count=3)
    session = start_session(quiz, now=T0)
    result = submit_answer(session, quiz, "q0", 2, now=T0)  # key is 0
    assert result.correct is False
    assert result.key_index == 0
    assert result.explanation
    assert list(session.queue) == ["q1", "q2", "q0"]
    assert session.solved == []


def test_only_the_head_is_answerable() -> None:
    quiz = make_quiz(3, new_count=3)
    session = start_session(quiz, now=T0)
    with pytest.raises(OutOfOrderError, match="not the current question"):
        submit_answer(session, quiz, "q2", 0, now=T0)
    assert session.version == 0
    assert session.submissions == []


def test_option_index_is_range_checked() -> None:
    quiz = make_quiz(2, new_count=2)
    session = start_session(quiz, now=T0)
    with pytest.raises(InvalidOptionError):
        submit_answer(session, quiz, "q0", 3, now=T0)
    with pytest.raises(InvalidOptionError):
        submit_answer(session, quiz, "q0", -1, now=T0)


def test_completion_closes_the_session() -> None:
    quiz = make_quiz(2, new_count=2)
    session = start_session(quiz, now=T0)
    submit_answer(session, quiz, "q0", 0, now=T0)
    result = submit_answer(session, quiz, "q1", 1, now=T0)
    assert result.completed is True
    assert session.state == "completed"
    assert session.completed_at == T0
    assert progress(session) == 1.0
    with pytest.raises(InactiveSessionError):
        submit_answer(session, quiz, "q0", 0, now=T0)
    with pytest.raises(InactiveSessionError):
        current_question(session, quiz)


def test_progress_counts_solved_fraction() -> None:
    quiz = make_quiz(4, new_count=4)
    session = start_session(quiz, now=T0)
    submit_answer(session, quiz, "q0", 0, now=T0)
    assert progress(session) == pytest.approx(0.25)
    submit_answer(session, quiz, "q1", 0, now=T0)  # wrong, key is 1
    assert progress(session) == pytest.approx(0.25)
    submit_answer(session, quiz, "q2", 2, now=T0)
    assert progress(session) == pytest.approx(0.5)


def test_abandon_is_explicit_and_final() -> None:
    quiz = make_quiz(2, new_count=2)
    session = start_session(quiz, now=T0)
    abandon(session)
    assert session.state == "abandoned"
    with pytest.raises(InactiveSessionError):
        submit_answer(session, quiz, "q0", 0, now=T0)
    # Abandoning twice is a no-op, not an error.
    version = session.version
    abandon(session)
    assert session.version == version


def test_replay_reproduces_state_exactly() -> None:
    quiz = make_quiz()
    session = start_session(quiz, now=T0, session_id="s1")
    rng = Random(3)
    while session.state == "active":
        head = session.queue[0]
        submit_answer(session, quiz, head, rng.randrange(3), now=T0)

    rebuilt = replay(quiz, list(session.submissions), "s1", T0)
    assert rebuilt.solved == session.solved
    assert rebuilt.queue == session.queue
    assert rebuilt.state == session.state
    assert rebuilt.version == session.version
    assert rebuilt.submissions == session.submissions


@given(st.integers(min_value=0, max_value=2**32))
@settings(max_examples=40, deadline=None)
def test_random_play_terminates_iff_all_answered_correctly(seed) -> None:
    quiz = make_quiz(6, new_count=4)
    session = start_session(quiz, now=T0, session_id=f"s{seed}")
    rng = Random(seed)
    guard = 0
    while session.state == "active":
        head = session.queue[0]
        submit_answer(session, quiz, head, rng.randrange(3), now=T0)
        guard += 1
        assert guard < 10_000
    wrong = sum(1 for s in session.submissions if not s.correct)
    # Every question was eventually answered correctly, exactly once each.
    assert sorted(session.solved) == sorted(q.question.id for q in quiz.items)
    assert len(session.submissions) == len(quiz.items) + wrong
    # And the log replays to the same terminal state.
    rebuilt = replay(quiz, list(session.submissions), session.id, T0)
    assert rebuilt.solved == session.solved
    assert rebuilt.state == "completed"


# ── store-backed service ─────────────────────────────────────────────────


def _provisioned_store(quiz: Quiz) -> Store:
    store = Store(None)
    for item in quiz.items:
        store.upsert_pool_entry("u1", make_entry(question=item.question, exposures=1))
    store.put_quiz(quiz)
    return store


def test_service_submit_updates_pool_counters() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    session = service.start(quiz, now=T0)

    later = T0 + timedelta(minutes=5)
    service.submit(session.id, "q0", 1, now=later)  # wrong
    entry = store.get_pool_entry("u1", "q0")
    assert entry.attempts == 1
    assert entry.wrong_attempts == 1
    assert entry.last_practiced == later

    service.submit(session.id, "q1", 1, now=later)  # correct
    entry = store.get_pool_entry("u1", "q1")
    assert entry.attempts == 1
    assert entry.wrong_attempts == 0


def test_service_requeued_attempts_accumulate() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    session = service.start(quiz, now=T0)

    service.submit(session.id, "q0", 1, now=T0)  # wrong, requeued
    service.submit(session.id, "q1", 1, now=T0)  # correct
    service.submit(session.id, "q0", 0, now=T0)  # retried correctly
    entry = store.get_pool_entry("u1", "q0")
    assert entry.attempts == 2
    assert entry.wrong_attempts == 1
    assert store.get_session(session.id).state == "completed"


def test_service_conflicting_submit_loses() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    session = service.start(quiz, now=T0)

    service.submit(session.id, "q0", 0, now=T0, expected_version=0)
    # A second client still at version 0 must not double-apply.
    with pytest.raises(VersionConflictError):
        service.submit(session.id, "q1", 1, now=T0, expected_version=0)
    stored = store.get_session(session.id)
    assert stored.version == 1
    assert len(stored.submissions) == 1
    # It can proceed after reloading.
    service.submit(session.id, "q1", 1, now=T0, expected_version=1)
    assert store.get_session(session.id).state == "completed"


def test_service_failed_submit_leaves_no_trace() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    session = service.start(quiz, now=T0)
    with pytest.raises(OutOfOrderError):
        service.submit(session.id, "q1", 0, now=T0)
    stored = store.get_session(session.id)
    assert stored.version == 0
    assert stored.submissions == []
    assert store.get_pool_entry("u1", "q1").attempts == 0


def test_service_abandon_persists() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    session = service.start(quiz, now=T0)
    service.abandon(session.id)
    assert store.get_session(session.id).state == "abandoned"


# ── dashboard ────────────────────────────────────────────────────────────


def test_dashboard_counts_by_local_day() -> None:
    quiz_a = make_quiz(2, new_count=2, quiz_id="qzA")
    store = _provisioned_store(quiz_a)
    service = SessionService(store)

    # One quiz completed now, one completed two days ago.
    session_a = service.start(quiz_a, now=T0)
    service.submit(session_a.id, "q0", 0, now=T0)
    service.submit(session_a.id, "q1", 1, now=T0)

    quiz_b = make_quiz(2, new_count=2, quiz_id="qzB")
    store.put_quiz(quiz_b)
    earlier = T0 - timedelta(days=2)
    session_b = service.start(quiz_b, now=earlier)
    service.submit(session_b.id, "q0", 0, now=earlier)
    service.submit(session_b.id, "q1", 1, now=earlier)

    # Unseen questions waiting in the pool.
    store.upsert_pool_entry("u1", make_entry(50))
    store.upsert_pool_entry("u1", make_entry(51))

    stats = dashboard_stats(store, "u1", now=T0)
    assert stats == {
        "quizzes_today": 1,
        "quizzes_total": 2,
        "new_questions_available": 2,
    }


def test_dashboard_respects_timezone() -> None:
    quiz = make_quiz(2, new_count=2)
    store = _provisioned_store(quiz)
    service = SessionService(store)
    # Completed 2026-03-02 23:30 UTC = 2026-03-03 08:30 in Seoul.
    late = T0.replace(hour=23, minute=30)
    session = service.start(quiz, now=late)
    service.submit(session.id, "q0", 0, now=late)
    service.submit(session.id, "q1", 1, now=late)

    next_morning_utc = late + timedelta(hours=6)
    utc_stats = dashboard_stats(store, "u1", now=next_morning_utc, tz="UTC")
    seoul_stats = dashboard_stats(store, "u1", now=next_morning_utc, tz="Asia/Seoul")
    assert utc_stats["quizzes_today"] == 0
    assert seoul_stats["quizzes_today"] == 1
