"""Persistence: durability, transactions, versioning, pair handoff."""

from __future__ import annotations

import json
import threading
from dataclasses import replace

import pytest

from workquiz.domain import ChatMessage, ChatThread, PairRecord, QuizSession
from workquiz.store import NotFoundError, Store, VersionConflictError
from helpers import T0, make_entry, make_question


def _pair(i: int, user_id: str = "u1") -> PairRecord:
    return PairRecord(
        id=f"pair{i}",
        user_id=user_id,
        thread_id="t1",
        user_message_id=f"m{i}u",
        assistant_message_id=f"m{i}a",
        created_at=T0,
    )


def _thread() -> ChatThread:
    return ChatThread(
        id="t1",
        user_id="u1",
        created_at=T0,
        messages=(
            ChatMessage(id="m1", thread_id="t1", author="user", text="hello", created_at=T0),
        ),
    )


def test_round_trip_through_disk(tmp_path) -> None:
    path = tmp_path / "state.json"
    store = Store(path)
    store.put_thread(_thread())
    store.enqueue_pair(_pair(1))
    store.upsert_pool_entry("u1", make_entry(1))

    reopened = Store(path)
    assert reopened.get_thread("t1").messages[0].text == "hello"
    assert [p.id for p in reopened.pending_pairs("u1")] == ["pair1"]
    assert reopened.get_pool_entry("u1", "q1").question.id == "q1"


def test_in_memory_store_never_touches_disk() -> None:
    store = Store(None)
    store.put_thread(_thread())
    assert store.get_thread("t1").id == "t1"


def test_missing_ids_raise_not_found(tmp_path) -> None:
    store = Store(tmp_path / "s.json")
    with pytest.raises(NotFoundError):
        store.get_thread("ghost")
    with pytest.raises(NotFoundError):
        store.get_quiz("ghost")
    with pytest.raises(NotFoundError):
        store.get_session("ghost")
    with pytest.raises(NotFoundError):
        store.get_pool_entry("u1", "ghost")


def test_enqueue_pair_is_idempotent(tmp_path) -> None:
    store = Store(tmp_path / "s.json")
    assert store.enqueue_pair(_pair(1)) is True
    assert store.enqueue_pair(_pair(1)) is False
    assert len(store.pending_pairs("u1")) == 1


def test_consume_marks_in_the_same_transaction(tmp_path) -> None:
    path = tmp_path / "s.json"
    store = Store(path)
    store.enqueue_pair(_pair(1))
    store.enqueue_pair(_pair(2))

    first = store.consume_pending_pairs("u1")
    assert [p.id for p in first] == ["pair1", "pair2"]
    # Second poll sees nothing: the batch was marked consumed atomically.
    assert store.consume_pending_pairs("u1") == []
    # And the mark survived the disk round trip.
    assert Store(path).consume_pending_pairs("u1") == []


def test_crash_before_commit_redelivers(tmp_path) -> None:
    path = tmp_path / "s.json"
    store = Store(path)
    store.enqueue_pair(_pair(1))

    class Boom(RuntimeError):
        pass

    # Simulated crash inside the consume transaction, before the commit.
    original_save = store._save
    store._save = lambda: (_ for _ in ()).throw(Boom())
    with pytest.raises(Boom):
        store.consume_pending_pairs("u1")
    store._save = original_save

    # A fresh process sees the pair again exactly once.
    recovered = Store(path)
    redelivered = recovered.consume_pending_pairs("u1")
    assert [p.id for p in redelivered] == ["pair1"]
    assert recovered.consume_pending_pairs("u1") == []


def test_requeue_restores_pending(tmp_path) -> None:
    store = Store(tmp_path / "s.json")
    store.enqueue_pair(_pair(1))
    consumed = store.consume_pending_pairs("u1")
    store.requeue_pairs([p.id for p in consumed])
    assert [p.id for p in store.pending_pairs("u1")] == ["pair1"]


def test_session_versioning_is_compare_and_swap(tmp_path) -> None:
    store = Store(tmp_path / "s.json")
    session = QuizSession(
        id="s1",
        user_id="u1",
        quiz_id="qz1",
        queue=("q1",),
        solved=(),
        submissions=(),
        state="active",
        version=0,
        started_at=T0,
    )
    store.put_session(session, expected_version=None)
    bumped = replace(session, version=1)

    store.put_session(bumped, expected_version=0)
    with pytest.raises(VersionConflictError):
        store.put_session(bumped, expected_version=0)


def test_nested_transactions_save_once(tmp_path) -> None:
    path = tmp_path / "s.json"
    store = Store(path)
    saves = []
    original_save = store._save

    def counting_save():
        saves.append(1)
        original_save()

    store._save = counting_save
    with store.transaction():
        store.put_thread(_thread())
        with store.transaction():
            store.enqueue_pair(_pair(1))
    assert len(saves) == 1


def test_writes_are_atomic_files(tmp_path) -> None:
    path = tmp_path / "s.json"
    store = Store(path)
    store.put_thread(_thread())
    # The on-disk artifact is always complete JSON, never a torn write.
    data = json.loads(path.read_text())
    assert "threads" in data
    assert not list(tmp_path.glob("*.tmp"))


def test_set_pool_marked_propagates(tmp_path) -> None:
    store = Store(tmp_path / "s.json")
    q1 = make_question(1, source_message_id="msgA")
    q2 = make_question(2, source_message_id="msgA")
    q3 = make_question(3, source_message_id="msgB")
    for q in (q1, q2, q3):
        store.upsert_pool_entry("u1", make_entry(0, question=q))

    changed = store.set_pool_marked("u1", "msgA", True)
    assert changed == 2
    assert store.get_pool_entry("u1", "q1").question.marked_source is True
    assert store.get_pool_entry("u1", "q3").question.marked_source is False


def test_concurrent_writers_do_not_corrupt(tmp_path) -> None:
    path = tmp_path / "s.json"
    store = Store(path)
    errors = []

    def writer(start: int) -> None:
        try:
            for i in range(start, start + 20):
                store.enqueue_pair(_pair(i))
        except Exception as exc:  # pragma: no cover - only on failure
            errors.append(exc)

    threads = [threading.Thread(target=writer, args=(n * 100,)) for n in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(Store(path).pending_pairs("u1")) == 80
