"""Practice pool scheduling.

Review weight of an entry (exposures >= 1):

    weight = 1 / (1 + exposures)
           * (1 + wrong_rate_gain * wrong_attempts / max(attempts, 1))
           * (mark_boost if the source message was marked else 1)
           * (1 + min(days_stale, recency_cap) / recency_halfsat)

Less-practiced, often-missed, marked, and stale questions float up. A never
practiced entry counts as maximally stale (the cap).
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass
from datetime import datetime, timedelta
from random import Random
from typing import Optional, Sequence, TypeVar
from zoneinfo import ZoneInfo

from .domain import PoolEntry, Quiz, QuizItem, QuizPolicy, validate_policy
from .store import Store
from .utils import canonical_json, utcnow

T = TypeVar("T")


class PoolError(ValueError):
    pass


class NoQuestionsError(PoolError):
    """The pool has nothing to assemble a quiz from."""


@dataclass(frozen=True)
class ReviewWeightParams:
    mark_boost: float = 1.5
    wrong_rate_gain: float = 1.0
    recency_halfsat_days: float = 7.0
    recency_cap_days: float = 14.0

    def to_dict(self) -> dict:
        return {
            "mark_boost": self.mark_boost,
            "wrong_rate_gain": self.wrong_rate_gain,
            "recency_halfsat_days": self.recency_halfsat_days,
            "recency_cap_days": self.recency_cap_days,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewWeightParams":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


DEFAULT_WEIGHT_PARAMS = ReviewWeightParams()


def compute_weight(
    entry: PoolEntry,
    now: datetime,
    params: ReviewWeightParams = DEFAULT_WEIGHT_PARAMS,
) -> float:
    """Review weight. Only exposed entries qualify: new ones are not reviews."""
    if entry.exposures < 1:
        raise PoolError("compute_weight requires exposures >= 1")
    exposure_factor = 1.0 / (1.0 + entry.exposures)
    wrong_rate = entry.wrong_attempts / max(entry.attempts, 1)
    wrong_factor = 1.0 + params.wrong_rate_gain * wrong_rate
    mark_factor = params.mark_boost if entry.question.marked_source else 1.0
    if entry.last_practiced is None:
        days_stale = params.recency_cap_days
    else:
        days_stale = max((now - entry.last_practiced).total_seconds() / 86400.0, 0.0)
    recency_factor = 1.0 + min(days_stale, params.recency_cap_days) / params.recency_halfsat_days
    return exposure_factor * wrong_factor * mark_factor * recency_factor


def weighted_sample_without_replacement(
    items: Sequence[T], weights: Sequence[float], k: int, rng: Random
) -> list[T]:
    """Draw k distinct items, probability proportional to weight, then
    renormalize over the remainder and repeat."""
    if k > len(items):
        raise PoolError(f"cannot draw {k} from {len(items)} items")
    if any(w <= 0 or not math.isfinite(w) for w in weights):
        raise PoolError("weights must be positive and finite")
    remaining = list(zip(items, weights))
    picked: list[T] = []
    for _ in range(k):
        total = sum(w for _, w in remaining)
        threshold = rng.random() * total
        acc = 0.0
        index = len(remaining) - 1  # guard against float round-off
        for i, (_, w) in enumerate(remaining):
            acc += w
            if threshold < acc:
                index = i
                break
        picked.append(remaining.pop(index)[0])
    return picked


@dataclass(frozen=True)
class QuizSelection:
    new_entries: tuple[PoolEntry, ...]
    review_entries: tuple[PoolEntry, ...]
    partial: bool

    @property
    def entries(self) -> tuple[PoolEntry, ...]:
        return self.new_entries + self.review_entries


def select_quiz(
    entries: Sequence[PoolEntry],
    policy: QuizPolicy,
    params: ReviewWeightParams,
    now: datetime,
    rng: Random,
) -> QuizSelection:
    """Pick quiz questions without mutating anything.

    New slots are filled newest-first from unseen entries; review slots by
    weighted sampling over exposed entries. Shortfalls fill from the other
    partition; if the pool cannot fill the quiz at all, the selection is
    flagged partial.
    """
    problems = validate_policy(policy)
    if problems:
        raise PoolError("invalid policy: " + "; ".join(problems))

    new_pool = sorted(
        (e for e in entries if e.exposures == 0),
        key=lambda e: (e.created_at, e.question.id),
        reverse=True,
    )
    review_pool = [e for e in entries if e.exposures >= 1]

    new_take = min(policy.new_count, len(new_pool))
    review_take = min(policy.review_count, len(review_pool))
    deficit = policy.quiz_size - new_take - review_take
    if deficit > 0:
        extra = min(deficit, len(review_pool) - review_take)
        review_take += extra
        deficit -= extra
    if deficit > 0:
        extra = min(deficit, len(new_pool) - new_take)
        new_take += extra
        deficit -= extra

    chosen_new = tuple(new_pool[:new_take])
    review_sorted = sorted(review_pool, key=lambda e: e.question.id)
    weights = [compute_weight(e, now, params) for e in review_sorted]
    chosen_review = tuple(
        weighted_sample_without_replacement(review_sorted, weights, review_take, rng)
    )
    if not chosen_new and not chosen_review:
        raise NoQuestionsError("the pool has no questions to assemble")
    return QuizSelection(
        new_entries=chosen_new, review_entries=chosen_review, partial=deficit > 0
    )


def assemble_quiz(
    store: Store,
    user_id: str,
    policy: QuizPolicy,
    params: ReviewWeightParams,
    rng: Random,
    now: Optional[datetime] = None,
) -> Quiz:
    """Select, mark exposures, persist. Exposure bumps happen at quiz start."""
    now = now or utcnow()
    entries = list(store.get_pool(user_id).values())
    selection = select_quiz(entries, policy, params, now, rng)
    items = [QuizItem(question=e.question, was_new=True) for e in selection.new_entries]
    items += [QuizItem(question=e.question, was_new=False) for e in selection.review_entries]
    quiz = Quiz(
        id=f"quiz-{uuid.uuid4().hex}",
        user_id=user_id,
        items=items,
        created_at=now,
        partial=selection.partial,
    )
    with store.transaction():
        for entry in selection.entries:
            entry.exposures += 1
            store.upsert_pool_entry(user_id, entry)
        store.put_quiz(quiz)
    return quiz


def export_pool(store: Store, user_id: str) -> str:
    """Canonical JSON dump of a user's pool, stable across identical runs."""
    entries = store.get_pool(user_id)
    payload = [entries[qid].to_dict() for qid in sorted(entries)]
    return canonical_json(payload)


# ── notifications ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ActivitySummary:
    """What notification eligibility is judged on."""

    last_quiz_completed_at: Optional[datetime]
    unattempted_generated_today: int


def activity_summary(
    store: Store,
    user_id: str,
    now: datetime,
    tz: str = "UTC",
) -> ActivitySummary:
    """Collect the eligibility inputs from the store.

    "Today" is the user's local calendar day; "unattempted" means the pool
    entry was never answered in any quiz.
    """
    zone = ZoneInfo(tz)
    today = now.astimezone(zone).date()
    completed = [
        s.completed_at
        for s in store.sessions_for_user(user_id)
        if s.state == "completed" and s.completed_at is not None
    ]
    unattempted_today = sum(
        1
        for e in store.get_pool(user_id).values()
        if e.attempts == 0 and e.created_at.astimezone(zone).date() == today
    )
    return ActivitySummary(
        last_quiz_completed_at=max(completed) if completed else None,
        unattempted_generated_today=unattempted_today,
    )


REASON_INACTIVE = "no_quiz_completed_in_three_days"
REASON_UNATTEMPTED = "todays_questions_unattempted"


def notify_eligible(
    activity: ActivitySummary,
    now: datetime,
    evening_cutoff_hour: int = 18,
) -> tuple[bool, list[str]]:
    """Evening-push eligibility.

    Either the user has not completed a quiz in more than three days, or
    questions generated today are still unattempted at the evening cutoff.
    """
    reasons: list[str] = []
    last = activity.last_quiz_completed_at
    if last is None or now - last > timedelta(days=3):
        reasons.append(REASON_INACTIVE)
    if now.hour >= evening_cutoff_hour and activity.unattempted_generated_today > 0:
        reasons.append(REASON_UNATTEMPTED)
    return bool(reasons), reasons
