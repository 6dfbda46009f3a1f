"""Background pipeline: poll queued pairs, generate questions, grow the pool.

Handoff is at-most-once: ``poll_new_pairs`` reads and commits consumption in
one store transaction, so a crash before that commit re-delivers exactly the
uncommitted pairs and nothing else. Transient provider failures requeue the
pair for the next tick; content failures (unparseable or invalid output) are
reported and not retried, since identical input would fail identically.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Optional

from .domain import PairRecord, PoolEntry
from .gateway import ParseError, ProviderError
from .quizgen import (
    PairOutcome,
    PartialBatchError,
    QaAbortedError,
    QuizGenerator,
    generation_input_from_pair,
)
from .store import Store
from .utils import utcnow

log = logging.getLogger(__name__)


def poll_new_pairs(store: Store, user_id: Optional[str] = None) -> list[PairRecord]:
    """Hand off every pair queued since the last successful poll, each once."""
    return store.consume_pending_pairs(user_id)


@dataclass
class TickReport:
    """Ledger of one scheduler tick or one offline batch run."""

    processed: list[PairOutcome] = field(default_factory=list)
    filtered_out: list[str] = field(default_factory=list)
    requeued: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)

    @property
    def accepted_count(self) -> int:
        return sum(len(p.accepted) for p in self.processed)

    @property
    def refined_count(self) -> int:
        """Accepted questions that needed at least one refinement."""
        return sum(
            1
            for p in self.processed
            for o in p.outcomes
            if o.status == "accepted" and o.attempts_used > 1
        )

    @property
    def discarded_count(self) -> int:
        return sum(
            1 for p in self.processed for o in p.outcomes if o.status == "discarded"
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "accepted": self.accepted_count,
            "refined": self.refined_count,
            "discarded": self.discarded_count,
            "filtered_out": list(self.filtered_out),
            "requeued": list(self.requeued),
            "failed": [{"pair_id": p, "error": e} for p, e in self.failed],
            "pairs_processed": len(self.processed),
        }


class Scheduler:
    def __init__(self, store: Store, generator: QuizGenerator):
        self.store = store
        self.generator = generator
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def tick(self, user_id: Optional[str] = None, now: Optional[datetime] = None) -> TickReport:
        """Process everything pending. Idempotent when nothing is pending."""
        report = TickReport()
        pairs = poll_new_pairs(self.store, user_id)
        for pair in pairs:
            self._process_pair(pair, report)
        return report

    def _process_pair(self, pair: PairRecord, report: TickReport) -> None:
        try:
            generation_input = generation_input_from_pair(
                self.store, pair, self.generator.samples
            )
            outcome = self.generator.process_pair(pair.id, generation_input)
        except QaAbortedError as exc:
            if isinstance(exc.cause, ProviderError):
                self.store.requeue_pairs([pair.id])
                report.requeued.append(pair.id)
            else:
                report.failed.append((pair.id, str(exc)))
            log.warning("pair %s aborted: %s", pair.id, exc)
            return
        except ProviderError as exc:
            self.store.requeue_pairs([pair.id])
            report.requeued.append(pair.id)
            log.warning("pair %s requeued after provider failure: %s", pair.id, exc)
            return
        except (ParseError, PartialBatchError) as exc:
            report.failed.append((pair.id, str(exc)))
            log.warning("pair %s failed permanently: %s", pair.id, exc)
            return

        if not outcome.language_related:
            report.filtered_out.append(pair.id)
            return

        # Logical time of the entries is the pair's creation time, so the
        # same input pairs produce the same pool bytes, live or offline.
        with self.store.transaction():
            pool = self.store.get_pool(pair.user_id)
            for question in outcome.accepted:
                if question.id in pool:
                    continue  # redelivered work, already committed
                self.store.upsert_pool_entry(
                    pair.user_id,
                    PoolEntry(question=question, created_at=pair.created_at),
                )
        report.processed.append(outcome)

    # ── background loop ──────────────────────────────────────────────

    def start(self, interval_s: float) -> None:
        if self._thread is not None:
            return

        def loop() -> None:
            while not self._stop.wait(interval_s):
                try:
                    self.tick()
                except Exception:
                    # Next tick retries; a crashed poller must not kill the app.
                    log.exception("scheduler tick failed")

        self._stop.clear()
        self._thread = threading.Thread(target=loop, name="workquiz-scheduler", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        if self._thread is None:
            return
        self._stop.set()
        self._thread.join(timeout=5)
        self._thread = None
