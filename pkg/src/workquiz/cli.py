"""Operator command line: import exports, run generation offline, inspect
pools, score against expert labels, serve the API on fixtures.

Import is idempotent: every id is derived from line content, so re-running
the same file enqueues nothing new. Offline generation over the same pairs
and fixtures produces byte-identical pool exports.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional

import click

from .config import AppConfig, ConfigError, build_provider, load_config
from .domain import ChatMessage, ChatThread, PairRecord, QueryIntent, TaskContext
from .evalharness import (
    EvalError,
    aggregate_majority,
    load_expert_labels,
    load_pipeline_decisions,
    score_pipeline,
)
from .gateway import Gateway, MockProvider, ParseError, parse_structured
from .pool import compute_weight, export_pool
from .quizgen import QuizGenerator
from .scheduler import Scheduler
from .store import NotFoundError, Store
from .utils import parse_iso, stable_hash, utcnow


@click.group()
def main() -> None:
    """Chat-to-quiz service tooling."""


# ── import ───────────────────────────────────────────────────────────────


def _import_line(store: Store, user_id: str, thread: ChatThread, row: dict[str, Any]) -> bool:
    """Ingest one export line; returns True when a new pair was enqueued."""
    for field_name in ("user_text", "assistant_text", "intent", "timestamp"):
        if field_name not in row:
            raise ValueError(f"missing field {field_name!r}")
    if not str(row["user_text"]).strip() or not str(row["assistant_text"]).strip():
        raise ValueError("user_text and assistant_text must be non-empty")
    intent = QueryIntent.parse(str(row["intent"]))
    timestamp = parse_iso(str(row["timestamp"]))
    context: Optional[TaskContext] = None
    if row.get("context") is not None:
        raw_context = row["context"]
        if not isinstance(raw_context, dict):
            raise ValueError("context must be an object")
        context = TaskContext.from_dict(raw_context)

    assistant_text = str(row["assistant_text"])
    payload = parse_structured(assistant_text, "response_payload")

    # Content-derived ids make the whole operation idempotent.
    base = [user_id, str(row["user_text"]), assistant_text, row["timestamp"]]
    user_message_id = "m-" + stable_hash(["import-user"] + base)
    assistant_message_id = "m-" + stable_hash(["import-assistant"] + base)
    pair_id = "p-" + stable_hash([user_message_id, assistant_message_id])

    with store.transaction():
        new = store.enqueue_pair(
            PairRecord(
                id=pair_id,
                user_id=user_id,
                thread_id=thread.id,
                user_message_id=user_message_id,
                assistant_message_id=assistant_message_id,
                created_at=timestamp,
            )
        )
        if not new:
            return False
        thread.messages.append(
            ChatMessage(
                id=user_message_id,
                thread_id=thread.id,
                author="user",
                text=str(row["user_text"]),
                created_at=timestamp,
                intent=intent,
                context=context,
            )
        )
        thread.messages.append(
            ChatMessage(
                id=assistant_message_id,
                thread_id=thread.id,
                author="assistant",
                text=assistant_text,
                created_at=timestamp,
                intent=intent,
                payload=payload,
            )
        )
        store.put_thread(thread)
    return True


@main.command("import")
@click.argument("export_file", type=click.Path(exists=True, path_type=Path))
@click.option("--store", "store_path", type=click.Path(path_type=Path), required=True)
@click.option("--user", "user_id", default="default", show_default=True)
@click.option("--json", "as_json", is_flag=True, help="machine-readable report")
def import_command(export_file: Path, store_path: Path, user_id: str, as_json: bool) -> None:
    """Ingest a JSONL chat export of {user_text, assistant_text, intent,
    context?, timestamp} lines, enqueueing one pair per line."""
    store = Store(store_path)
    thread = _import_thread(store, user_id)

    ingested = 0
    duplicates = 0
    skipped: list[dict[str, Any]] = []
    for line_number, line in enumerate(export_file.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            if not isinstance(row, dict):
                raise ValueError("line is not a JSON object")
            if _import_line(store, user_id, thread, row):
                ingested += 1
            else:
                duplicates += 1
        except (ValueError, ParseError) as exc:
            skipped.append({"line": line_number, "error": str(exc)})

    report = {
        "ingested": ingested,
        "duplicates": duplicates,
        "skipped": skipped,
    }
    if as_json:
        click.echo(json.dumps(report, indent=2))
    else:
        click.echo(f"ingested {ingested} pair(s), {duplicates} duplicate(s) skipped")
        for item in skipped:
            click.echo(f"  line {item['line']}: {item['error']}", err=True)
        if skipped:
            click.echo(f"{len(skipped)} line(s) rejected", err=True)
    if skipped:
        sys.exit(1)


def _import_thread(store: Store, user_id: str) -> ChatThread:
    thread_id = f"t-import-{user_id}"
    try:
        return store.get_thread(thread_id)
    except NotFoundError:
        thread = ChatThread(
            id=thread_id,
            user_id=user_id,
            created_at=datetime.fromtimestamp(0, tz=timezone.utc),
            title="imported exchanges",
            messages=[],
        )
        store.put_thread(thread)
        return thread


# ── generate ─────────────────────────────────────────────────────────────


@main.command("generate")
@click.option("--store", "store_path", type=click.Path(path_type=Path), required=True)
@click.option("--user", "user_id", default="default", show_default=True)
@click.option("--fixtures", type=click.Path(exists=True, path_type=Path), default=None,
              help="mock provider fixtures; omit to use the live provider")
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--audit", "audit_path", type=click.Path(path_type=Path), default=None,
              help="write QA audit trails as JSONL")
@click.option("--json", "as_json", is_flag=True)
def generate_command(
    store_path: Path,
    user_id: str,
    fixtures: Optional[Path],
    config_path: Optional[Path],
    audit_path: Optional[Path],
    as_json: bool,
) -> None:
    """Run the generation pipeline over every queued pair, once."""
    try:
        config = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    store = Store(store_path)
    provider = MockProvider.from_jsonl(fixtures) if fixtures else build_provider(config)
    generator = QuizGenerator(Gateway(provider), policy=config.policy)
    scheduler = Scheduler(store, generator)

    report = scheduler.tick(user_id)

    if audit_path is not None:
        with open(audit_path, "w") as handle:
            for pair_outcome in report.processed:
                handle.write(json.dumps(pair_outcome.to_dict(), sort_keys=True) + "\n")

    data = report.to_dict()
    if as_json:
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo("generation report")
        for label in ("pairs_processed", "accepted", "refined", "discarded"):
            click.echo(f"  {label:18} {data[label]}")
        click.echo(f"  {'filtered_out':18} {len(data['filtered_out'])}")
        click.echo(f"  {'failed':18} {len(data['failed'])}")
        for failure in data["failed"]:
            click.echo(f"    {failure['pair_id']}: {failure['error']}", err=True)
        if data["requeued"]:
            # The resume cursor: these pairs stay queued for the next run.
            click.echo(f"  requeued for retry: {', '.join(data['requeued'])}")


# ── pool ─────────────────────────────────────────────────────────────────


@main.command("pool")
@click.option("--store", "store_path", type=click.Path(path_type=Path), required=True)
@click.option("--user", "user_id", default="default", show_default=True)
@click.option("--export", "as_export", is_flag=True,
              help="print the canonical JSON export and nothing else")
def pool_command(store_path: Path, user_id: str, as_export: bool) -> None:
    """Inspect a user's question pool."""
    store = Store(store_path)
    if as_export:
        # Canonical bytes: suitable for diffing two runs.
        click.echo(export_pool(store, user_id))
        return
    entries = store.get_pool(user_id)
    if not entries:
        click.echo("pool is empty")
        return
    now = utcnow()
    click.echo(f"{'id':26} {'exp':>3} {'att':>3} {'wrg':>3} {'weight':>7}  stem")
    for question_id in sorted(entries):
        entry = entries[question_id]
        weight = f"{compute_weight(entry, now):.3f}" if entry.exposures >= 1 else "new"
        stem = entry.question.stem
        if len(stem) > 48:
            stem = stem[:45] + "..."
        click.echo(
            f"{question_id:26} {entry.exposures:>3} {entry.attempts:>3} "
            f"{entry.wrong_attempts:>3} {weight:>7}  {stem}"
        )


# ── score ────────────────────────────────────────────────────────────────


@main.command("score")
@click.option("--labels", type=click.Path(exists=True, path_type=Path), required=True,
              help="expert labels, JSONL or CSV")
@click.option("--decisions", type=click.Path(exists=True, path_type=Path), required=True,
              help="pipeline decisions, JSONL")
@click.option("--json", "as_json", is_flag=True)
def score_command(labels: Path, decisions: Path, as_json: bool) -> None:
    """Score pipeline decisions against majority-voted expert labels."""
    try:
        truth = aggregate_majority(load_expert_labels(labels))
        scores = score_pipeline(load_pipeline_decisions(decisions), truth)
    except EvalError as exc:
        raise click.ClickException(str(exc))

    if as_json:
        click.echo(json.dumps({k: v.to_dict() for k, v in scores.items()}, indent=2))
        return
    click.echo(f"{'criterion':14} {'prec':>6} {'rec':>6} {'f1':>6}   tp fp fn tn")
    for criterion, score in scores.items():
        def fmt(value: Optional[float]) -> str:
            return f"{value:.3f}" if value is not None else "n/a"
        click.echo(
            f"{criterion:14} {fmt(score.precision):>6} {fmt(score.recall):>6} "
            f"{fmt(score.f1):>6}   {score.tp:>2} {score.fp:>2} {score.fn:>2} {score.tn:>2}"
        )


# ── serve-fixtures ───────────────────────────────────────────────────────


@main.command("serve-fixtures")
@click.option("--fixtures", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8070, show_default=True, type=int)
def serve_fixtures_command(
    fixtures: Path,
    config_path: Optional[Path],
    store_path: Optional[Path],
    host: str,
    port: int,
) -> None:
    """Serve the REST API backed by fixture responses, for UI development."""
    app = build_fixture_app(fixtures, config_path, store_path)
    try:
        import uvicorn
    except ImportError:
        raise click.ClickException("serve-fixtures needs uvicorn (pip install uvicorn)")
    uvicorn.run(app, host=host, port=port)


def build_fixture_app(
    fixtures: Path,
    config_path: Optional[Path] = None,
    store_path: Optional[Path] = None,
):
    from .api import create_app

    try:
        config = load_config(config_path)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    if store_path is not None:
        config_dict = {**config.__dict__, "storage_path": str(store_path)}
        config = AppConfig(**config_dict)
    if not config.tokens:
        config = AppConfig(**{**config.__dict__, "tokens": {"dev-token": "default"}})
    provider = MockProvider.from_jsonl(fixtures)
    return create_app(config, provider=provider)
