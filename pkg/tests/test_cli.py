"""Command line: import, offline generation, pool inspection, scoring."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from workquiz.cli import build_fixture_app, main
from workquiz.store import Store

from helpers import script_export_fixtures

DATA = Path(__file__).parent / "data"
EXPORT = DATA / "chat_export.jsonl"
LABELS = DATA / "expert_labels.jsonl"
DECISIONS = DATA / "pipeline_decisions.jsonl"


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


# ── import ───────────────────────────────────────────────────────────────


def test_import_enqueues_every_line(runner, tmp_path) -> None:
    store_path = tmp_path / "store.json"
    result = runner.invoke(
        main, ["import", str(EXPORT), "--store", str(store_path), "--json"]
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["ingested"] == 20
    assert report["skipped"] == []
    assert len(Store(store_path).pending_pairs("default")) == 20


def test_import_is_idempotent(runner, tmp_path) -> None:
    store_path = tmp_path / "store.json"
    runner.invoke(main, ["import", str(EXPORT), "--store", str(store_path)])
    second = runner.invoke(
        main, ["import", str(EXPORT), "--store", str(store_path), "--json"]
    )
    report = json.loads(second.output)
    assert report["ingested"] == 0
    assert report["duplicates"] == 20
    assert len(Store(store_path).pending_pairs("default")) == 20


def test_import_reports_bad_lines_with_numbers(runner, tmp_path) -> None:
    export = tmp_path / "export.jsonl"
    good = {
        "user_text": "what does accrue mean?",
        "assistant_text": '{"type": "dictionary", "headword": "accrue", "meanings": ["to accumulate"]}',
        "intent": "lookup",
        "timestamp": "2026-03-01T10:00:00+00:00",
    }
    missing = {k: v for k, v in good.items() if k != "assistant_text"}
    bad_intent = {**good, "user_text": "other", "intent": "poetry"}
    export.write_text(
        "\n".join([json.dumps(good), json.dumps(missing), json.dumps(bad_intent)]) + "\n"
    )
    store_path = tmp_path / "store.json"
    result = runner.invoke(
        main, ["import", str(export), "--store", str(store_path), "--json"]
    )
    assert result.exit_code == 1
    report = json.loads(result.output)
    assert report["ingested"] == 1
    lines = [item["line"] for item in report["skipped"]]
    assert lines == [2, 3]
    assert "assistant_text" in report["skipped"][0]["error"]


# ── generate ─────────────────────────────────────────────────────────────


def test_generate_runs_the_pipeline_offline(runner, tmp_path) -> None:
    store_path = tmp_path / "store.json"
    fixtures = tmp_path / "fixtures.jsonl"
    expected = script_export_fixtures(EXPORT, fixtures)

    runner.invoke(main, ["import", str(EXPORT), "--store", str(store_path)])
    audit = tmp_path / "audit.jsonl"
    result = runner.invoke(
        main,
        [
            "generate",
            "--store", str(store_path),
            "--fixtures", str(fixtures),
            "--audit", str(audit),
            "--json",
        ],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["pairs_processed"] == expected["pairs"]
    assert report["accepted"] == expected["accepted"]
    assert len(report["filtered_out"]) == expected["filtered"]
    assert report["failed"] == []

    pool = Store(store_path).get_pool("default")
    assert len(pool) == expected["accepted"]
    assert all(entry.exposures == 0 for entry in pool.values())

    trail_lines = [json.loads(l) for l in audit.read_text().splitlines()]
    assert len(trail_lines) == expected["pairs"]
    assert all(line["outcomes"] for line in trail_lines)


def test_generate_twice_adds_nothing(runner, tmp_path) -> None:
    store_path = tmp_path / "store.json"
    fixtures = tmp_path / "fixtures.jsonl"
    expected = script_export_fixtures(EXPORT, fixtures)
    runner.invoke(main, ["import", str(EXPORT), "--store", str(store_path)])
    runner.invoke(main, ["generate", "--store", str(store_path), "--fixtures", str(fixtures)])
    second = runner.invoke(
        main,
        ["generate", "--store", str(store_path), "--fixtures", str(fixtures), "--json"],
    )
    report = json.loads(second.output)
    assert report["pairs_processed"] == 0
    assert len(Store(store_path).get_pool("default")) == expected["accepted"]


# ── pool ─────────────────────────────────────────────────────────────────


def test_pool_export_is_byte_stable_across_runs(runner, tmp_path) -> None:
    fixtures = tmp_path / "fixtures.jsonl"
    script_export_fixtures(EXPORT, fixtures)

    exports = []
    for run in ("a", "b"):
        store_path = tmp_path / f"store-{run}.json"
        runner.invoke(main, ["import", str(EXPORT), "--store", str(store_path)])
        runner.invoke(
            main, ["generate", "--store", str(store_path), "--fixtures", str(fixtures)]
        )
        result = runner.invoke(main, ["pool", "--store", str(store_path), "--export"])
        assert result.exit_code == 0
        exports.append(result.output)
    assert exports[0] == exports[1]
    assert json.loads(exports[0])  # well-formed, non-empty


def test_pool_table_lists_entries(runner, tmp_path) -> None:
    store_path = tmp_path / "store.json"
    fixtures = tmp_path / "fixtures.jsonl"
    script_export_fixtures(EXPORT, fixtures)
    runner.invoke(main, ["import", str(EXPORT), "--store", str(store_path)])
    runner.invoke(main, ["generate", "--store", str(store_path), "--fixtures", str(fixtures)])

    result = runner.invoke(main, ["pool", "--store", str(store_path)])
    assert result.exit_code == 0
    assert "new" in result.output  # unexposed entries have no weight yet

    empty = runner.invoke(main, ["pool", "--store", str(tmp_path / "empty.json")])
    assert "pool is empty" in empty.output


# ── score ────────────────────────────────────────────────────────────────


def test_score_reproduces_the_coding_rules(runner) -> None:
    result = runner.invoke(
        main,
        ["score", "--labels", str(LABELS), "--decisions", str(DECISIONS), "--json"],
    )
    assert result.exit_code == 0, result.output
    scores = json.loads(result.output)
    # Ground truth: q1 {T,T}, q2 {F,T} (tie->F), q3 {F,F}.
    # Decisions:    q1 {T,T}, q2 {T,T},          q3 {F,F}.
    assert scores["answerability"]["confusion"] == {"tp": 1, "fp": 1, "fn": 0, "tn": 1}
    assert scores["answerability"]["precision"] == pytest.approx(0.5)
    assert scores["answerability"]["recall"] == pytest.approx(1.0)
    assert scores["proficiency"]["confusion"] == {"tp": 2, "fp": 0, "fn": 0, "tn": 1}
    assert scores["proficiency"]["f1"] == pytest.approx(1.0)


def test_score_table_output(runner) -> None:
    result = runner.invoke(
        main, ["score", "--labels", str(LABELS), "--decisions", str(DECISIONS)]
    )
    assert result.exit_code == 0
    assert "answerability" in result.output
    assert "proficiency" in result.output


def test_score_rejects_misaligned_ids(runner, tmp_path) -> None:
    decisions = tmp_path / "wrong.jsonl"
    decisions.write_text('{"question_id": "zz", "answerability": true, "proficiency": true}\n')
    result = runner.invoke(
        main, ["score", "--labels", str(LABELS), "--decisions", str(decisions)]
    )
    assert result.exit_code != 0
    assert "same questions" in result.output


# ── serve-fixtures ───────────────────────────────────────────────────────


def test_fixture_app_builds_and_serves_health(tmp_path) -> None:
    from fastapi.testclient import TestClient

    fixtures = tmp_path / "fixtures.jsonl"
    script_export_fixtures(EXPORT, fixtures)
    app = build_fixture_app(fixtures)
    client = TestClient(app)
    assert client.get("/healthz").json() == {"status": "ok"}
    # The default dev token is wired in when config has none.
    response = client.get("/threads", headers={"Authorization": "Bearer dev-token"})
    assert response.status_code == 200
