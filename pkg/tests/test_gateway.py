"""Gateway: rendering determinism, lenient parsing, providers."""

from __future__ import annotations

import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from workquiz.domain import (
    DictionaryPayload,
    EvaluationResult,
    QueryIntent,
    QuestionDraft,
    TextPayload,
)
from workquiz.gateway import (
    Gateway,
    FixtureMissingError,
    HttpProvider,
    MockProvider,
    ParseError,
    PromptRequest,
    ProviderConfig,
    ProviderError,
    TemplateError,
    fixture_key,
    list_templates,
    parse_structured,
    render_template,
)
from workquiz.utils import canonical_json

from test_domain import payloads

# ── rendering ────────────────────────────────────────────────────────────


def test_render_is_deterministic() -> None:
    variables = {"text": "what does mitigate mean?"}
    first = render_template("intent_classifier", variables)
    second = render_template("intent_classifier", variables)
    assert first == second
    assert first.schema_tag == "intent_label"
    assert first.messages == ({"role": "user", "content": "what does mitigate mean?"},)
    assert "You are an Intention Classifier" in first.system_prompt


def test_render_substitutes_user_language() -> None:
    request = render_template(
        "response_generator",
        {
            "user_language": "Korean",
            "intent": "translation",
            "text": "please translate this",
            "history": [{"author": "user", "text": "earlier"}],
        },
    )
    assert "speak in polite and supportive Korean" in request.system_prompt
    assert "{user_language}" not in request.system_prompt
    assert request.messages[0] == {"role": "user", "content": "earlier"}
    assert request.messages[-1]["content"] == "[Intention: translation]\nplease translate this"


def test_render_errors() -> None:
    with pytest.raises(TemplateError, match="unknown template"):
        render_template("poem_writer", {})
    with pytest.raises(TemplateError, match="unbound"):
        render_template("intent_classifier", {})
    with pytest.raises(TemplateError, match="unexpected"):
        render_template("intent_classifier", {"text": "x", "mood": "happy"})
    with pytest.raises(TemplateError, match="JSON-serializable"):
        render_template("intent_classifier", {"text": object()})


def test_fixture_key_depends_on_all_variables() -> None:
    base = fixture_key("intent_classifier", {"text": "a"})
    assert base == fixture_key("intent_classifier", {"text": "a"})
    assert base != fixture_key("intent_classifier", {"text": "b"})
    assert base != fixture_key("language_filter", {"text": "a"})


def test_every_template_is_registered() -> None:
    assert list_templates() == [
        "context_extractor",
        "intent_classifier",
        "language_filter",
        "question_evaluator",
        "question_generator",
        "question_refiner",
        "response_generator",
    ]


# ── parsing ──────────────────────────────────────────────────────────────


def test_parse_intent_label_is_lenient_about_wrapping() -> None:
    assert parse_structured("  lookup\n", "intent_label") is QueryIntent.LOOKUP
    assert parse_structured('"translation"', "intent_label") is QueryIntent.TRANSLATION
    assert parse_structured("Proofread.", "intent_label") is QueryIntent.PROOFREAD


def test_parse_intent_label_never_guesses() -> None:
    with pytest.raises(ParseError) as err:
        parse_structured("maybe-translation", "intent_label")
    assert "maybe-translation" in str(err.value)


def test_parse_payload_with_fences_and_prose() -> None:
    raw = 'Here you go:\n```json\n{"type": "dictionary", "headword": "airway", "meanings": ["passage"]}\n```\nHope that helps!'
    payload = parse_structured(raw, "response_payload")
    assert payload == DictionaryPayload(headword="airway", meanings=("passage",))


def test_parse_payload_infers_variant_from_fields() -> None:
    raw = '{"original": "hi", "refined": "Hello", "rationale": "formality"}'
    payload = parse_structured(raw, "response_payload")
    assert payload.kind == "refinement"


def test_parse_payload_plain_prose_is_text() -> None:
    payload = parse_structured("Just a normal answer.", "response_payload")
    assert payload == TextPayload(body="Just a normal answer.")


def test_parse_payload_errors_keep_the_span() -> None:
    with pytest.raises(ParseError) as err:
        parse_structured('{"type": "dictionary", "headword": ""}', "response_payload")
    assert "headword" in err.value.span or "dictionary" in err.value.span
    with pytest.raises(ParseError):
        parse_structured("", "response_payload")


def test_parse_question_batch_accepts_array_and_single_object() -> None:
    item = {
        "stem": "Fill the ____ here.",
        "key": "blank",
        "distractors": ["space", "gap"],
        "explanation": "terminology",
        "rationale": "basic",
    }
    batch = parse_structured(canonical_json([item, item]), "question_batch")
    assert len(batch) == 2 and all(isinstance(d, QuestionDraft) for d in batch)
    single = parse_structured(canonical_json(item), "question_batch")
    assert len(single) == 1
    with pytest.raises(ParseError, match="missing field"):
        parse_structured('[{"stem": "x"}]', "question_batch")
    with pytest.raises(ParseError):
        parse_structured("no json at all", "question_batch")


def test_parse_evaluation_requires_real_booleans() -> None:
    verdict = parse_structured(
        '{"answerability": true, "proficiency": false, "rationale": "too easy"}',
        "evaluation",
    )
    assert verdict == EvaluationResult(True, False, "too easy")
    with pytest.raises(ParseError):
        parse_structured('{"answerability": "yes", "proficiency": true}', "evaluation")
    with pytest.raises(ParseError, match="rationale"):
        parse_structured('{"answerability": false, "proficiency": true, "rationale": ""}', "evaluation")


def test_parse_context_extraction() -> None:
    ctx = parse_structured(
        '{"surrounding_text": "the patient\'s airway", "task_description": "writing an email"}',
        "context_extraction",
    )
    assert ctx.surrounding_text == "the patient's airway"
    assert ctx.source == "client_supplied"


@given(payloads)
@settings(max_examples=60)
def test_parse_is_a_partial_inverse_of_serialize(payload) -> None:
    assert parse_structured(canonical_json(payload.to_dict()), "response_payload") == payload


@given(st.booleans(), st.booleans())
def test_parse_evaluation_round_trip(answerability, proficiency) -> None:
    verdict = EvaluationResult(answerability, proficiency, rationale="needs work")
    assert parse_structured(canonical_json(verdict.to_dict()), "evaluation") == verdict


# ── mock provider ────────────────────────────────────────────────────────


def _request(key: str = "intent_classifier:abc") -> PromptRequest:
    return PromptRequest(
        template="intent_classifier",
        system_prompt="classify",
        messages=({"role": "user", "content": "hello"},),
        schema_tag="intent_label",
        fixture_key=key,
    )


def test_mock_provider_scripts_and_counts() -> None:
    mock = MockProvider()
    mock.add("intent_classifier:abc", "lookup")
    mock.add("intent_classifier:abc", "text")
    request = _request()
    assert mock.complete(request) == "lookup"
    assert mock.complete(request) == "text"
    # last response stays sticky
    assert mock.complete(request) == "text"
    assert mock.call_count() == 3
    assert mock.call_count("intent_classifier") == 3
    assert mock.call_count("question_generator") == 0


def test_mock_provider_missing_fixture() -> None:
    with pytest.raises(FixtureMissingError):
        MockProvider().complete(_request("intent_classifier:nope"))


def test_mock_provider_rejects_empty_messages() -> None:
    mock = MockProvider()
    mock.add("intent_classifier:abc", "lookup")
    empty = PromptRequest(
        template="intent_classifier",
        system_prompt="classify",
        messages=(),
        schema_tag="intent_label",
        fixture_key="intent_classifier:abc",
    )
    with pytest.raises(ValueError, match="non-empty"):
        mock.complete(empty)


def test_mock_provider_jsonl_round_trip(tmp_path) -> None:
    mock = MockProvider()
    mock.add("a:1", "first")
    mock.add("a:1", "second")
    mock.add("b:2", "other")
    path = tmp_path / "fixtures.jsonl"
    mock.dump_jsonl(path)
    loaded = MockProvider.from_jsonl(path)
    request = _request("a:1")
    assert loaded.complete(request) == "first"
    assert loaded.complete(request) == "second"
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"key": "x"}\n')
    with pytest.raises(ValueError, match="bad fixture line"):
        MockProvider.from_jsonl(bad)


# ── http provider ────────────────────────────────────────────────────────


def test_provider_config_from_env() -> None:
    env = {
        "WORKQUIZ_ENDPOINT": "http://localhost:9999/v1",
        "WORKQUIZ_MODEL": "test-model",
        "WORKQUIZ_API_KEY": "secret",
        "WORKQUIZ_TIMEOUT_S": "5",
    }
    config = ProviderConfig.from_env(env)
    assert config.endpoint.endswith("/v1")
    assert config.model_name == "test-model"
    assert config.timeout_s == 5.0
    with pytest.raises(ProviderError):
        ProviderConfig.from_env({})


def test_http_provider_retries_then_succeeds(monkeypatch) -> None:
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append(url)
        if len(calls) < 3:
            raise httpx.ConnectError("refused")
        return httpx.Response(
            200,
            json={"choices": [{"message": {"content": "lookup"}}]},
            request=httpx.Request("POST", url),
        )

    monkeypatch.setattr(httpx, "post", fake_post)
    provider = HttpProvider(
        ProviderConfig(endpoint="http://api.test", model_name="m", max_retries=2),
        backoff_s=0,
    )
    assert provider.complete(_request()) == "lookup"
    assert len(calls) == 3


def test_http_provider_gives_up_after_budget(monkeypatch) -> None:
    def fake_post(url, json=None, headers=None, timeout=None):
        raise httpx.ConnectError("refused")

    monkeypatch.setattr(httpx, "post", fake_post)
    provider = HttpProvider(
        ProviderConfig(endpoint="http://api.test", model_name="m", max_retries=1),
        backoff_s=0,
    )
    with pytest.raises(ProviderError, match="after 2 attempt"):
        provider.complete(_request())


def test_gateway_call_parses_by_schema_tag() -> None:
    mock = MockProvider()
    variables = {"text": "what does mitigate mean?"}
    mock.add(fixture_key("intent_classifier", variables), "lookup")
    value, raw = Gateway(mock).call("intent_classifier", variables)
    assert value is QueryIntent.LOOKUP
    assert raw == "lookup"
