"""Deterministic mock provider driven by JSONL fixtures.

A fixture line is ``{"key": "<template>:<digest>", "response_text": "..."}``.
Repeated lines with the same key form a script consumed in order; the last
response stays sticky so replays of identical inputs remain deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from pathlib import Path
from typing import Iterable

from .provider import validate_request
from .templates import PromptRequest


class FixtureMissingError(KeyError):
    """No fixture registered for the requested key."""

    def __init__(self, key: str):
        self.key = key
        super().__init__(
            f"no mock fixture for key {key!r}; add it to the fixture set"
        )


class MockProvider:
    """Scripted provider. Keeps a call log so tests can count provider calls."""

    def __init__(self) -> None:
        self._queues: dict[str, deque[str]] = {}
        self.call_log: list[str] = []

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "MockProvider":
        provider = cls()
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                    provider.add(record["key"], record["response_text"])
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise ValueError(f"{path}:{line_no}: bad fixture line: {exc}") from None
        return provider

    def add(self, key: str, response_text: str) -> None:
        self._queues.setdefault(key, deque()).append(response_text)

    def add_many(self, records: Iterable[tuple[str, str]]) -> None:
        for key, text in records:
            self.add(key, text)

    def dump_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for key, queue in self._queues.items():
                for text in queue:
                    fh.write(json.dumps({"key": key, "response_text": text}) + "\n")

    def complete(self, request: PromptRequest) -> str:
        validate_request(request)
        self.call_log.append(request.fixture_key)
        queue = self._queues.get(request.fixture_key)
        if not queue:
            raise FixtureMissingError(request.fixture_key)
        if len(queue) > 1:
            return queue.popleft()
        return queue[0]

    def call_count(self, template: str | None = None) -> int:
        if template is None:
            return len(self.call_log)
        prefix = template + ":"
        return sum(1 for key in self.call_log if key.startswith(prefix))

    def reset_log(self) -> None:
        self.call_log.clear()
