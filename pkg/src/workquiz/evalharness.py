"""Expert-label evaluation harness.

Raters grade each question on a three-part rubric with fixed categorical
options. The harness maps those categories onto the pipeline's two binary
criteria, aggregates raters by majority vote, and scores the pipeline's
decisions with precision/recall/F1 per criterion.

Coding rules:
  - answerability is true only for the single top option ("correct answer,
    marked correct");
  - proficiency is the conjunction of fully-unique options and no
    obviously-wrong options;
  - "Don't know" codes to false for its criterion;
  - rater ties code to false (conservative).
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence, Union


class EvalError(ValueError):
    pass


DONT_KNOW = "Don't know"

ANSWERABILITY_OPTIONS = (
    "Yes, there is a correct answer and it is marked 'correct'",
    "There is a correct answer but it is not marked 'correct'",
    "There are multiple correct answers",
    "No, there is no correct answer",
    DONT_KNOW,
)

UNIQUE_OPTIONS = (
    "Yes, they are completely unique",
    "Some choices are unique, some are too similar",
    "No, they are all too similar",
    DONT_KNOW,
)

NO_OBVIOUSLY_WRONG_OPTIONS = (
    "Yes, there are no obviously-wrong options",
    "Yes, but the options give away the correct answer",
    "No, there are obviously-wrong options",
    DONT_KNOW,
)

_ANSWERABILITY_TRUE = ANSWERABILITY_OPTIONS[0]
_UNIQUE_TRUE = UNIQUE_OPTIONS[0]
_NO_OBVIOUSLY_WRONG_TRUE = NO_OBVIOUSLY_WRONG_OPTIONS[0]


def _normalize_choice(choice: str) -> str:
    # Typographic quotes show up in pasted rubric text; fold them.
    return " ".join(choice.replace("’", "'").replace("‘", "'").split())


def _check_choice(choice: str, options: Sequence[str], field_name: str) -> str:
    normalized = _normalize_choice(choice)
    if normalized not in options:
        raise EvalError(
            f"{field_name} value {choice!r} is not one of the rubric options"
        )
    return normalized


@dataclass(frozen=True)
class ExpertLabelRecord:
    """One rater's grading of one question."""

    question_id: str
    rater_id: str
    answerability_choice: str
    unique_choices: str
    no_obviously_wrong: str

    def __post_init__(self) -> None:
        if not self.question_id or not self.rater_id:
            raise EvalError("question_id and rater_id must be non-empty")
        object.__setattr__(
            self,
            "answerability_choice",
            _check_choice(self.answerability_choice, ANSWERABILITY_OPTIONS, "answerability_choice"),
        )
        object.__setattr__(
            self,
            "unique_choices",
            _check_choice(self.unique_choices, UNIQUE_OPTIONS, "unique_choices"),
        )
        object.__setattr__(
            self,
            "no_obviously_wrong",
            _check_choice(self.no_obviously_wrong, NO_OBVIOUSLY_WRONG_OPTIONS, "no_obviously_wrong"),
        )

    def to_dict(self) -> dict[str, str]:
        return {
            "question_id": self.question_id,
            "rater_id": self.rater_id,
            "answerability_choice": self.answerability_choice,
            "unique_choices": self.unique_choices,
            "no_obviously_wrong": self.no_obviously_wrong,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExpertLabelRecord":
        try:
            return cls(
                question_id=data["question_id"],
                rater_id=data["rater_id"],
                answerability_choice=data["answerability_choice"],
                unique_choices=data["unique_choices"],
                no_obviously_wrong=data["no_obviously_wrong"],
            )
        except KeyError as exc:
            raise EvalError(f"label record missing field {exc.args[0]!r}") from None


def map_rubric_to_binary(record: ExpertLabelRecord) -> dict[str, bool]:
    """Collapse the categorical grading onto the two pipeline criteria."""
    return {
        "answerability": record.answerability_choice == _ANSWERABILITY_TRUE,
        "proficiency": (
            record.unique_choices == _UNIQUE_TRUE
            and record.no_obviously_wrong == _NO_OBVIOUSLY_WRONG_TRUE
        ),
    }


def aggregate_majority(
    records: Iterable[ExpertLabelRecord],
) -> dict[str, dict[str, bool]]:
    """Per-question majority over the mapped booleans; ties resolve false."""
    by_question: dict[str, list[dict[str, bool]]] = defaultdict(list)
    for record in records:
        by_question[record.question_id].append(map_rubric_to_binary(record))
    truth: dict[str, dict[str, bool]] = {}
    for question_id, votes in by_question.items():
        truth[question_id] = {
            criterion: sum(v[criterion] for v in votes) * 2 > len(votes)
            for criterion in ("answerability", "proficiency")
        }
    return truth


@dataclass(frozen=True)
class CriterionScore:
    tp: int
    fp: int
    fn: int
    tn: int
    # None means not applicable: the denominator class is empty.
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def score_from_confusion(tp: int, fp: int, fn: int, tn: int = 0) -> CriterionScore:
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return CriterionScore(tp, fp, fn, tn, precision, recall, f1)


def score_pipeline(
    pipeline_decisions: Mapping[str, Mapping[str, bool]],
    ground_truth: Mapping[str, Mapping[str, bool]],
) -> dict[str, CriterionScore]:
    """Score the pipeline against the expert ground truth, per criterion.

    Both inputs map question_id -> {answerability, proficiency}. The id sets
    must match exactly; anything else means misaligned data and is an error,
    not a silent intersection.
    """
    missing = set(ground_truth) - set(pipeline_decisions)
    extra = set(pipeline_decisions) - set(ground_truth)
    if missing or extra:
        raise EvalError(
            "pipeline decisions and ground truth do not cover the same "
            f"questions (missing: {sorted(missing)}, extra: {sorted(extra)})"
        )
    scores: dict[str, CriterionScore] = {}
    for criterion in ("answerability", "proficiency"):
        tp = fp = fn = tn = 0
        for question_id, truth in ground_truth.items():
            predicted = bool(pipeline_decisions[question_id][criterion])
            actual = bool(truth[criterion])
            if predicted and actual:
                tp += 1
            elif predicted and not actual:
                fp += 1
            elif not predicted and actual:
                fn += 1
            else:
                tn += 1
        scores[criterion] = score_from_confusion(tp, fp, fn, tn)
    return scores


# ── file loading ─────────────────────────────────────────────────────────

_LABEL_FIELDS = (
    "question_id",
    "rater_id",
    "answerability_choice",
    "unique_choices",
    "no_obviously_wrong",
)


def load_expert_labels(path: Union[str, Path]) -> list[ExpertLabelRecord]:
    """Read labels from JSONL or CSV, chosen by extension."""
    path = Path(path)
    records: list[ExpertLabelRecord] = []
    if path.suffix.lower() == ".csv":
        with path.open(newline="") as handle:
            reader = csv.DictReader(handle)
            for line_number, row in enumerate(reader, start=2):
                try:
                    records.append(ExpertLabelRecord.from_dict(row))
                except EvalError as exc:
                    raise EvalError(f"{path}:{line_number}: {exc}") from None
    else:
        for line_number, line in enumerate(path.read_text().splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(ExpertLabelRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise EvalError(f"{path}:{line_number}: not valid JSON: {exc}") from None
            except EvalError as exc:
                raise EvalError(f"{path}:{line_number}: {exc}") from None
    return records


def load_pipeline_decisions(path: Union[str, Path]) -> dict[str, dict[str, bool]]:
    """JSONL of {question_id, answerability, proficiency}."""
    decisions: dict[str, dict[str, bool]] = {}
    for line_number, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            question_id = row["question_id"]
            decisions[question_id] = {
                "answerability": bool(row["answerability"]),
                "proficiency": bool(row["proficiency"]),
            }
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise EvalError(f"{path}:{line_number}: bad decision line: {exc}") from None
    return decisions
