"""Survey taxonomy: pillars, response types, and the question registry.

The registry is the single place that says what each survey question is:
which pillar it feeds, how respondents answered it (single choice,
multiple choice, capped multiple choice, or a write-down answer recoded
into ordered bins), which option labels carry which normative score on
the 0..10 axis, and which labels mean "no usable answer".

Registries are plain JSON files so a deployment can swap its own scoring
choices in without touching code.  The bundled fixture registry is
synthetic; nothing in this package hardcodes real experts' scores.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ConfigError


class Pillar(Enum):
    """The four thematic groups that indicator scores aggregate into."""

    GOV = "Governance"
    ENE = "Energy & Circular Economy"
    BIO = "Biodiversity"
    CLI = "Climate Strategy"

    @property
    def code(self) -> str:
        return self.name

    @property
    def display(self) -> str:
        return self.value


PILLAR_ORDER: tuple[Pillar, ...] = (Pillar.GOV, Pillar.ENE, Pillar.BIO, Pillar.CLI)

# Group labels used by thresholds, reports, and the flagging axis.  The
# composite score gets its own label alongside the four pillars.
COMPOSITE_GROUP = "ESG"
GROUP_ORDER: tuple[str, ...] = tuple(p.code for p in PILLAR_ORDER) + (COMPOSITE_GROUP,)


class ResponseType(Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"
    MAX_MULTIPLE = "max_multiple"
    WRITE_DOWN_BINNED = "write_down_binned"


def dx5_option_scores(
    midpoints: list[float], labels: list[str] | None = None
) -> dict[str, float]:
    """Recode write-down bins into 0..10 scores from their midpoints.

    Each bin's score is a min-max projection of its midpoint onto the
    score axis: s = 10 * (m - min) / (max - min).  Midpoints must be
    strictly increasing so the bins describe an ordered quantity.

    Args:
        midpoints: at least two strictly increasing finite numbers.
        labels: optional bin labels, same length; defaults to the
            midpoints rendered as text.

    Returns:
        Mapping of bin label to score, in bin order.
    """
    if len(midpoints) < 2:
        raise ConfigError("binned recoding needs at least two midpoints")
    for m in midpoints:
        if not math.isfinite(m):
            raise ConfigError(f"bin midpoint is not finite: {m!r}")
    for lo, hi in zip(midpoints, midpoints[1:]):
        if not lo < hi:
            raise ConfigError(
                f"bin midpoints must be strictly increasing, got {lo!r} >= {hi!r}"
            )
    if labels is None:
        labels = [format(m, "g") for m in midpoints]
    if len(labels) != len(midpoints):
        raise ConfigError(
            f"{len(labels)} bin labels for {len(midpoints)} midpoints"
        )
    mn = midpoints[0]
    mx = midpoints[-1]
    return {
        label: 10.0 * (m - mn) / (mx - mn) for label, m in zip(labels, midpoints)
    }


@dataclass(frozen=True)
class QuestionSpec:
    """Everything the scorer needs to know about one survey question.

    option_scores preserves the registry's option order; that order is
    the canonical iteration order for the weighted-mean scoring step.
    The optional per-question weight feeds the pillar aggregation and
    defaults to 1, which reduces the pillar score to a plain mean.
    """

    question_id: str
    rtype: ResponseType
    pillar: Pillar
    option_scores: dict[str, float]
    na_labels: tuple[str, ...] = ()
    weight: float = 1.0
    max_choices: int | None = None

    def __post_init__(self) -> None:
        if not self.question_id:
            raise ConfigError("question id must be a non-empty string")
        if not self.option_scores:
            raise ConfigError(
                f"question '{self.question_id}' defines no scoreable options"
            )
        for label, score in self.option_scores.items():
            if not label:
                raise ConfigError(
                    f"question '{self.question_id}' has an empty option label"
                )
            if not math.isfinite(score) or not 0.0 <= score <= 10.0:
                raise ConfigError(
                    f"question '{self.question_id}' option {label!r}: "
                    f"score {score!r} outside [0, 10]"
                )
        overlap = set(self.na_labels) & set(self.option_scores)
        if overlap:
            raise ConfigError(
                f"question '{self.question_id}': labels {sorted(overlap)} are "
                "both scored options and na labels"
            )
        if not math.isfinite(self.weight) or self.weight <= 0:
            raise ConfigError(
                f"question '{self.question_id}': weight must be positive, "
                f"got {self.weight!r}"
            )
        if self.rtype is ResponseType.MAX_MULTIPLE:
            if self.max_choices is None or self.max_choices < 1:
                raise ConfigError(
                    f"question '{self.question_id}': max_multiple needs a "
                    "positive max_choices"
                )
        elif self.max_choices is not None:
            raise ConfigError(
                f"question '{self.question_id}': max_choices only applies to "
                "max_multiple questions"
            )


@dataclass
class QuestionRegistry:
    """Ordered collection of question specs, keyed by question id."""

    questions: dict[str, QuestionSpec] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for qid, spec in self.questions.items():
            if qid != spec.question_id:
                raise ConfigError(
                    f"registry key {qid!r} does not match spec id "
                    f"{spec.question_id!r}"
                )

    def __contains__(self, question_id: str) -> bool:
        return question_id in self.questions

    def __len__(self) -> int:
        return len(self.questions)

    def spec(self, question_id: str) -> QuestionSpec:
        try:
            return self.questions[question_id]
        except KeyError:
            raise ConfigError(f"unclassified question '{question_id}'") from None

    def response_type(self, question_id: str) -> ResponseType:
        return self.spec(question_id).rtype

    def pillar_of(self, question_id: str) -> Pillar:
        try:
            return self.questions[question_id].pillar
        except KeyError:
            raise ConfigError(
                f"no pillar assignment for question '{question_id}'"
            ) from None

    def questions_for(self, pillar: Pillar) -> list[QuestionSpec]:
        """Specs feeding one pillar, in registry order."""
        return [s for s in self.questions.values() if s.pillar is pillar]


def registry_from_dict(payload: dict) -> QuestionRegistry:
    if not isinstance(payload, dict) or "questions" not in payload:
        raise ConfigError("registry must be an object with a 'questions' list")
    entries = payload["questions"]
    if not isinstance(entries, list) or not entries:
        raise ConfigError("registry 'questions' must be a non-empty list")

    questions: dict[str, QuestionSpec] = {}
    for entry in entries:
        if not isinstance(entry, dict):
            raise ConfigError("each registry entry must be an object")
        qid = entry.get("id")
        if not isinstance(qid, str) or not qid:
            raise ConfigError(f"registry entry with missing or empty id: {entry!r}")
        if qid in questions:
            raise ConfigError(f"duplicate question id '{qid}' in registry")

        type_text = entry.get("type")
        try:
            rtype = ResponseType(type_text)
        except ValueError:
            raise ConfigError(
                f"question '{qid}': unknown response type {type_text!r}"
            ) from None

        pillar_text = entry.get("pillar")
        try:
            pillar = Pillar[pillar_text] if isinstance(pillar_text, str) else None
        except KeyError:
            pillar = None
        if pillar is None:
            raise ConfigError(f"question '{qid}': unknown pillar {pillar_text!r}")

        na_labels = tuple(entry.get("na", []))
        weight = float(entry.get("weight", 1.0))
        max_choices = entry.get("max_choices")

        if rtype is ResponseType.WRITE_DOWN_BINNED:
            bins = entry.get("bins")
            if not isinstance(bins, list) or not bins:
                raise ConfigError(f"question '{qid}': binned type needs 'bins'")
            labels = []
            midpoints = []
            for b in bins:
                if not isinstance(b, dict) or "label" not in b or "midpoint" not in b:
                    raise ConfigError(
                        f"question '{qid}': each bin needs 'label' and 'midpoint'"
                    )
                labels.append(str(b["label"]))
                midpoints.append(float(b["midpoint"]))
            option_scores = dx5_option_scores(midpoints, labels)
        else:
            options = entry.get("options")
            if not isinstance(options, dict) or not options:
                raise ConfigError(f"question '{qid}': needs an 'options' mapping")
            option_scores = {str(k): float(v) for k, v in options.items()}

        questions[qid] = QuestionSpec(
            question_id=qid,
            rtype=rtype,
            pillar=pillar,
            option_scores=option_scores,
            na_labels=na_labels,
            weight=weight,
            max_choices=max_choices,
        )

    return QuestionRegistry(questions=questions)


def load_registry(path: str | Path) -> QuestionRegistry:
    """Load and validate a question registry from a JSON file."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"registry file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"registry file {path} is not valid JSON: {exc}") from None
    return registry_from_dict(payload)
