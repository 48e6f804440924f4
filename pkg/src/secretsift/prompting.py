"""Zero/one/few-shot prompt rendering for binary and multiclass classification."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from secretsift.catalog import TaxonomyClass
from secretsift.errors import ExemplarMismatch, KOutOfRange, UnknownLabel

MAX_SHOTS = 8
DEFAULT_SHOTS = 3


class Label(enum.Enum):
    SECRET = "Secret"
    NON_SENSITIVE = "Non-sensitive"

    @property
    def slug(self) -> str:
        return "secret" if self is Label.SECRET else "non_sensitive"

    @classmethod
    def from_slug(cls, value: str) -> Label:
        for member in cls:
            if value in (member.slug, member.value):
                return member
        raise UnknownLabel(value)


class Mode(enum.Enum):
    BINARY = "binary"
    MULTICLASS = "multiclass"


@dataclass(frozen=True)
class Exemplar:
    candidate: str
    context: str
    binary_label: Label
    type_label: TaxonomyClass | None = None

    def __post_init__(self) -> None:
        if self.candidate not in self.context:
            raise ValueError("exemplar context must contain its candidate")

    def answer(self, mode: Mode) -> str:
        if mode is Mode.BINARY:
            return self.binary_label.value
        if self.type_label is None:
            raise ExemplarMismatch("multiclass prompts need exemplars with a type_label")
        return self.type_label.display_name


@dataclass(frozen=True)
class PromptRequest:
    mode: Mode
    shots: int
    candidate: str
    context: str
    exemplars: Sequence[Exemplar] = field(default_factory=tuple)
    # carried through to the Verdict; not rendered
    candidate_id: str = ""


_INSTRUCTION = (
    "You are reviewing source code for leaked credentials. A pattern matcher "
    "flagged the candidate string below. Use the surrounding code snippet to "
    "decide whether the candidate is a real secret (a key, token, password or "
    "other credential that grants access) or a non-sensitive string such as a "
    "placeholder, example value, test fixture or public identifier."
)
_INSTRUCTION_MULTICLASS = (
    "You are reviewing source code for leaked credentials. The candidate string "
    "below has been confirmed to be a secret. Use the surrounding code snippet to "
    "decide which kind of secret it is."
)
_ANSWER_BINARY = "Respond with exactly one of the following labels and nothing else:"
_ANSWER_MULTICLASS = "Respond with exactly one of the following category names and nothing else:"
QUERY_HEADER = "### Query"


def allowed_answers(mode: Mode) -> list[str]:
    if mode is Mode.BINARY:
        return [label.value for label in Label]
    return [t.display_name for t in TaxonomyClass]


def _render_item(candidate: str, context: str) -> list[str]:
    return [
        f"Candidate String: {candidate}",
        "Code Snippet:",
        "```",
        context,
        "```",
    ]


def build_prompt(req: PromptRequest) -> str:
    """Render ``req`` as a single prompt; equal requests give identical text."""
    if not 0 <= req.shots <= MAX_SHOTS:
        raise ExemplarMismatch(f"shots must be in [0, {MAX_SHOTS}], got {req.shots}")
    if len(req.exemplars) != req.shots:
        raise ExemplarMismatch(f"{len(req.exemplars)} exemplars given for shots={req.shots}")

    binary = req.mode is Mode.BINARY
    lines = [
        _INSTRUCTION if binary else _INSTRUCTION_MULTICLASS,
        "",
        _ANSWER_BINARY if binary else _ANSWER_MULTICLASS,
    ]
    lines += [f"- {a}" for a in allowed_answers(req.mode)]
    for i, ex in enumerate(req.exemplars, start=1):
        lines += ["", f"### Example {i}"]
        lines += _render_item(ex.candidate, ex.context)
        lines.append(f"Answer: {ex.answer(req.mode)}")
    lines += ["", QUERY_HEADER]
    lines += _render_item(req.candidate, req.context)
    lines.append("Answer:")
    return "\n".join(lines)


def _exemplar_from_obj(obj: dict[str, Any]) -> Exemplar:
    type_label = obj.get("type_label")
    return Exemplar(
        candidate=obj["candidate"],
        context=obj["context"],
        binary_label=Label.from_slug(obj["binary_label"]),
        type_label=TaxonomyClass.from_slug(type_label) if type_label else None,
    )


def load_exemplars(path: str | Path) -> list[Exemplar]:
    """Read an exemplar bank: ``{"exemplars": [{candidate, context, binary_label, type_label}]}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return [_exemplar_from_obj(o) for o in doc["exemplars"]]


def exemplar_bank() -> list[Exemplar]:
    text = resources.files("secretsift.data").joinpath("exemplars.json").read_text(encoding="utf-8")
    return [_exemplar_from_obj(o) for o in json.loads(text)["exemplars"]]


def default_exemplars(mode: Mode, k: int, bank: Sequence[Exemplar] | None = None) -> list[Exemplar]:
    """First ``k`` exemplars of the shipped bank usable in ``mode``.

    Multiclass prompts only draw typed secrets from the bank.
    """
    if not 1 <= k <= MAX_SHOTS:
        raise KOutOfRange(f"k must be in [1, {MAX_SHOTS}], got {k}")
    pool = list(bank if bank is not None else exemplar_bank())
    if mode is Mode.MULTICLASS:
        pool = [e for e in pool if e.type_label is not None]
    if len(pool) < k:
        raise KOutOfRange(f"exemplar bank has only {len(pool)} entries for {mode.value}")
    return pool[:k]


def make_request(
    mode: Mode,
    shots: int,
    candidate: str,
    context: str,
    candidate_id: str = "",
    bank: Sequence[Exemplar] | None = None,
) -> PromptRequest:
    exemplars = default_exemplars(mode, shots, bank) if shots else []
    return PromptRequest(mode, shots, candidate, context, tuple(exemplars), candidate_id)
