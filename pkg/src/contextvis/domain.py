"""Shared value types, their invariants, and canonical JSON forms.

All types here are immutable; mutation happens only through the store. Word
equality everywhere is case-insensitive via :func:`canonical_word_key`.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Optional

from .errors import EmptyWordList, SchemaViolation


def new_id() -> str:
    """Random 128-bit identifier as lowercase hex."""
    return secrets.token_hex(16)


def utcnow() -> datetime:
    """Current UTC time at second precision (the persisted resolution)."""
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).replace(microsecond=0).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(raw: str) -> datetime:
    return datetime.strptime(raw, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


@dataclass(frozen=True)
class Word:
    """A single target lemma; case-preserving, compared case-insensitively."""

    lemma: str

    def __post_init__(self):
        if not self.lemma or self.lemma != self.lemma.strip():
            raise SchemaViolation(f"word must be nonempty with no surrounding whitespace: {self.lemma!r}")
        if "\n" in self.lemma or "\r" in self.lemma:
            raise SchemaViolation("word must not contain newlines")

    @property
    def key(self) -> str:
        return canonical_word_key(self)


def canonical_word_key(word: Word) -> str:
    """Lowercased lemma; the single equality key used across the system."""
    return word.lemma.lower()


@dataclass(frozen=True)
class Theme:
    """Optional free-text contextual cue; empty text means no theme."""

    text: str = ""

    def __post_init__(self):
        if self.text != self.text.strip():
            raise SchemaViolation("theme must be trimmed")
        if "\n" in self.text or "\r" in self.text:
            raise SchemaViolation("theme must not contain newlines")

    @property
    def is_empty(self) -> bool:
        return self.text == ""


@dataclass(frozen=True)
class VocabularyUnit:
    id: str
    title: str
    grade_label: str
    words: tuple[Word, ...]

    def __post_init__(self):
        if not self.words:
            raise EmptyWordList("unit must contain at least one word")
        keys = [w.key for w in self.words]
        if len(set(keys)) != len(keys):
            raise SchemaViolation("unit words must be pairwise distinct (case-insensitive)")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "grade_label": self.grade_label,
            "words": [w.lemma for w in self.words],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "VocabularyUnit":
        return cls(
            id=d["id"],
            title=d["title"],
            grade_label=d["grade_label"],
            words=tuple(Word(w) for w in d["words"]),
        )


@dataclass(frozen=True)
class ScriptLine:
    word: Word
    sentence: str
    sticker_prompt: str

    def __post_init__(self):
        if not self.sentence:
            raise SchemaViolation("script line sentence must be nonempty")
        if not self.sticker_prompt:
            raise SchemaViolation("script line sticker prompt must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {"word": self.word.lemma, "sentence": self.sentence, "sticker_prompt": self.sticker_prompt}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScriptLine":
        return cls(word=Word(d["word"]), sentence=d["sentence"], sticker_prompt=d["sticker_prompt"])


@dataclass(frozen=True)
class StoryScript:
    theme: Theme
    lines: tuple[ScriptLine, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"theme": self.theme.text, "lines": [ln.to_dict() for ln in self.lines]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StoryScript":
        return cls(theme=Theme(d["theme"]), lines=tuple(ScriptLine.from_dict(ln) for ln in d["lines"]))


@dataclass(frozen=True)
class StickerAsset:
    id: str
    word: Word
    prompt: str
    seed: int
    image_ref: str
    provider_name: str
    created_at: datetime
    supersedes: Optional[str] = None
    material_set_id: Optional[str] = None

    def __post_init__(self):
        if not self.prompt:
            raise SchemaViolation("sticker prompt must be nonempty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "word": self.word.lemma,
            "prompt": self.prompt,
            "seed": self.seed,
            "image_ref": self.image_ref,
            "provider_name": self.provider_name,
            "created_at": format_ts(self.created_at),
            "supersedes": self.supersedes,
            "material_set_id": self.material_set_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "StickerAsset":
        return cls(
            id=d["id"],
            word=Word(d["word"]),
            prompt=d["prompt"],
            seed=d["seed"],
            image_ref=d["image_ref"],
            provider_name=d["provider_name"],
            created_at=parse_ts(d["created_at"]),
            supersedes=d.get("supersedes"),
            material_set_id=d.get("material_set_id"),
        )


class SetState(str, Enum):
    GENERATING = "Generating"
    READY = "Ready"
    FAILED = "Failed"


@dataclass(frozen=True)
class MaterialSet:
    """One (unit, theme) generation result; theme variants are sibling sets."""

    id: str
    unit_id: str
    theme: Theme
    state: SetState
    created_at: datetime
    seed: int
    script: Optional[StoryScript] = None
    stickers: dict[str, str] = field(default_factory=dict)  # word key -> current asset id

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "unit_id": self.unit_id,
            "theme": self.theme.text,
            "state": self.state.value,
            "created_at": format_ts(self.created_at),
            "seed": self.seed,
            "script": self.script.to_dict() if self.script else None,
            "stickers": dict(self.stickers),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MaterialSet":
        return cls(
            id=d["id"],
            unit_id=d["unit_id"],
            theme=Theme(d["theme"]),
            state=SetState(d["state"]),
            created_at=parse_ts(d["created_at"]),
            seed=d["seed"],
            script=StoryScript.from_dict(d["script"]) if d.get("script") else None,
            stickers=dict(d.get("stickers", {})),
        )


@dataclass(frozen=True)
class ExplorationChain:
    """An ordered word chain connecting two selected words under a theme."""

    id: str
    word_a: Word
    word_b: Word
    theme: Theme
    chain: tuple[Word, ...]
    added_prompts: dict[str, str]  # interior word key -> sticker prompt
    stickers: dict[str, str] = field(default_factory=dict)  # word key -> asset id

    def __post_init__(self):
        if len(self.chain) < 2:
            raise SchemaViolation("chain must contain at least the two endpoints")
        keys = [w.key for w in self.chain]
        if keys[0] != self.word_a.key or keys[-1] != self.word_b.key:
            raise SchemaViolation("chain must start at word_a and end at word_b")
        if len(set(keys)) != len(keys):
            raise SchemaViolation("chain words must be pairwise distinct")
        interior = set(keys[1:-1])
        if set(self.added_prompts) != interior:
            raise SchemaViolation("added_prompts keys must equal the interior words")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "word_a": self.word_a.lemma,
            "word_b": self.word_b.lemma,
            "theme": self.theme.text,
            "chain": [w.lemma for w in self.chain],
            "added_prompts": dict(self.added_prompts),
            "stickers": dict(self.stickers),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExplorationChain":
        return cls(
            id=d["id"],
            word_a=Word(d["word_a"]),
            word_b=Word(d["word_b"]),
            theme=Theme(d["theme"]),
            chain=tuple(Word(w) for w in d["chain"]),
            added_prompts=dict(d["added_prompts"]),
            stickers=dict(d.get("stickers", {})),
        )


class JobKind(str, Enum):
    SCRIPT = "Script"
    STICKER = "Sticker"
    EXPLORATION = "Exploration"


class JobState(str, Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"

    @property
    def terminal(self) -> bool:
        return self in (JobState.SUCCEEDED, JobState.FAILED)


_ALLOWED_TRANSITIONS = {
    JobState.PENDING: {JobState.PENDING, JobState.RUNNING, JobState.SUCCEEDED, JobState.FAILED},
    JobState.RUNNING: {JobState.RUNNING, JobState.SUCCEEDED, JobState.FAILED},
    JobState.SUCCEEDED: set(),
    JobState.FAILED: set(),
}


def check_transition(old: JobState, new: JobState) -> None:
    if new is not old and new not in _ALLOWED_TRANSITIONS[old]:
        raise SchemaViolation(f"illegal job transition {old.value} -> {new.value}")


@dataclass(frozen=True)
class GenerationJob:
    id: str
    kind: JobKind
    state: JobState
    attempts: int = 0
    error: Optional[str] = None
    result_ref: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "state": self.state.value,
            "attempts": self.attempts,
            "error": self.error,
            "result_ref": self.result_ref,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "GenerationJob":
        return cls(
            id=d["id"],
            kind=JobKind(d["kind"]),
            state=JobState(d["state"]),
            attempts=d.get("attempts", 0),
            error=d.get("error"),
            result_ref=d.get("result_ref"),
        )


@dataclass(frozen=True)
class HighlightSpan:
    """Byte range (UTF-8) of a surface form of a target word within a sentence."""

    line_index: int
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise SchemaViolation("highlight span must satisfy 0 <= start < end")
