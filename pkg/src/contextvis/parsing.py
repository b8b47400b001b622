"""Parsing and validation of provider output, plus highlight span matching.

Two record grammars are handled: ``Word:/Sentence:/Sticker Prompt:`` for
story scripts and ``Word:/Sticker Prompt:`` for exploration chains. Parsing
is tolerant to blank lines, ``...`` separator lines and label casing, strict
about the record shape itself. Field values may be bare or double-quoted;
hard line-wraps inside a quoted value are rejoined with a single space.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Sequence

from .domain import ExplorationChain, ScriptLine, StoryScript, Theme, Word
from .errors import (
    DuplicateWord,
    EndpointCollision,
    IdenticalWords,
    MalformedRecord,
    MissingWord,
    SentenceWordMismatch,
    UnrequestedWord,
)

_LABEL_RE = re.compile(r"^\s*(word|sentence|sticker\s+prompt)\s*:\s*(.*?)\s*$", re.IGNORECASE)
_SEPARATOR_RE = re.compile(r"^\s*(?:\.{3,}|…)\s*$")

_LETTER = r"[^\W\d_]"  # any unicode letter


@dataclass(frozen=True)
class ParsedRecord:
    word: str
    sticker_prompt: str
    sentence: Optional[str] = None
    source_span: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class Violation:
    code: str
    word: Optional[str] = None
    detail: str = ""


# ---------------------------------------------------------------------------
# Highlight matching
# ---------------------------------------------------------------------------

def surface_forms(lemma: str) -> list[str]:
    """The closed inflection list matched as surface forms of a lemma."""
    base = lemma.lower()
    forms = {base, base + "s", base + "es", base + "ed", base + "d", base + "ing"}
    if base.endswith("e") and len(base) > 1:
        stem = base[:-1]
        forms.add(stem + "ing")
        forms.add(stem + "ed")
    return sorted(forms, key=len, reverse=True)


@lru_cache(maxsize=4096)
def _word_pattern(base: str) -> re.Pattern[str]:
    alternation = "|".join(re.escape(f) for f in surface_forms(base))
    return re.compile(
        rf"(?<!{_LETTER})(?:{alternation})(?!{_LETTER})",
        re.IGNORECASE,
    )


def match_word_occurrences(word: Word, sentence: str) -> list[tuple[int, int]]:
    """Non-overlapping, left-to-right UTF-8 byte spans of surface forms of
    ``word`` in ``sentence``; longest form wins at each position."""
    pattern = _word_pattern(word.key)
    byte_at = [0]
    for ch in sentence:
        byte_at.append(byte_at[-1] + len(ch.encode("utf-8")))
    return [(byte_at[m.start()], byte_at[m.end()]) for m in pattern.finditer(sentence)]


# ---------------------------------------------------------------------------
# Record scanning
# ---------------------------------------------------------------------------

_CANON_LABEL = {"word": "word", "sentence": "sentence", "sticker prompt": "sticker_prompt"}


class _Field:
    __slots__ = ("label", "parts", "start", "end", "quoted", "closed", "pending")

    def __init__(self, label: str, first: str, start: int, end: int):
        self.label = label
        self.start = start
        self.end = end
        if first:
            self.parts = [first]
            self.pending = False
            self.quoted = first.startswith('"')
            self.closed = not self.quoted or (len(first) >= 2 and first.endswith('"'))
        else:
            self.parts = []
            self.pending = True
            self.quoted = False
            self.closed = False

    def extend(self, text: str, end: int) -> None:
        self.end = end
        if self.pending:
            self.parts = [text]
            self.pending = False
            self.quoted = text.startswith('"')
            self.closed = not self.quoted or (len(text) >= 2 and text.endswith('"'))
        else:
            self.parts.append(text)
            self.closed = text.endswith('"')

    def value(self) -> str:
        v = " ".join(self.parts).strip()
        if v.startswith('"') and v.endswith('"') and len(v) >= 2:
            v = v[1:-1]
        elif v.startswith('"'):
            v = v[1:]
        return v.strip()


def _scan_fields(raw: str) -> list[_Field]:
    fields: list[_Field] = []
    offset = 0
    current: Optional[_Field] = None
    for line in raw.split("\n"):
        line_bytes = len(line.encode("utf-8"))
        stripped = line.strip()
        inside_open_quote = current is not None and current.quoted and not current.closed
        label_match = None if inside_open_quote else _LABEL_RE.match(line)
        if label_match:
            if current is not None:
                fields.append(current)
            label = _CANON_LABEL[re.sub(r"\s+", " ", label_match.group(1).lower())]
            current = _Field(label, label_match.group(2), offset, offset + line_bytes)
        elif inside_open_quote and stripped:
            current.extend(stripped, offset + line_bytes)
        elif current is not None and current.pending and stripped and not _SEPARATOR_RE.match(line):
            current.extend(stripped, offset + line_bytes)
        elif not stripped or _SEPARATOR_RE.match(line):
            pass  # blank lines and "..." separators are tolerated between fields
        else:
            raise MalformedRecord((offset, offset + line_bytes), f"stray text outside any record: {stripped[:40]!r}")
        offset += line_bytes + 1
    if current is not None:
        fields.append(current)
    return fields


def _group_records(raw: str, require_sentence: bool) -> list[ParsedRecord]:
    records: list[ParsedRecord] = []
    pending: Optional[dict] = None

    def flush(group: dict) -> None:
        word = group.get("word", "")
        prompt = group.get("sticker_prompt", "")
        span = (group["start"], group["end"])
        if not word:
            raise MalformedRecord(span, "record has an empty word")
        if not prompt:
            raise MalformedRecord(span, f"record for {word!r} is missing its sticker prompt")
        if require_sentence and not group.get("sentence"):
            raise MalformedRecord(span, f"record for {word!r} is missing its sentence")
        records.append(ParsedRecord(word=word, sentence=group.get("sentence"), sticker_prompt=prompt, source_span=span))

    for f in _scan_fields(raw):
        if f.label == "word":
            if pending is not None:
                flush(pending)
            pending = {"word": f.value(), "start": f.start, "end": f.end}
        else:
            if pending is None:
                raise MalformedRecord((f.start, f.end), f"{f.label} field before any Word label")
            if f.label in pending:
                raise MalformedRecord((pending["start"], f.end), f"duplicate {f.label} field in one record")
            pending[f.label] = f.value()
            pending["end"] = f.end
    if pending is not None:
        flush(pending)
    return records


# ---------------------------------------------------------------------------
# Script output
# ---------------------------------------------------------------------------

def parse_script_output(raw: str, requested: Sequence[Word], theme: Theme = Theme("")) -> StoryScript:
    """Parse the script record grammar and reconcile against the request.

    Lines are reordered to request order; the returned script always passes
    :func:`validate_script` for the same request.
    """
    if not requested:
        raise MissingWord("<empty request>")
    by_key: dict[str, ParsedRecord] = {}
    requested_keys = {w.key: w for w in requested}
    for rec in _group_records(raw, require_sentence=True):
        key = rec.word.lower()
        if key not in requested_keys:
            raise UnrequestedWord(rec.word)
        if key in by_key:
            raise DuplicateWord(rec.word)
        by_key[key] = rec
    lines: list[ScriptLine] = []
    for word in requested:
        rec = by_key.get(word.key)
        if rec is None:
            raise MissingWord(word.lemma)
        assert rec.sentence is not None
        if not match_word_occurrences(word, rec.sentence):
            raise SentenceWordMismatch(word.lemma)
        lines.append(ScriptLine(word=word, sentence=rec.sentence, sticker_prompt=rec.sticker_prompt))
    return StoryScript(theme=theme, lines=tuple(lines))


def validate_script(script: StoryScript, requested: Sequence[Word]) -> list[Violation]:
    """All invariant violations of a script against its request (empty = ok)."""
    violations: list[Violation] = []
    req_keys = [w.key for w in requested]
    line_keys = [ln.word.key for ln in script.lines]
    seen: set[str] = set()
    for key in line_keys:
        if key in seen:
            violations.append(Violation("duplicate_word", key))
        seen.add(key)
    for key in req_keys:
        if key not in seen:
            violations.append(Violation("missing_word", key))
    req_set = set(req_keys)
    for key in seen:
        if key not in req_set:
            violations.append(Violation("unrequested_word", key))
    if seen == req_set and len(line_keys) == len(req_keys) and line_keys != req_keys:
        violations.append(Violation("order_mismatch", detail="line order differs from request order"))
    for ln in script.lines:
        if not match_word_occurrences(ln.word, ln.sentence):
            violations.append(Violation("sentence_word_mismatch", ln.word.key))
    return violations


def format_script_output(lines: Sequence[ScriptLine]) -> str:
    """Pretty-print script lines in the record grammar (parse round-trips)."""
    blocks = [
        f'Word: "{ln.word.lemma}"\nSentence: "{ln.sentence}"\nSticker Prompt: "{ln.sticker_prompt}"'
        for ln in lines
    ]
    return "\n".join(blocks) + "\n"


# ---------------------------------------------------------------------------
# Exploration output
# ---------------------------------------------------------------------------

def parse_exploration_output(
    raw: str,
    word_a: Word,
    word_b: Word,
    theme: Theme = Theme(""),
) -> ExplorationChain:
    """Parse interior chain records; empty output yields the direct chain.

    Records echoing an endpoint at the very start or end are dropped (their
    prompts are ignored; endpoint stickers come from the material set). An
    endpoint word strictly inside the chain is an error.
    """
    if word_a.key == word_b.key:
        raise IdenticalWords(word_a.lemma)
    records = _group_records(raw, require_sentence=False) if raw.strip() else []
    if records and records[0].word.lower() == word_a.key:
        records = records[1:]
    if records and records[-1].word.lower() == word_b.key:
        records = records[:-1]
    interior: list[Word] = []
    added_prompts: dict[str, str] = {}
    for rec in records:
        key = rec.word.lower()
        if key in (word_a.key, word_b.key):
            raise EndpointCollision(rec.word)
        if key in added_prompts:
            raise DuplicateWord(rec.word)
        interior.append(Word(rec.word))
        added_prompts[key] = rec.sticker_prompt
    return ExplorationChain(
        id="",
        word_a=word_a,
        word_b=word_b,
        theme=theme,
        chain=(word_a, *interior, word_b),
        added_prompts=added_prompts,
    )


def format_exploration_output(chain: ExplorationChain) -> str:
    """Pretty-print the interior records of a chain (parse round-trips)."""
    blocks = [
        f'Word: "{w.lemma}"\nSticker Prompt: "{chain.added_prompts[w.key]}"'
        for w in chain.chain[1:-1]
    ]
    return "\n".join(blocks) + ("\n" if blocks else "")


def with_identity(chain: ExplorationChain, chain_id: str, stickers: dict[str, str]) -> ExplorationChain:
    return replace(chain, id=chain_id, stickers=stickers)
