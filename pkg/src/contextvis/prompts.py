"""Renders provider-ready prompt text from versioned template resources.

Templates live as plain UTF-8 files with ``{{theme_clause}}``, ``{{theme}}``,
``{{words}}``, ``{{word_a}}`` and ``{{word_b}}`` placeholders so deployments
can adjust wording without code changes. The shipped defaults are bundled as
package resources.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .domain import Theme, Word, canonical_word_key
from .errors import BadConfig, EmptyWordList, IdenticalWords

_PLACEHOLDER_RE = re.compile(r"\{\{[a-z_]+\}\}")

_TEMPLATE_FILES = (
    "script.txt",
    "script_theme_clause.txt",
    "exploration.txt",
    "exploration_theme_clause.txt",
)


class PromptKind(str, Enum):
    SCRIPT = "Script"
    EXPLORATION = "Exploration"


@dataclass(frozen=True)
class PromptText:
    text: str
    kind: PromptKind

    def __post_init__(self):
        if not self.text:
            raise BadConfig("rendered prompt must be nonempty")
        leftover = _PLACEHOLDER_RE.search(self.text)
        if leftover:
            raise BadConfig(f"unsubstituted placeholder in prompt: {leftover.group()}")


def _load(template_dir: Optional[Path], name: str) -> str:
    if template_dir is not None:
        path = Path(template_dir) / name
        if not path.is_file():
            raise BadConfig(f"template file missing: {path}")
        return path.read_text(encoding="utf-8").rstrip("\n")
    return (resources.files("contextvis") / "templates" / name).read_text(encoding="utf-8").rstrip("\n")


class PromptEngine:
    """Pure, deterministic placeholder substitution over loaded templates."""

    def __init__(self, template_dir: Optional[Path] = None):
        self._script, self._script_clause, self._exploration, self._exploration_clause = (
            _load(template_dir, name) for name in _TEMPLATE_FILES
        )

    def render_script_prompt(self, words: Sequence[Word], theme: Theme) -> PromptText:
        if not words:
            raise EmptyWordList("script prompt requires at least one word")
        keys = [w.key for w in words]
        if len(set(keys)) != len(keys):
            raise EmptyWordList("script prompt words must be pairwise distinct")
        clause = "" if theme.is_empty else self._script_clause.replace("{{theme}}", theme.text)
        text = self._script.replace("{{theme_clause}}", clause)
        text = text.replace("{{words}}", ", ".join(w.lemma for w in words))
        return PromptText(text=text, kind=PromptKind.SCRIPT)

    def render_exploration_prompt(self, word_a: Word, word_b: Word, theme: Theme) -> PromptText:
        if canonical_word_key(word_a) == canonical_word_key(word_b):
            raise IdenticalWords(f"exploration endpoints must differ: {word_a.lemma}")
        clause = "" if theme.is_empty else self._exploration_clause.replace("{{theme}}", theme.text)
        text = self._exploration.replace("{{theme_clause}}", clause)
        text = text.replace("{{word_a}}", word_a.lemma).replace("{{word_b}}", word_b.lemma)
        return PromptText(text=text, kind=PromptKind.EXPLORATION)
