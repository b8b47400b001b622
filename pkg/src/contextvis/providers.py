"""Pluggable text and image generation providers.

The mock providers are fully deterministic in (prompt, seed) so the whole
pipeline is reproducible offline; the remote providers speak a small JSON
POST protocol to external services (e.g. an LLM or diffusion endpoint).
"""
from __future__ import annotations

import base64
import hashlib
import io
import re
from typing import Protocol, runtime_checkable

import httpx
from PIL import Image

from .errors import ProviderError, UnrecognizedPromptShape
from .prompts import PromptText

_SCRIPT_WORDS_RE = re.compile(r"Here are the words:\s*(.+?)\.\s*$", re.DOTALL)
_EXPLORATION_WORDS_RE = re.compile(r"Here are the two input words:\s*(.+?),\s*(.+?)\.\s*$", re.DOTALL)
_THEME_RE = re.compile(r"with the theme of (.+?)(?:, make sure|\. Add related)", re.DOTALL)


@runtime_checkable
class TextProvider(Protocol):
    name: str

    def generate(self, prompt: PromptText, seed: int) -> str: ...


@runtime_checkable
class ImageProvider(Protocol):
    name: str

    def generate(self, prompt: str, seed: int) -> tuple[bytes, str]: ...


class MockTextProvider:
    """Deterministic stand-in that reads the word list back out of the prompt
    and emits grammar-valid records."""

    name = "mock-text"

    def generate(self, prompt: PromptText, seed: int) -> str:
        text = prompt.text
        theme_match = _THEME_RE.search(text)
        theme = theme_match.group(1).strip() if theme_match else "story"
        pair = _EXPLORATION_WORDS_RE.search(text)
        if pair:
            a, b = pair.group(1).strip(), pair.group(2).strip()
            k = seed % 3
            blocks = []
            for i in range(k):
                w = f"{a}-{b}-link{i}"
                blocks.append(f'Word: "{w}"\nSticker Prompt: "A {w} in the {theme}."')
            return "\n".join(blocks) + ("\n" if blocks else "")
        listing = _SCRIPT_WORDS_RE.search(text)
        if listing:
            words = [w.strip() for w in listing.group(1).split(",") if w.strip()]
            blocks = [
                f'Word: "{w}"\n'
                f'Sentence: "In the {theme}, we see the {w}."\n'
                f'Sticker Prompt: "A {w} in the {theme}."'
                for w in words
            ]
            return "\n".join(blocks) + "\n"
        raise UnrecognizedPromptShape("prompt has neither a word-list nor a word-pair trailing clause")


class MockImageProvider:
    """Deterministic 64x64 PNG whose 8x8 color blocks derive from a stable
    hash of (prompt, seed); byte-identical for identical inputs."""

    name = "mock-image"
    SIZE = 64
    GRID = 8

    def generate(self, prompt: str, seed: int) -> tuple[bytes, str]:
        material = hashlib.shake_256(f"{seed}\x00{prompt}".encode("utf-8")).digest(self.GRID * self.GRID * 3)
        img = Image.new("RGB", (self.SIZE, self.SIZE))
        cell = self.SIZE // self.GRID
        px = img.load()
        for gy in range(self.GRID):
            for gx in range(self.GRID):
                i = (gy * self.GRID + gx) * 3
                color = (material[i], material[i + 1], material[i + 2])
                for dy in range(cell):
                    for dx in range(cell):
                        px[gx * cell + dx, gy * cell + dy] = color
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue(), "png"


class RemoteTextProvider:
    """POST {endpoint}/generate with {"prompt", "seed"} -> {"text"}."""

    name = "remote-text"

    def __init__(self, endpoint: str, timeout: float = 120.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def generate(self, prompt: PromptText, seed: int) -> str:
        try:
            resp = httpx.post(
                f"{self.endpoint}/generate",
                json={"prompt": prompt.text, "seed": seed},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["text"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ProviderError(f"remote text provider failed: {exc}") from exc


class RemoteImageProvider:
    """POST {endpoint}/generate with {"prompt", "seed"} -> {"image_base64", "format"}."""

    name = "remote-image"

    def __init__(self, endpoint: str, timeout: float = 300.0):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout

    def generate(self, prompt: str, seed: int) -> tuple[bytes, str]:
        try:
            resp = httpx.post(
                f"{self.endpoint}/generate",
                json={"prompt": prompt, "seed": seed},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            body = resp.json()
            return base64.b64decode(body["image_base64"]), body.get("format", "png")
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ProviderError(f"remote image provider failed: {exc}") from exc
