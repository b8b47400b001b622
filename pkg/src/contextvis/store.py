"""Persistence: units, material sets, stickers, explorations, jobs, blobs.

Metadata lives in an embedded SQLite database (one JSON document per row);
images live in a content-addressed blob directory keyed by SHA-256. Writes
are serialized behind a process-wide lock and wrapped in transactions so a
crash never leaves torn state.
"""
from __future__ import annotations

import hashlib
import io
import json
import re
import sqlite3
import threading
import zipfile
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Optional

from .domain import (
    ExplorationChain,
    GenerationJob,
    MaterialSet,
    SetState,
    StickerAsset,
    VocabularyUnit,
    Word,
    check_transition,
    format_ts,
    new_id,
    utcnow,
)
from .errors import (
    DanglingReference,
    DuplicateId,
    NotReady,
    SchemaViolation,
    UnknownExploration,
    UnknownJob,
    UnknownKey,
    UnknownMaterialSet,
    UnknownSticker,
    UnknownUnit,
)

_TABLES = ("units", "material_sets", "stickers", "explorations", "jobs")

# Fixed zip entry timestamp so export is a pure function of persisted state.
_ZIP_DATE = (1980, 1, 1, 0, 0, 0)


def _validate_unit_doc(doc: Any) -> list[dict]:
    if not isinstance(doc, dict) or not isinstance(doc.get("units"), list):
        raise SchemaViolation('import document must be {"units": [...]}')
    out = []
    for i, entry in enumerate(doc["units"]):
        if not isinstance(entry, dict):
            raise SchemaViolation(f"units[{i}] must be an object")
        for field_name in ("title", "grade_label"):
            if not isinstance(entry.get(field_name), str):
                raise SchemaViolation(f"units[{i}].{field_name} must be a string")
        words = entry.get("words")
        if not isinstance(words, list) or not words or not all(isinstance(w, str) for w in words):
            raise SchemaViolation(f"units[{i}].words must be a nonempty list of strings")
        if "id" in entry and entry["id"] is not None and not isinstance(entry["id"], str):
            raise SchemaViolation(f"units[{i}].id must be a string when present")
        out.append(entry)
    return out


class Store:
    """Single-node embedded store; safe to call from any thread."""

    def __init__(
        self,
        data_dir: Path | str,
        new_id: Callable[[], str] = new_id,
        now: Callable[[], datetime] = utcnow,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.blob_dir = self.data_dir / "blobs"
        self.blob_dir.mkdir(exist_ok=True)
        self.new_id = new_id
        self.now = now
        self._lock = threading.RLock()
        self._conn = sqlite3.connect(self.data_dir / "contextvis.db", check_same_thread=False)
        with self._lock, self._conn:
            for table in _TABLES:
                self._conn.execute(f"CREATE TABLE IF NOT EXISTS {table} (id TEXT PRIMARY KEY, doc TEXT NOT NULL)")

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- row helpers --------------------------------------------------------

    def _put(self, table: str, row_id: str, doc: dict) -> None:
        with self._lock, self._conn:
            self._conn.execute(
                f"INSERT INTO {table} (id, doc) VALUES (?, ?) "
                "ON CONFLICT(id) DO UPDATE SET doc = excluded.doc",
                (row_id, json.dumps(doc, ensure_ascii=False)),
            )

    def _get(self, table: str, row_id: str) -> Optional[dict]:
        with self._lock:
            row = self._conn.execute(f"SELECT doc FROM {table} WHERE id = ?", (row_id,)).fetchone()
        return json.loads(row[0]) if row else None

    def _all(self, table: str) -> list[dict]:
        with self._lock:
            rows = self._conn.execute(f"SELECT doc FROM {table}").fetchall()
        return [json.loads(r[0]) for r in rows]

    # -- units ---------------------------------------------------------------

    def import_units(self, document: dict) -> list[str]:
        """Atomically insert all units from an import document."""
        entries = _validate_unit_doc(document)
        units: list[VocabularyUnit] = []
        for i, entry in enumerate(entries):
            unit_id = entry.get("id") or self.new_id()
            try:
                units.append(
                    VocabularyUnit(
                        id=unit_id,
                        title=entry["title"],
                        grade_label=entry["grade_label"],
                        words=tuple(Word(w) for w in entry["words"]),
                    )
                )
            except SchemaViolation as exc:
                raise SchemaViolation(f"units[{i}]: {exc.detail}") from exc
        ids = [u.id for u in units]
        if len(set(ids)) != len(ids):
            raise DuplicateId("duplicate unit id within the document")
        with self._lock, self._conn:
            for u in units:
                existing = self._conn.execute("SELECT 1 FROM units WHERE id = ?", (u.id,)).fetchone()
                if existing:
                    raise DuplicateId(f"unit id already exists: {u.id}")
            for u in units:
                self._conn.execute(
                    "INSERT INTO units (id, doc) VALUES (?, ?)",
                    (u.id, json.dumps(u.to_dict(), ensure_ascii=False)),
                )
        return ids

    def get_unit(self, unit_id: str) -> VocabularyUnit:
        doc = self._get("units", unit_id)
        if doc is None:
            raise UnknownUnit(f"unknown unit: {unit_id}")
        return VocabularyUnit.from_dict(doc)

    def list_units(self) -> list[VocabularyUnit]:
        return sorted((VocabularyUnit.from_dict(d) for d in self._all("units")), key=lambda u: u.title)

    # -- material sets --------------------------------------------------------

    def save_material_set(self, ms: MaterialSet) -> None:
        with self._lock:
            if self._get("units", ms.unit_id) is None:
                raise DanglingReference(f"material set references unknown unit: {ms.unit_id}")
            for key, asset_id in ms.stickers.items():
                asset_doc = self._get("stickers", asset_id)
                if asset_doc is None:
                    raise DanglingReference(f"material set references unknown sticker: {asset_id}")
                if not self._blob_path(asset_doc["image_ref"]).is_file():
                    raise DanglingReference(f"sticker blob missing: {asset_doc['image_ref']}")
            self._put("material_sets", ms.id, ms.to_dict())

    def update_material_set(self, set_id: str, fn) -> MaterialSet:
        """Atomic read-modify-write of one material set."""
        with self._lock:
            updated = fn(self.load_material_set(set_id))
            self.save_material_set(updated)
            return updated

    def load_material_set(self, set_id: str) -> MaterialSet:
        doc = self._get("material_sets", set_id)
        if doc is None:
            raise UnknownMaterialSet(f"unknown material set: {set_id}")
        return MaterialSet.from_dict(doc)

    def list_variants(self, unit_id: str) -> list[MaterialSet]:
        """All material sets for a unit, newest first."""
        self.get_unit(unit_id)
        with self._lock:
            rows = self._conn.execute("SELECT doc FROM material_sets ORDER BY rowid DESC").fetchall()
        return [
            ms
            for ms in (MaterialSet.from_dict(json.loads(r[0])) for r in rows)
            if ms.unit_id == unit_id
        ]

    # -- stickers ----------------------------------------------------------------

    def save_sticker(self, asset: StickerAsset) -> None:
        if not self._blob_path(asset.image_ref).is_file():
            raise DanglingReference(f"sticker blob missing: {asset.image_ref}")
        self._put("stickers", asset.id, asset.to_dict())

    def load_sticker(self, asset_id: str) -> StickerAsset:
        doc = self._get("stickers", asset_id)
        if doc is None:
            raise UnknownSticker(f"unknown sticker: {asset_id}")
        return StickerAsset.from_dict(doc)

    # -- explorations --------------------------------------------------------------

    def save_exploration(self, chain: ExplorationChain) -> None:
        self._put("explorations", chain.id, chain.to_dict())

    def load_exploration(self, chain_id: str) -> ExplorationChain:
        doc = self._get("explorations", chain_id)
        if doc is None:
            raise UnknownExploration(f"unknown exploration: {chain_id}")
        return ExplorationChain.from_dict(doc)

    # -- jobs -------------------------------------------------------------------------

    def save_job(self, job: GenerationJob) -> None:
        with self._lock:
            existing = self._get("jobs", job.id)
            if existing is not None:
                check_transition(GenerationJob.from_dict(existing).state, job.state)
            self._put("jobs", job.id, job.to_dict())

    def load_job(self, job_id: str) -> GenerationJob:
        doc = self._get("jobs", job_id)
        if doc is None:
            raise UnknownJob(f"unknown job: {job_id}")
        return GenerationJob.from_dict(doc)

    # -- blobs ------------------------------------------------------------------------

    def _blob_path(self, key: str) -> Path:
        return self.blob_dir / key

    def store_blob(self, data: bytes) -> str:
        """Content-addressed write; idempotent for identical bytes."""
        key = hashlib.sha256(data).hexdigest()
        path = self._blob_path(key)
        if not path.is_file():
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        return key

    def load_blob(self, key: str) -> bytes:
        path = self._blob_path(key)
        if not path.is_file():
            raise UnknownKey(f"unknown blob key: {key}")
        return path.read_bytes()

    # -- export ------------------------------------------------------------------------

    def export_bundle(self, set_id: str) -> bytes:
        """Zip of manifest.json, script.txt and stickers/{word}.png; a pure
        function of the Ready material set's persisted state."""
        ms = self.load_material_set(set_id)
        if ms.state is not SetState.READY:
            raise NotReady(f"material set is {ms.state.value}, not Ready")
        assert ms.script is not None
        unit = self.get_unit(ms.unit_id)

        names = _sticker_file_names([ln.word for ln in ms.script.lines])
        entries = []
        for ln in ms.script.lines:
            entries.append(
                {
                    "word": ln.word.lemma,
                    "sentence": ln.sentence,
                    "sticker_prompt": ln.sticker_prompt,
                    "image_file": f"stickers/{names[ln.word.key]}",
                }
            )
        manifest = {
            "material_set_id": ms.id,
            "unit_title": unit.title,
            "theme": ms.theme.text,
            "generated_at": format_ts(ms.created_at),
            "entries": entries,
        }
        script_text = "\n".join(ln.sentence for ln in ms.script.lines) + "\n"

        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            _write_member(zf, "manifest.json", json.dumps(manifest, ensure_ascii=False, indent=2).encode("utf-8"))
            _write_member(zf, "script.txt", script_text.encode("utf-8"))
            for key in sorted(names):
                asset = self.load_sticker(ms.stickers[key])
                _write_member(zf, f"stickers/{names[key]}", self.load_blob(asset.image_ref))
        return buf.getvalue()


def _write_member(zf: zipfile.ZipFile, name: str, data: bytes) -> None:
    info = zipfile.ZipInfo(name, date_time=_ZIP_DATE)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    zf.writestr(info, data)


def _sticker_file_names(words: list[Word]) -> dict[str, str]:
    """Filesystem-safe, collision-free file name per word key."""
    names: dict[str, str] = {}
    used: set[str] = set()
    for w in words:
        base = re.sub(r"[^a-z0-9._-]+", "_", w.key) or "word"
        candidate = f"{base}.png"
        i = 2
        while candidate in used:
            candidate = f"{base}_{i}.png"
            i += 1
        used.add(candidate)
        names[w.key] = candidate
    return names
