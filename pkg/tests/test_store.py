from __future__ import annotations

import hashlib
import io
import json
import os
import signal
import subprocess
import sys
import time
import zipfile
from dataclasses import replace

import pytest
from PIL import Image

from conftest import GRADE2_WORDS, make_runtime, unit_document, wait_for_job
from contextvis.domain import MaterialSet, SetState, Theme, utcnow
from contextvis.errors import (
    DanglingReference,
    DuplicateId,
    NotReady,
    SchemaViolation,
    UnknownKey,
    UnknownMaterialSet,
    UnknownUnit,
)
from contextvis.store import Store


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "data")
    yield s
    s.close()


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------

def test_import_and_retrieve_unit(store):
    ids = store.import_units(unit_document())
    assert len(ids) == 1
    unit = store.get_unit(ids[0])
    assert unit.title == "Grade 2 / Unit 1"
    assert [w.lemma for w in unit.words] == GRADE2_WORDS


def test_import_empty_document(store):
    assert store.import_units({"units": []}) == []
    assert store.list_units() == []


def test_import_duplicate_lemma_rejected(store):
    with pytest.raises(SchemaViolation):
        store.import_units(unit_document(words=["cool", "Cool"]))


def test_import_schema_violations(store):
    for bad in (
        {"nope": []},
        {"units": [{"title": "t"}]},
        {"units": [{"title": "t", "grade_label": "g", "words": []}]},
        {"units": [{"title": "t", "grade_label": "g", "words": [1]}]},
        {"units": [{"title": 3, "grade_label": "g", "words": ["a"]}]},
    ):
        with pytest.raises(SchemaViolation):
            store.import_units(bad)


def test_import_duplicate_id_rejected_atomically(store):
    store.import_units(unit_document(unit_id="u1"))
    with pytest.raises(DuplicateId):
        store.import_units(
            {"units": [unit_document(unit_id="u2", title="other")["units"][0], unit_document(unit_id="u1")["units"][0]]}
        )
    # first insert of the failed document must not have stuck
    with pytest.raises(UnknownUnit):
        store.get_unit("u2")


def test_unknown_unit(store):
    with pytest.raises(UnknownUnit):
        store.get_unit("missing")


# ---------------------------------------------------------------------------
# Blobs
# ---------------------------------------------------------------------------

def test_blob_round_trip_and_idempotence(store):
    data = b"some image bytes"
    key = store.store_blob(data)
    assert key == hashlib.sha256(data).hexdigest()
    assert store.load_blob(key) == data
    assert store.store_blob(data) == key


def test_blob_keys_distinct(store):
    keys = {store.store_blob(f"payload-{i}".encode()) for i in range(200)}
    assert len(keys) == 200


def test_unknown_blob_key(store):
    with pytest.raises(UnknownKey):
        store.load_blob("00" * 32)


# ---------------------------------------------------------------------------
# Material sets and variants
# ---------------------------------------------------------------------------

def test_material_set_round_trip(store):
    (unit_id,) = store.import_units(unit_document())
    ms = MaterialSet(id="m1", unit_id=unit_id, theme=Theme("zoo"), state=SetState.GENERATING, created_at=utcnow(), seed=1)
    store.save_material_set(ms)
    assert store.load_material_set("m1") == ms


def test_material_set_unknown_and_dangling(store):
    with pytest.raises(UnknownMaterialSet):
        store.load_material_set("missing")
    ms = MaterialSet(id="m1", unit_id="ghost", theme=Theme(""), state=SetState.GENERATING, created_at=utcnow(), seed=1)
    with pytest.raises(DanglingReference):
        store.save_material_set(ms)


def test_dangling_sticker_reference(store):
    (unit_id,) = store.import_units(unit_document())
    ms = MaterialSet(
        id="m1", unit_id=unit_id, theme=Theme(""), state=SetState.READY,
        created_at=utcnow(), seed=1, stickers={"spring": "ghost-asset"},
    )
    with pytest.raises(DanglingReference):
        store.save_material_set(ms)


def test_list_variants_newest_first(tmp_path):
    store, orch = make_runtime(tmp_path / "data", seed_override=11)
    try:
        (unit_id,) = store.import_units(unit_document())
        for theme in ("school trip", "Switzerland"):
            job_id, _ = orch.submit_material_set(unit_id, Theme(theme))
            wait_for_job(orch, job_id)
        variants = store.list_variants(unit_id)
        assert [m.theme.text for m in variants] == ["Switzerland", "school trip"]
        assert all(m.state is SetState.READY for m in variants)
    finally:
        orch.shutdown()
        store.close()


def test_list_variants_fresh_and_unknown(store):
    (unit_id,) = store.import_units(unit_document())
    assert store.list_variants(unit_id) == []
    with pytest.raises(UnknownUnit):
        store.list_variants("missing")


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _ready_set(tmp_path, words=("spring", "lake", "cool"), theme="school trip"):
    store, orch = make_runtime(tmp_path, seed_override=5)
    (unit_id,) = store.import_units(unit_document(words=list(words)))
    job_id, set_id = orch.submit_material_set(unit_id, Theme(theme))
    assert wait_for_job(orch, job_id).state.value == "Succeeded"
    return store, orch, set_id


def test_export_bundle_contents(tmp_path):
    store, orch, set_id = _ready_set(tmp_path / "data")
    try:
        archive = store.export_bundle(set_id)
        zf = zipfile.ZipFile(io.BytesIO(archive))
        names = zf.namelist()
        assert names[0] == "manifest.json"
        assert names[1] == "script.txt"
        assert sorted(n for n in names if n.startswith("stickers/")) == [
            "stickers/cool.png", "stickers/lake.png", "stickers/spring.png",
        ]
        manifest = json.loads(zf.read("manifest.json"))
        assert manifest["material_set_id"] == set_id
        assert manifest["unit_title"] == "Grade 2 / Unit 1"
        assert manifest["theme"] == "school trip"
        assert len(manifest["entries"]) == 3
        for entry in manifest["entries"]:
            Image.open(io.BytesIO(zf.read(entry["image_file"])))
        script_lines = zf.read("script.txt").decode("utf-8").rstrip("\n").split("\n")
        assert script_lines == [e["sentence"] for e in manifest["entries"]]
    finally:
        orch.shutdown()
        store.close()


def test_export_twice_is_byte_identical(tmp_path):
    store, orch, set_id = _ready_set(tmp_path / "data")
    try:
        assert store.export_bundle(set_id) == store.export_bundle(set_id)
    finally:
        orch.shutdown()
        store.close()


def test_export_not_ready(store):
    (unit_id,) = store.import_units(unit_document())
    ms = MaterialSet(id="m1", unit_id=unit_id, theme=Theme(""), state=SetState.GENERATING, created_at=utcnow(), seed=1)
    store.save_material_set(ms)
    with pytest.raises(NotReady):
        store.export_bundle("m1")
    with pytest.raises(UnknownMaterialSet):
        store.export_bundle("missing")


# ---------------------------------------------------------------------------
# Crash injection: kill -9 between script save and sticker save
# ---------------------------------------------------------------------------

_CRASH_SCRIPT = """
import sys, time
from pathlib import Path
from contextvis.domain import MaterialSet, ScriptLine, SetState, StoryScript, Theme, Word, utcnow
from contextvis.store import Store

data_dir, marker = sys.argv[1], sys.argv[2]
store = Store(data_dir)
(unit_id,) = store.import_units({"units": [{"id": "u", "title": "t", "grade_label": "g", "words": ["spring"]}]})
script = StoryScript(theme=Theme(""), lines=(ScriptLine(word=Word("spring"), sentence="A spring day.", sticker_prompt="p"),))
ms = MaterialSet(id="m", unit_id=unit_id, theme=Theme(""), state=SetState.GENERATING, created_at=utcnow(), seed=1, script=script)
store.save_material_set(ms)
Path(marker).write_text("saved")
time.sleep(30)
"""


def test_crash_between_script_and_sticker_save(tmp_path):
    data_dir = tmp_path / "data"
    marker = tmp_path / "marker"
    proc = subprocess.Popen([sys.executable, "-c", _CRASH_SCRIPT, str(data_dir), str(marker)])
    try:
        deadline = time.monotonic() + 15
        while not marker.exists():
            assert time.monotonic() < deadline, "subprocess never reached the save point"
            assert proc.poll() is None, "subprocess died early"
            time.sleep(0.05)
        os.kill(proc.pid, signal.SIGKILL)
        proc.wait(timeout=10)
    finally:
        if proc.poll() is None:
            proc.kill()
    store = Store(data_dir)
    try:
        ms = store.load_material_set("m")
        assert ms.state is SetState.GENERATING
        assert ms.script is not None and len(ms.script.lines) == 1
        assert ms.stickers == {}
    finally:
        store.close()


def test_update_material_set_atomic_helper(store):
    (unit_id,) = store.import_units(unit_document())
    ms = MaterialSet(id="m1", unit_id=unit_id, theme=Theme(""), state=SetState.GENERATING, created_at=utcnow(), seed=1)
    store.save_material_set(ms)
    updated = store.update_material_set("m1", lambda cur: replace(cur, state=SetState.FAILED))
    assert updated.state is SetState.FAILED
    assert store.load_material_set("m1").state is SetState.FAILED
