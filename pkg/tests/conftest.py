from __future__ import annotations

import random
import threading
import time
from datetime import datetime, timezone

import pytest

from contextvis.api import create_app
from contextvis.config import ApiConfig
from contextvis.orchestrator import Orchestrator, RetryPolicy
from contextvis.providers import MockImageProvider, MockTextProvider
from contextvis.store import Store

GRADE2_WORDS = ["spring", "lake", "hill", "tree", "flower", "bird", "river", "sun", "wind", "cool"]


def seeded_ids(seed: int):
    """Deterministic 128-bit hex id factory (thread-safe)."""
    rng = random.Random(seed)
    lock = threading.Lock()

    def factory() -> str:
        with lock:
            return f"{rng.getrandbits(128):032x}"

    return factory


def fixed_clock(epoch: int = 1700000000):
    ts = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return lambda: ts


def unit_document(words=None, title="Grade 2 / Unit 1", unit_id=None):
    entry = {"title": title, "grade_label": "Grade 2", "words": list(words or GRADE2_WORDS)}
    if unit_id is not None:
        entry["id"] = unit_id
    return {"units": [entry]}


def make_runtime(tmp_path, *, id_seed=None, clock=None, max_attempts=3, text_provider=None, seed_override=None):
    kwargs = {}
    if id_seed is not None:
        kwargs["new_id"] = seeded_ids(id_seed)
    if clock is not None:
        kwargs["now"] = clock
    store = Store(tmp_path, **kwargs)
    orchestrator = Orchestrator(
        store,
        text_provider or MockTextProvider(),
        MockImageProvider(),
        retry=RetryPolicy(max_attempts=max_attempts),
        seed_override=seed_override,
        **kwargs,
    )
    return store, orchestrator


def wait_for_job(orchestrator, job_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        job = orchestrator.job_status(job_id)
        if job.state.terminal:
            return job
        time.sleep(0.01)
    raise TimeoutError(f"job {job_id} did not reach a terminal state in {timeout}s")


def poll_job(client, job_id, timeout=10.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/jobs/{job_id}").json()
        if body["state"] in ("Succeeded", "Failed"):
            return body
        time.sleep(0.01)
    raise TimeoutError(f"job {job_id} did not reach a terminal state in {timeout}s")


@pytest.fixture
def runtime(tmp_path):
    store, orchestrator = make_runtime(tmp_path / "data")
    yield store, orchestrator
    orchestrator.shutdown()
    store.close()


@pytest.fixture
def client(tmp_path):
    from fastapi.testclient import TestClient

    config = ApiConfig(data_dir=tmp_path / "data")
    app = create_app(config)
    with TestClient(app) as c:
        yield c
