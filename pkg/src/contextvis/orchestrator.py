"""Generation pipelines as tracked jobs over pluggable providers.

Three pipelines: material set (script then sticker fan-out), single-sticker
refinement, and exploration chains. Text generation retries with a fresh
seed when the output fails parsing or validation; sticker generation fans
out concurrently up to a configurable limit.
"""
from __future__ import annotations

import secrets
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime
from typing import Callable, Optional

from . import parsing
from .domain import (
    GenerationJob,
    JobKind,
    JobState,
    MaterialSet,
    SetState,
    StickerAsset,
    StoryScript,
    Theme,
    Word,
    new_id,
    utcnow,
)
from .errors import (
    ContextVisError,
    EmptyPrompt,
    IdenticalWords,
    NotReady,
    ParseError,
    UnknownMaterialSet,
    WordNotInSet,
)
from .prompts import PromptEngine
from .providers import ImageProvider, TextProvider
from .store import Store


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    reseed_per_attempt: bool = True

    def seed_for_attempt(self, base_seed: int, attempt: int) -> int:
        return base_seed + (attempt - 1) if self.reseed_per_attempt else base_seed


def _random_seed() -> int:
    return secrets.randbits(32)


class Orchestrator:
    """Runs pipelines in background threads; safe for concurrent submissions."""

    def __init__(
        self,
        store: Store,
        text_provider: TextProvider,
        image_provider: ImageProvider,
        prompt_engine: Optional[PromptEngine] = None,
        retry: RetryPolicy = RetryPolicy(),
        sticker_parallelism: int = 4,
        seed_override: Optional[int] = None,
        new_id: Callable[[], str] = new_id,
        now: Callable[[], datetime] = utcnow,
    ):
        self.store = store
        self.text_provider = text_provider
        self.image_provider = image_provider
        self.prompts = prompt_engine or PromptEngine()
        self.retry = retry
        self.seed_override = seed_override
        self.new_id = new_id
        self.now = now
        self._pipelines = ThreadPoolExecutor(max_workers=8, thread_name_prefix="pipeline")
        self._stickers = ThreadPoolExecutor(max_workers=max(1, sticker_parallelism), thread_name_prefix="sticker")
        self._job_lock = threading.Lock()

    def shutdown(self, wait: bool = True) -> None:
        """Complete in-flight jobs' state writes before returning."""
        self._pipelines.shutdown(wait=wait)
        self._stickers.shutdown(wait=wait)

    # -- job bookkeeping -------------------------------------------------------

    def _new_job(self, kind: JobKind) -> GenerationJob:
        job = GenerationJob(id=self.new_id(), kind=kind, state=JobState.PENDING)
        self.store.save_job(job)
        return job

    def _update_job(self, job_id: str, **changes) -> GenerationJob:
        with self._job_lock:
            job = self.store.load_job(job_id)
            if job.state.terminal:
                return job
            job = replace(job, **changes)
            self.store.save_job(job)
            return job

    def job_status(self, job_id: str) -> GenerationJob:
        return self.store.load_job(job_id)

    def _pick_seed(self, seed: Optional[int]) -> int:
        if seed is not None:
            return seed
        if self.seed_override is not None:
            return self.seed_override
        return _random_seed()

    # -- text generation with validation-driven retry ----------------------------

    def _generate_with_retry(self, job_id: str, base_seed: int, produce: Callable[[int], object]) -> object:
        last_error: Optional[ContextVisError] = None
        for attempt in range(1, self.retry.max_attempts + 1):
            self._update_job(job_id, state=JobState.RUNNING, attempts=attempt)
            try:
                return produce(self.retry.seed_for_attempt(base_seed, attempt))
            except ContextVisError as exc:
                last_error = exc
        assert last_error is not None
        raise last_error

    # -- material set pipeline ------------------------------------------------------

    def submit_material_set(self, unit_id: str, theme: Theme, seed: Optional[int] = None) -> tuple[str, str]:
        """Create a Generating material set plus its pipeline job; returns
        (job_id, material_set_id)."""
        unit = self.store.get_unit(unit_id)
        ms = MaterialSet(
            id=self.new_id(),
            unit_id=unit_id,
            theme=theme,
            state=SetState.GENERATING,
            created_at=self.now(),
            seed=self._pick_seed(seed),
        )
        self.store.save_material_set(ms)
        job = self._new_job(JobKind.SCRIPT)
        self._pipelines.submit(self._run_material_set, job.id, ms, tuple(unit.words))
        return job.id, ms.id

    def _run_material_set(self, job_id: str, ms: MaterialSet, words: tuple[Word, ...]) -> None:
        try:
            prompt = self.prompts.render_script_prompt(words, ms.theme)

            def produce(seed: int) -> StoryScript:
                raw = self.text_provider.generate(prompt, seed)
                script = parsing.parse_script_output(raw, words, theme=ms.theme)
                violations = parsing.validate_script(script, words)
                if violations:
                    raise ParseError("; ".join(f"{v.code}:{v.word or v.detail}" for v in violations))
                return script

            script = self._generate_with_retry(job_id, ms.seed, produce)
            assert isinstance(script, StoryScript)
            ms = replace(ms, script=script)
            self.store.save_material_set(ms)

            stickers = self._fan_out_stickers(ms.id, script.lines, ms.seed)
            ms = replace(ms, stickers=stickers, state=SetState.READY)
            self.store.save_material_set(ms)
            self._update_job(job_id, state=JobState.SUCCEEDED, result_ref=ms.id)
        except Exception as exc:  # any exhausted retry or provider failure
            self.store.save_material_set(replace(ms, state=SetState.FAILED))
            self._update_job(job_id, state=JobState.FAILED, error=str(exc))

    def _fan_out_stickers(self, set_id: str, lines, seed: int) -> dict[str, str]:
        futures: dict[str, Future] = {}
        for line in lines:
            futures[line.word.key] = self._stickers.submit(
                self._generate_sticker, set_id, line.word, line.sticker_prompt, seed, None
            )
        return {key: fut.result().id for key, fut in futures.items()}

    def _generate_sticker(
        self,
        set_id: Optional[str],
        word: Word,
        prompt: str,
        seed: int,
        supersedes: Optional[str],
    ) -> StickerAsset:
        """One tracked sticker job: generate, store blob, persist asset."""
        job = self._new_job(JobKind.STICKER)
        try:
            self._update_job(job.id, state=JobState.RUNNING, attempts=1)
            data, _fmt = self.image_provider.generate(prompt, seed)
            key = self.store.store_blob(data)
            asset = StickerAsset(
                id=self.new_id(),
                word=word,
                prompt=prompt,
                seed=seed,
                image_ref=key,
                provider_name=self.image_provider.name,
                created_at=self.now(),
                supersedes=supersedes,
                material_set_id=set_id,
            )
            self.store.save_sticker(asset)
            self._update_job(job.id, state=JobState.SUCCEEDED, result_ref=asset.id)
            return asset
        except Exception as exc:
            self._update_job(job.id, state=JobState.FAILED, error=str(exc))
            raise

    # -- refinement -------------------------------------------------------------------

    def submit_refine(self, sticker_id: str, new_prompt: str, seed: Optional[int] = None) -> str:
        if not new_prompt or not new_prompt.strip():
            raise EmptyPrompt("refine prompt must be nonempty")
        old = self.store.load_sticker(sticker_id)
        if old.material_set_id is None:
            raise UnknownMaterialSet("sticker does not belong to a material set")
        ms = self.store.load_material_set(old.material_set_id)
        if ms.state is SetState.GENERATING:
            raise NotReady("material set is still generating")
        job = self._new_job(JobKind.STICKER)
        self._pipelines.submit(self._run_refine, job.id, ms.id, old, new_prompt, self._pick_seed(seed))
        return job.id

    def _run_refine(self, job_id: str, set_id: str, old: StickerAsset, prompt: str, seed: int) -> None:
        try:
            self._update_job(job_id, state=JobState.RUNNING, attempts=1)
            data, _fmt = self.image_provider.generate(prompt, seed)
            key = self.store.store_blob(data)
            asset = StickerAsset(
                id=self.new_id(),
                word=old.word,
                prompt=prompt,
                seed=seed,
                image_ref=key,
                provider_name=self.image_provider.name,
                created_at=self.now(),
                supersedes=old.id,
                material_set_id=set_id,
            )
            self.store.save_sticker(asset)
            self.store.update_material_set(
                set_id,
                lambda ms: replace(ms, stickers={**ms.stickers, old.word.key: asset.id}),
            )
            self._update_job(job_id, state=JobState.SUCCEEDED, result_ref=asset.id)
        except Exception as exc:
            self._update_job(job_id, state=JobState.FAILED, error=str(exc))

    # -- exploration ---------------------------------------------------------------------

    def submit_exploration(self, set_id: str, word_a: Word, word_b: Word, seed: Optional[int] = None) -> str:
        ms = self.store.load_material_set(set_id)
        if word_a.key == word_b.key:
            raise IdenticalWords(word_a.lemma)
        script_keys = {ln.word.key for ln in ms.script.lines} if ms.script else set()
        for w in (word_a, word_b):
            if w.key not in script_keys:
                raise WordNotInSet(w.lemma)
        if ms.state is not SetState.READY:
            raise NotReady("material set must be Ready before exploration")
        job = self._new_job(JobKind.EXPLORATION)
        self._pipelines.submit(self._run_exploration, job.id, ms, word_a, word_b, self._pick_seed(seed))
        return job.id

    def _run_exploration(self, job_id: str, ms: MaterialSet, word_a: Word, word_b: Word, seed: int) -> None:
        try:
            prompt = self.prompts.render_exploration_prompt(word_a, word_b, ms.theme)

            def produce(attempt_seed: int):
                raw = self.text_provider.generate(prompt, attempt_seed)
                return parsing.parse_exploration_output(raw, word_a, word_b, theme=ms.theme)

            chain = self._generate_with_retry(job_id, seed, produce)
            stickers = {
                word_a.key: ms.stickers[word_a.key],
                word_b.key: ms.stickers[word_b.key],
            }
            futures = {
                w.key: self._stickers.submit(
                    self._generate_sticker, None, w, chain.added_prompts[w.key], seed, None
                )
                for w in chain.chain[1:-1]
            }
            for key, fut in futures.items():
                stickers[key] = fut.result().id
            chain = parsing.with_identity(chain, self.new_id(), stickers)
            self.store.save_exploration(chain)
            self._update_job(job_id, state=JobState.SUCCEEDED, result_ref=chain.id)
        except Exception as exc:
            self._update_job(job_id, state=JobState.FAILED, error=str(exc))
