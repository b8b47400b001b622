"""HTTP surface for the Dashboard and Playground, plus the serve entrypoint.

All long-running work is asynchronous: POST endpoints answer 202 with job
ids and clients poll ``GET /jobs/{id}``. Every error is a JSON envelope
``{"error": snake_case_code, "detail": text}``.
"""
from __future__ import annotations

import socket
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Callable, Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import domain, parsing
from .config import ApiConfig
from .domain import MaterialSet, Theme, Word, format_ts
from .errors import (
    AddressInUse,
    BadConfig,
    ContextVisError,
    DanglingReference,
    DuplicateId,
    EmptyPrompt,
    EmptyWordList,
    IdenticalWords,
    NotReady,
    SchemaViolation,
    UnknownId,
    WordNotInSet,
)
from .orchestrator import Orchestrator, RetryPolicy
from .prompts import PromptEngine
from .providers import MockImageProvider, MockTextProvider, RemoteImageProvider, RemoteTextProvider
from .store import Store


# ---------------------------------------------------------------------------
# Wire models
# ---------------------------------------------------------------------------

class UnitModel(BaseModel):
    id: str
    title: str
    grade_label: str
    words: list[str]


class UnitsResponse(BaseModel):
    units: list[UnitModel]


class ImportResponse(BaseModel):
    ids: list[str]


class CreateMaterialSetBody(BaseModel):
    unit_id: str
    theme: str = ""
    seed: Optional[int] = None


class CreateMaterialSetResponse(BaseModel):
    job_id: str
    material_set_id: str


class HighlightModel(BaseModel):
    start: int
    end: int


class ScriptLineModel(BaseModel):
    word: str
    sentence: str
    sticker_prompt: str
    highlights: list[HighlightModel]
    sticker_id: Optional[str] = None


class ScriptModel(BaseModel):
    lines: list[ScriptLineModel]


class MaterialSetResponse(BaseModel):
    id: str
    unit_id: str
    theme: str
    state: str
    script: ScriptModel
    created_at: str


class VariantSummary(BaseModel):
    id: str
    theme: str
    state: str
    created_at: str


class VariantsResponse(BaseModel):
    material_sets: list[VariantSummary]


class JobResponse(BaseModel):
    id: str
    kind: str
    state: str
    attempts: int
    error: Optional[str] = None
    result_ref: Optional[str] = None


class RefineBody(BaseModel):
    prompt: str
    seed: Optional[int] = None


class JobAccepted(BaseModel):
    job_id: str


class ExploreBody(BaseModel):
    material_set_id: str
    word_a: str
    word_b: str
    seed: Optional[int] = None


class ExplorationResponse(BaseModel):
    word_a: str
    word_b: str
    theme: str
    chain: list[str]
    added_prompts: dict[str, str]
    stickers: dict[str, str]


class ErrorEnvelope(BaseModel):
    error: str
    detail: str


_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (UnknownId, 404),
    (WordNotInSet, 422),
    (IdenticalWords, 422),
    (NotReady, 409),
    (SchemaViolation, 400),
    (DuplicateId, 400),
    (EmptyPrompt, 400),
    (EmptyWordList, 400),
    (BadConfig, 400),
    (DanglingReference, 500),
]


def _status_for(exc: ContextVisError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 500


def _material_set_response(ms: MaterialSet) -> MaterialSetResponse:
    lines = []
    if ms.script is not None:
        for ln in ms.script.lines:
            spans = parsing.match_word_occurrences(ln.word, ln.sentence)
            lines.append(
                ScriptLineModel(
                    word=ln.word.lemma,
                    sentence=ln.sentence,
                    sticker_prompt=ln.sticker_prompt,
                    highlights=[HighlightModel(start=s, end=e) for s, e in spans],
                    sticker_id=ms.stickers.get(ln.word.key),
                )
            )
    return MaterialSetResponse(
        id=ms.id,
        unit_id=ms.unit_id,
        theme=ms.theme.text,
        state=ms.state.value,
        script=ScriptModel(lines=lines),
        created_at=format_ts(ms.created_at),
    )


# ---------------------------------------------------------------------------
# App factory
# ---------------------------------------------------------------------------

def build_runtime(
    config: ApiConfig,
    new_id: Callable[[], str] = domain.new_id,
    now: Callable[[], datetime] = domain.utcnow,
) -> tuple[Store, Orchestrator]:
    """Construct the store and orchestrator a service instance runs on."""
    store = Store(config.data_dir, new_id=new_id, now=now)
    if config.provider_mode == "remote":
        text_provider = RemoteTextProvider(config.text_endpoint)
        image_provider = RemoteImageProvider(config.image_endpoint)
    else:
        text_provider = MockTextProvider()
        image_provider = MockImageProvider()
    orchestrator = Orchestrator(
        store,
        text_provider,
        image_provider,
        prompt_engine=PromptEngine(config.template_dir),
        retry=RetryPolicy(max_attempts=config.max_attempts),
        sticker_parallelism=config.sticker_parallelism,
        seed_override=config.seed_override,
        new_id=new_id,
        now=now,
    )
    return store, orchestrator


def create_app(
    config: Optional[ApiConfig] = None,
    store: Optional[Store] = None,
    orchestrator: Optional[Orchestrator] = None,
) -> FastAPI:
    config = config or ApiConfig()
    if store is None or orchestrator is None:
        store, orchestrator = build_runtime(config)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        orchestrator.shutdown(wait=True)
        store.close()

    app = FastAPI(title="contextvis", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.orchestrator = orchestrator
    app.state.config = config

    @app.exception_handler(ContextVisError)
    async def domain_error(_req: Request, exc: ContextVisError):
        return JSONResponse(status_code=_status_for(exc), content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(RequestValidationError)
    async def malformed_body(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed_body", "detail": str(exc.errors())})

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_req: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else "http_error"
        return JSONResponse(status_code=exc.status_code, content={"error": code, "detail": str(exc.detail)})

    # -- units -----------------------------------------------------------------

    @app.get("/units", response_model=UnitsResponse)
    def list_units():
        return UnitsResponse(units=[UnitModel(**u.to_dict()) for u in store.list_units()])

    @app.post("/units/import", response_model=ImportResponse)
    def import_units(document: dict):
        return ImportResponse(ids=store.import_units(document))

    # -- material sets -----------------------------------------------------------

    @app.post("/material-sets", response_model=CreateMaterialSetResponse, status_code=202)
    def create_material_set(body: CreateMaterialSetBody):
        job_id, set_id = orchestrator.submit_material_set(body.unit_id, Theme(body.theme.strip()), seed=body.seed)
        return CreateMaterialSetResponse(job_id=job_id, material_set_id=set_id)

    @app.get("/material-sets", response_model=VariantsResponse)
    def list_variants(unit_id: str):
        return VariantsResponse(
            material_sets=[
                VariantSummary(id=m.id, theme=m.theme.text, state=m.state.value, created_at=format_ts(m.created_at))
                for m in store.list_variants(unit_id)
            ]
        )

    @app.get("/material-sets/{set_id}", response_model=MaterialSetResponse)
    def get_material_set(set_id: str):
        return _material_set_response(store.load_material_set(set_id))

    @app.get("/material-sets/{set_id}/export")
    def export_material_set(set_id: str):
        data = store.export_bundle(set_id)
        return Response(
            content=data,
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{set_id}.zip"'},
        )

    # -- jobs -----------------------------------------------------------------------

    @app.get("/jobs/{job_id}", response_model=JobResponse, response_model_exclude_none=True)
    def get_job(job_id: str):
        job = orchestrator.job_status(job_id)
        return JobResponse(**job.to_dict())

    # -- refinement --------------------------------------------------------------------

    @app.post("/stickers/{sticker_id}/refine", response_model=JobAccepted, status_code=202)
    def refine_sticker(sticker_id: str, body: RefineBody):
        return JobAccepted(job_id=orchestrator.submit_refine(sticker_id, body.prompt.strip(), seed=body.seed))

    # -- exploration ----------------------------------------------------------------------

    @app.post("/explore", response_model=JobAccepted, status_code=202)
    def explore(body: ExploreBody):
        job_id = orchestrator.submit_exploration(
            body.material_set_id, Word(body.word_a.strip()), Word(body.word_b.strip()), seed=body.seed
        )
        return JobAccepted(job_id=job_id)

    @app.get("/explorations/{chain_id}", response_model=ExplorationResponse)
    def get_exploration(chain_id: str):
        chain = store.load_exploration(chain_id)
        return ExplorationResponse(
            word_a=chain.word_a.lemma,
            word_b=chain.word_b.lemma,
            theme=chain.theme.text,
            chain=[w.lemma for w in chain.chain],
            added_prompts=dict(chain.added_prompts),
            stickers=dict(chain.stickers),
        )

    # -- assets -------------------------------------------------------------------------------

    @app.get("/assets/{asset_id}")
    def get_asset(asset_id: str):
        asset = store.load_sticker(asset_id)
        return Response(content=store.load_blob(asset.image_ref), media_type="image/png")

    return app


# ---------------------------------------------------------------------------
# Serving
# ---------------------------------------------------------------------------

def bind_socket(listen_address: str) -> socket.socket:
    """Bind the listen socket up front so address conflicts surface as errors."""
    host, _, port = listen_address.rpartition(":")
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((host or "127.0.0.1", int(port)))
    except OSError as exc:
        sock.close()
        raise AddressInUse(f"cannot bind {listen_address}: {exc}") from exc
    except ValueError as exc:
        sock.close()
        raise BadConfig(f"invalid listen_address: {listen_address}") from exc
    sock.listen(128)
    return sock


def serve(config: ApiConfig) -> None:
    """Run the service until interrupted; in-flight job state writes complete
    during shutdown via the app lifespan."""
    import uvicorn

    sock = bind_socket(config.listen_address)
    app = create_app(config)
    server = uvicorn.Server(uvicorn.Config(app, log_level="info"))
    try:
        server.run(sockets=[sock])
    finally:
        sock.close()
