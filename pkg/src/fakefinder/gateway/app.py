"""REST/JSON boundary. Stateless workers: any number of identical processes
can serve over one shared store; the only cross-request state lives there.

All failures use one envelope: {"error": {"code": ..., "message": ...}}.
Authentication is a pure token check and runs before any handler touches
persistence.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from fastapi import Depends, FastAPI, File, Form, Header, Query, Request, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .. import __version__
from ..accounts import AccountService, CreditEntry
from ..analytics import AnalyticsService, FeedbackForm
from ..config import AppConfig, ConfigError
from ..detectors.registry import DetectorRegistry, build_default_registry
from ..detectors.remote import RemoteDetectorClient
from ..errors import ERROR_STATUS, ServiceError
from ..ingest import BlobStore, IngestService, MediaUpload, Modality
from ..mllm import ChatAdapterClient, MllmSession, MllmWorkspace
from ..orchestrator import InferenceOrchestrator, Prediction
from ..persistence import Database
from . import schemas

logger = logging.getLogger(__name__)


@dataclass
class Services:
    config: AppConfig
    db: Database
    blobs: BlobStore
    registry: DetectorRegistry
    accounts: AccountService
    ingest: IngestService
    remote: RemoteDetectorClient
    chat: ChatAdapterClient
    workspace: MllmWorkspace
    orchestrator: InferenceOrchestrator
    analytics: AnalyticsService


def build_services(config: AppConfig) -> Services:
    config.require_token_key()
    db = Database(config.store_url)
    try:
        db.migrate()
    except ServiceError:
        raise
    except Exception as exc:
        raise ConfigError(f"store_unreachable: {exc}")
    registry = build_default_registry()
    blobs = BlobStore(config.blob_root)
    accounts = AccountService(db, config)
    ingest = IngestService(db, blobs, config)
    remote = RemoteDetectorClient(config.adapter_urls, config.adapter_timeout_s)
    chat = ChatAdapterClient(config.chat_url, config.transcribe_url, config.adapter_timeout_s)
    workspace = MllmWorkspace(db, accounts, ingest, registry, chat, config)
    orchestrator = InferenceOrchestrator(db, registry, accounts, ingest, remote)
    analytics = AnalyticsService(db, registry, config)
    return Services(
        config=config, db=db, blobs=blobs, registry=registry, accounts=accounts,
        ingest=ingest, remote=remote, chat=chat, workspace=workspace,
        orchestrator=orchestrator, analytics=analytics,
    )


def create_app(config: AppConfig, services: Services | None = None) -> FastAPI:
    svc = services or build_services(config)
    app = FastAPI(title="fakefinder", version=__version__)
    app.state.services = svc

    app.add_middleware(
        CORSMiddleware,
        allow_origins=[config.ui_origin],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    # -- error envelope -----------------------------------------------------

    @app.exception_handler(ServiceError)
    async def on_service_error(_request: Request, exc: ServiceError):
        return _error_response(ERROR_STATUS[exc.code], exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(_request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return _error_response(
            422, "validation_error", f"{first.get('msg', 'invalid request')} ({where})"
        )

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(_request: Request, exc: StarletteHTTPException):
        return _error_response(exc.status_code, "http_error", str(exc.detail))

    @app.exception_handler(Exception)
    async def on_unexpected(_request: Request, exc: Exception):
        logger.exception("unhandled error")
        return _error_response(500, "internal_error", "unexpected server error")

    # -- auth -----------------------------------------------------------------

    def current_user(authorization: str | None = Header(default=None)) -> str:
        if not authorization or not authorization.lower().startswith("bearer "):
            raise ServiceError("invalid_token", "missing bearer token")
        return svc.accounts.authenticate(authorization.split(" ", 1)[1])

    def current_admin(user_id: str = Depends(current_user)) -> str:
        if not svc.accounts.is_admin(user_id):
            raise ServiceError("not_admin", "caller does not hold the admin role")
        return user_id

    # -- accounts -----------------------------------------------------------

    @app.post("/api/register", response_model=schemas.RegisterResponse, status_code=201)
    def register(req: schemas.RegisterRequest):
        account = svc.accounts.register(
            req.name, req.email, req.position, req.region, req.password, req.password_confirm
        )
        return schemas.RegisterResponse(
            user_id=account.user_id, name=account.name, email=account.email,
            position=account.position, region=account.region,
            created_at=account.created_at, balance=svc.accounts.get_balance(account.user_id),
        )

    @app.post("/api/login", response_model=schemas.TokenResponse)
    def login(req: schemas.LoginRequest):
        token, expires_at = svc.accounts.login(req.email, req.password)
        return schemas.TokenResponse(token=token, expires_at=expires_at)

    @app.get("/api/credits", response_model=schemas.BalanceResponse)
    def credits(user_id: str = Depends(current_user)):
        return schemas.BalanceResponse(user_id=user_id, balance=svc.accounts.get_balance(user_id))

    @app.post("/api/admin/credits", response_model=schemas.CreditEntryResponse, status_code=201)
    def grant_credits(req: schemas.GrantRequest, admin_id: str = Depends(current_user)):
        entry = svc.accounts.grant_credits(admin_id, req.user_id, req.amount, req.note)
        return _credit_entry_response(entry)

    # -- uploads and detectors ---------------------------------------------

    @app.post("/api/uploads", response_model=schemas.UploadResponse, status_code=201)
    def upload_media(
        file: UploadFile = File(...),
        consent: bool = Form(default=False),
        user_id: str = Depends(current_user),
    ):
        data = file.file.read()
        upload = svc.ingest.ingest(user_id, file.filename or "upload", data, consent)
        return _upload_response(upload)

    @app.get("/api/detectors", response_model=list[schemas.DetectorResponse])
    def list_detectors(
        modality: str | None = Query(default=None),
        user_id: str = Depends(current_user),
    ):
        modality_filter = None
        if modality is not None:
            try:
                modality_filter = Modality(modality)
            except ValueError:
                raise ServiceError("validation_error", "modality must be 'image' or 'audio'")
        return [
            schemas.DetectorResponse(
                detector_id=d.detector_id, display_name=d.display_name,
                modality=d.modality.value, category=d.category.value,
                adapter_kind=d.adapter_kind.value, version=d.version,
            )
            for d in svc.registry.list(modality_filter)
        ]

    # -- inference -----------------------------------------------------------

    @app.post("/api/inferences", response_model=schemas.PredictionResponse, status_code=201)
    def run_inference(req: schemas.InferenceRequest, user_id: str = Depends(current_user)):
        prediction = svc.orchestrator.run_inference(user_id, req.upload_id, req.detector_id)
        return _prediction_response(prediction)

    @app.get("/api/inferences", response_model=list[schemas.PredictionResponse])
    def list_history(
        page: int = Query(default=1),
        page_size: int = Query(default=20),
        user_id: str = Depends(current_user),
    ):
        return [
            _prediction_response(p)
            for p in svc.orchestrator.list_history(user_id, page, page_size)
        ]

    @app.get("/api/inferences/{prediction_id}", response_model=schemas.PredictionResponse)
    def get_prediction(prediction_id: str, user_id: str = Depends(current_user)):
        return _prediction_response(svc.orchestrator.get_prediction(user_id, prediction_id))

    # -- mllm workspace --------------------------------------------------------

    @app.post("/api/mllm/sessions", response_model=schemas.SessionResponse, status_code=201)
    def create_session(req: schemas.SessionCreateRequest, user_id: str = Depends(current_user)):
        session = svc.workspace.create_session(user_id, req.model_id, req.upload_id)
        return _session_response(session)

    @app.post("/api/mllm/sessions/{session_id}/messages", response_model=schemas.MessageResponse)
    def send_message(
        session_id: str, req: schemas.MessageRequest, user_id: str = Depends(current_user)
    ):
        session = svc.workspace.send_message(user_id, session_id, req.prompt)
        last = session.turns[-1]
        return schemas.MessageResponse(
            session_id=session.session_id,
            turn=schemas.TurnResponse(role=last.role, text=last.text, timestamp=last.created_at),
            transcript=session.transcript,
        )

    # -- analytics and feedback -------------------------------------------------

    @app.get("/api/statistics", response_model=schemas.StatisticsResponse)
    def statistics(user_id: str = Depends(current_user)):
        return schemas.StatisticsResponse(**svc.analytics.compute_statistics().to_dict())

    @app.post("/api/feedback", response_model=schemas.FeedbackSubmitResponse, status_code=201)
    def submit_feedback(req: schemas.FeedbackRequest, user_id: str = Depends(current_user)):
        entry_id = svc.analytics.submit_feedback(user_id, FeedbackForm(**req.model_dump()))
        return schemas.FeedbackSubmitResponse(entry_id=entry_id)

    @app.get("/api/admin/feedback", response_model=schemas.FeedbackSummaryResponse)
    def feedback_summary(admin_id: str = Depends(current_admin)):
        return schemas.FeedbackSummaryResponse(**svc.analytics.aggregate_feedback().to_dict())

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return schemas.HealthResponse(status="ok")

    return app


def openapi_document(app: FastAPI) -> str:
    """Machine-readable API description; byte-stable across regenerations."""
    return json.dumps(app.openapi(), sort_keys=True, indent=2) + "\n"


def serve(config: AppConfig) -> None:
    import uvicorn

    app = create_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    except OSError as exc:
        raise ConfigError(f"bind_failure: cannot listen on {config.bind_addr}: {exc}")


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def _credit_entry_response(entry: CreditEntry) -> schemas.CreditEntryResponse:
    return schemas.CreditEntryResponse(
        entry_id=entry.entry_id, user_id=entry.user_id, delta=entry.delta,
        reason=entry.reason.value, ref=entry.ref, note=entry.note,
        created_at=entry.created_at,
    )


def _upload_response(upload: MediaUpload) -> schemas.UploadResponse:
    return schemas.UploadResponse(
        upload_id=upload.upload_id, filename=upload.filename,
        modality=upload.modality.value, format=upload.format.value,
        byte_size=upload.byte_size, content_hash=upload.content_hash,
        uploaded_at=upload.uploaded_at,
    )


def _prediction_response(prediction: Prediction) -> schemas.PredictionResponse:
    faces = None
    if prediction.faces is not None:
        faces = [
            schemas.FaceRegionResponse(bbox=[f.x, f.y, f.w, f.h], score=f.score)
            for f in prediction.faces
        ]
    return schemas.PredictionResponse(
        prediction_id=prediction.prediction_id, upload_id=prediction.upload_id,
        detector_id=prediction.detector_id, modality=prediction.modality.value,
        label=prediction.label.value, score=prediction.score, faces=faces,
        latency_ms=prediction.latency_ms, created_at=prediction.created_at,
    )


def _session_response(session: MllmSession) -> schemas.SessionResponse:
    return schemas.SessionResponse(
        session_id=session.session_id, model_id=session.model_id,
        upload_id=session.upload_id, transcript=session.transcript,
        created_at=session.created_at,
        turns=[
            schemas.TurnResponse(role=t.role, text=t.text, timestamp=t.created_at)
            for t in session.turns
        ],
    )
