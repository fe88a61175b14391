"""Inference spine: authenticate -> charge -> fetch -> dispatch -> persist.

Charges happen before dispatch and are refunded on any failure, so a user
never pays for a crashed adapter. Every attempt that passes precondition
checks leaves exactly one model log row; a successful run additionally
persists its prediction in the same transaction as the ok log entry.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from enum import Enum

from sqlalchemy import text

from .accounts import AccountService
from .detectors.native import (
    DetectionResult,
    FaceRegion,
    Label,
    run_flatness_detector,
    run_frequency_detector,
)
from .detectors.registry import (
    AdapterKind,
    DetectorRegistry,
    NATIVE_FLATNESS_ID,
    NATIVE_FREQUENCY_ID,
)
from .detectors.remote import RemoteDetectorClient
from .errors import ServiceError
from .ingest import IngestService, MediaUpload, Modality
from .persistence import Database
from .util import new_id, utc_now_iso

logger = logging.getLogger(__name__)


class LogOutcome(str, Enum):
    ok = "ok"
    adapter_error = "adapter_error"
    timeout = "timeout"
    invalid_input = "invalid_input"


@dataclass(frozen=True)
class Prediction:
    prediction_id: str
    upload_id: str
    detector_id: str
    modality: Modality
    label: Label
    score: float
    faces: list[FaceRegion] | None
    latency_ms: int
    created_at: str


@dataclass(frozen=True)
class ModelLogEntry:
    log_id: str
    upload_id: str
    detector_id: str
    modality: Modality
    outcome: LogOutcome
    duration_ms: int
    created_at: str


class InferenceOrchestrator:
    def __init__(
        self,
        db: Database,
        registry: DetectorRegistry,
        accounts: AccountService,
        ingest: IngestService,
        remote: RemoteDetectorClient,
    ):
        self.db = db
        self.registry = registry
        self.accounts = accounts
        self.ingest = ingest
        self.remote = remote

    def run_inference(self, user_id: str, upload_id: str, detector_id: str) -> Prediction:
        upload = self.ingest.get_upload(upload_id)
        if upload is None:
            raise ServiceError("not_found", f"no upload {upload_id}")
        if upload.user_id != user_id:
            raise ServiceError("forbidden", "upload belongs to another account")
        descriptor = self.registry.get(detector_id)
        if descriptor.adapter_kind is AdapterKind.mllm_chat:
            raise ServiceError(
                "detector_not_runnable",
                f"{detector_id} is a chat model; use the MLLM workspace instead",
            )
        if descriptor.modality is not upload.modality:
            raise ServiceError(
                "modality_mismatch",
                f"{detector_id} handles {descriptor.modality.value}, upload is "
                f"{upload.modality.value}",
            )

        prediction_id = new_id()
        charge = self.accounts.charge_credit(user_id, ref=prediction_id)
        started = time.perf_counter()
        try:
            result = self._dispatch(descriptor.adapter_kind, detector_id, upload)
        except ServiceError as exc:
            duration_ms = int((time.perf_counter() - started) * 1000)
            self._write_log(upload, detector_id, _outcome_for(exc.code), duration_ms)
            self.accounts.refund_credit(user_id, charge.entry_id)
            raise

        duration_ms = int((time.perf_counter() - started) * 1000)
        prediction = Prediction(
            prediction_id=prediction_id,
            upload_id=upload.upload_id,
            detector_id=detector_id,
            modality=upload.modality,
            label=result.label,
            score=result.score,
            faces=result.faces,
            latency_ms=result.latency_ms,
            created_at=utc_now_iso(),
        )
        try:
            self._persist_success(prediction, upload, duration_ms)
        except Exception as exc:
            logger.error("failed to persist prediction %s: %s", prediction_id, exc)
            self.accounts.refund_credit(user_id, charge.entry_id)
            raise ServiceError(
                "conflict_retry_exhausted", "could not persist the inference result"
            )
        return prediction

    def _dispatch(
        self, kind: AdapterKind, detector_id: str, upload: MediaUpload
    ) -> DetectionResult:
        if kind is AdapterKind.native_heuristic:
            if detector_id == NATIVE_FREQUENCY_ID:
                return run_frequency_detector(self.ingest.decode_image(upload))
            if detector_id == NATIVE_FLATNESS_ID:
                return run_flatness_detector(self.ingest.decode_audio(upload))
            raise ServiceError("unknown_detector", f"no native runner for {detector_id}")
        data = self.ingest.read_bytes(upload)
        return self.remote.run(self.registry.get(detector_id), data, upload.format)

    def _write_log(
        self, upload: MediaUpload, detector_id: str, outcome: LogOutcome, duration_ms: int
    ) -> None:
        self.db.execute(
            "INSERT INTO model_logs (log_id, upload_id, detector_id, modality,"
            " outcome, duration_ms, created_at)"
            " VALUES (:log_id, :upload_id, :detector_id, :modality, :outcome,"
            " :duration_ms, :created_at)",
            {
                "log_id": new_id(),
                "upload_id": upload.upload_id,
                "detector_id": detector_id,
                "modality": upload.modality.value,
                "outcome": outcome.value,
                "duration_ms": duration_ms,
                "created_at": utc_now_iso(),
            },
        )

    def _persist_success(
        self, prediction: Prediction, upload: MediaUpload, duration_ms: int
    ) -> None:
        faces_json = (
            json.dumps(
                [{"bbox": [f.x, f.y, f.w, f.h], "score": f.score} for f in prediction.faces]
            )
            if prediction.faces is not None
            else None
        )

        def op(conn):
            conn.execute(
                text(
                    "INSERT INTO predictions (prediction_id, upload_id, detector_id,"
                    " modality, label, score, faces, latency_ms, created_at)"
                    " VALUES (:pid, :uid, :did, :mod, :label, :score, :faces, :lat, :now)"
                ),
                {
                    "pid": prediction.prediction_id,
                    "uid": prediction.upload_id,
                    "did": prediction.detector_id,
                    "mod": prediction.modality.value,
                    "label": prediction.label.value,
                    "score": prediction.score,
                    "faces": faces_json,
                    "lat": prediction.latency_ms,
                    "now": prediction.created_at,
                },
            )
            conn.execute(
                text(
                    "INSERT INTO model_logs (log_id, upload_id, detector_id, modality,"
                    " outcome, duration_ms, created_at)"
                    " VALUES (:log_id, :upload_id, :detector_id, :modality, 'ok',"
                    " :duration_ms, :created_at)"
                ),
                {
                    "log_id": new_id(),
                    "upload_id": upload.upload_id,
                    "detector_id": prediction.detector_id,
                    "modality": upload.modality.value,
                    "duration_ms": duration_ms,
                    "created_at": prediction.created_at,
                },
            )

        self.db.run_in_transaction(op)

    # -- reads ---------------------------------------------------------------

    def get_prediction(self, user_id: str, prediction_id: str) -> Prediction:
        row = self.db.query_one(
            "SELECT p.*, u.user_id AS owner FROM predictions p"
            " JOIN uploads u ON u.upload_id = p.upload_id"
            " WHERE p.prediction_id = :pid",
            {"pid": prediction_id},
        )
        if row is None:
            raise ServiceError("not_found", f"no prediction {prediction_id}")
        if row["owner"] != user_id:
            raise ServiceError("forbidden", "prediction belongs to another account")
        return _prediction_from_row(row)

    def list_history(self, user_id: str, page: int = 1, page_size: int = 20) -> list[Prediction]:
        if page < 1 or page_size < 1 or page_size > 100:
            raise ServiceError(
                "invalid_page", "page must be >= 1 and page_size between 1 and 100"
            )
        rows = self.db.query(
            "SELECT p.* FROM predictions p"
            " JOIN uploads u ON u.upload_id = p.upload_id"
            " WHERE u.user_id = :uid"
            " ORDER BY p.created_at DESC, p.prediction_id DESC"
            " LIMIT :limit OFFSET :offset",
            {"uid": user_id, "limit": page_size, "offset": (page - 1) * page_size},
        )
        return [_prediction_from_row(r) for r in rows]


def _outcome_for(error_code: str) -> LogOutcome:
    if error_code == "adapter_timeout":
        return LogOutcome.timeout
    if error_code in ("undecodable_format", "decode_failure", "too_short"):
        return LogOutcome.invalid_input
    return LogOutcome.adapter_error


def _prediction_from_row(row: dict) -> Prediction:
    faces = None
    if row["faces"]:
        faces = [
            FaceRegion(x=f["bbox"][0], y=f["bbox"][1], w=f["bbox"][2], h=f["bbox"][3],
                       score=f["score"])
            for f in json.loads(row["faces"])
        ]
    return Prediction(
        prediction_id=row["prediction_id"],
        upload_id=row["upload_id"],
        detector_id=row["detector_id"],
        modality=Modality(row["modality"]),
        label=Label(row["label"]),
        score=row["score"],
        faces=faces,
        latency_ms=row["latency_ms"],
        created_at=row["created_at"],
    )
