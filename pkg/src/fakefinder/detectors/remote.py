"""HTTP client for remote model adapters.

Wire protocol: POST <endpoint>/v1/infer with JSON
{"detector_id", "modality", "format", "media_b64"}; a 200 response carries
{"label": "real"|"fake", "score": float, "faces": [...]?, "latency_ms": int}.
Any non-200 status or schema violation is an adapter failure. Calls are not
retried; the orchestrator refunds the credit instead.
"""

from __future__ import annotations

import base64
import logging
import time

import httpx

from ..errors import ServiceError
from ..ingest import MediaFormat
from .native import DECISION_THRESHOLD, DetectionResult, FaceRegion, Label
from .registry import AdapterKind, DetectorDescriptor

logger = logging.getLogger(__name__)

INFER_PATH = "/v1/infer"


class RemoteDetectorClient:
    def __init__(self, adapter_urls: dict[str, str], timeout_s: float = 30.0):
        self.adapter_urls = adapter_urls
        self.timeout_s = timeout_s

    def run(
        self, descriptor: DetectorDescriptor, media: bytes, fmt: MediaFormat
    ) -> DetectionResult:
        if descriptor.adapter_kind is not AdapterKind.remote_model:
            raise ValueError(f"{descriptor.detector_id} is not a remote adapter")
        endpoint = self.adapter_urls.get(descriptor.detector_id)
        if not endpoint:
            raise ServiceError(
                "adapter_unreachable",
                f"no adapter endpoint configured for {descriptor.detector_id}",
            )
        body = {
            "detector_id": descriptor.detector_id,
            "modality": descriptor.modality.value,
            "format": fmt.value,
            "media_b64": base64.b64encode(media).decode("ascii"),
        }
        started = time.perf_counter()
        try:
            response = httpx.post(
                endpoint.rstrip("/") + INFER_PATH, json=body, timeout=self.timeout_s
            )
        except httpx.TimeoutException:
            raise ServiceError(
                "adapter_timeout",
                f"{descriptor.detector_id} adapter exceeded {self.timeout_s}s",
            )
        except httpx.TransportError as exc:
            raise ServiceError(
                "adapter_unreachable", f"{descriptor.detector_id} adapter: {exc}"
            )
        elapsed_ms = int((time.perf_counter() - started) * 1000)
        if response.status_code != 200:
            raise ServiceError(
                "malformed_response",
                f"{descriptor.detector_id} adapter returned HTTP {response.status_code}",
            )
        try:
            payload = response.json()
        except ValueError:
            raise ServiceError(
                "malformed_response", f"{descriptor.detector_id} adapter sent non-JSON body"
            )
        return parse_infer_response(payload, descriptor, fallback_latency_ms=elapsed_ms)


def parse_infer_response(
    payload: object, descriptor: DetectorDescriptor, fallback_latency_ms: int = 0
) -> DetectionResult:
    def bad(reason: str) -> ServiceError:
        return ServiceError(
            "malformed_response", f"{descriptor.detector_id} adapter: {reason}"
        )

    if not isinstance(payload, dict):
        raise bad("response body is not an object")
    label_raw = payload.get("label")
    if label_raw not in (Label.real.value, Label.fake.value):
        raise bad(f"label must be 'real' or 'fake', got {label_raw!r}")
    score = payload.get("score")
    if not isinstance(score, (int, float)) or isinstance(score, bool):
        raise bad("score must be a number")
    score = float(score)
    if not 0.0 <= score <= 1.0:
        raise bad(f"score {score} outside [0, 1]")
    label = Label(label_raw)
    if (label is Label.fake) != (score >= DECISION_THRESHOLD):
        raise bad(f"label {label.value!r} incoherent with score {score}")

    faces = None
    if payload.get("faces") is not None:
        if descriptor.modality.value != "image":
            raise bad("faces are only valid for image detectors")
        if not isinstance(payload["faces"], list):
            raise bad("faces must be a list")
        faces = [_parse_face(f, bad) for f in payload["faces"]]

    latency = payload.get("latency_ms", fallback_latency_ms)
    if not isinstance(latency, int) or isinstance(latency, bool) or latency < 0:
        raise bad("latency_ms must be a non-negative integer")
    return DetectionResult(label=label, score=score, faces=faces, latency_ms=latency)


def _parse_face(entry: object, bad) -> FaceRegion:
    if not isinstance(entry, dict):
        raise bad("face entry is not an object")
    bbox = entry.get("bbox")
    if (
        not isinstance(bbox, list)
        or len(bbox) != 4
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in bbox)
    ):
        raise bad("face bbox must be [x, y, w, h] integers")
    x, y, w, h = bbox
    if x < 0 or y < 0 or w < 1 or h < 1:
        raise bad("face bbox must lie in the image with positive size")
    face_score = entry.get("score")
    if (
        not isinstance(face_score, (int, float))
        or isinstance(face_score, bool)
        or not 0.0 <= float(face_score) <= 1.0
    ):
        raise bad("face score must be in [0, 1]")
    return FaceRegion(x=x, y=y, w=w, h=h, score=float(face_score))
