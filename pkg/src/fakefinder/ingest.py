"""Upload validation, magic-byte sniffing, content-addressed storage, decode.

Format is always decided by file signature, never by extension. Accepted
formats: png, jpeg, avif (image) and wav, mp3 (audio). Native decoding
covers PNG/JPEG and 16-bit PCM WAV; AVIF and MP3 are stored and forwarded
to remote adapters as raw bytes but raise undecodable_format for the native
detectors.
"""

from __future__ import annotations

import hashlib
import io
import logging
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image
from sqlalchemy.exc import IntegrityError

from .config import AppConfig
from .errors import ServiceError
from .persistence import Database
from .util import new_id, utc_now_iso

logger = logging.getLogger(__name__)

# BT.601 luma weights.
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114

PCM_FORMAT_TAG = 1


class Modality(str, Enum):
    image = "image"
    audio = "audio"


class MediaFormat(str, Enum):
    png = "png"
    jpeg = "jpeg"
    avif = "avif"
    wav = "wav"
    mp3 = "mp3"


MODALITY_BY_FORMAT = {
    MediaFormat.png: Modality.image,
    MediaFormat.jpeg: Modality.image,
    MediaFormat.avif: Modality.image,
    MediaFormat.wav: Modality.audio,
    MediaFormat.mp3: Modality.audio,
}

NATIVE_DECODABLE = {MediaFormat.png, MediaFormat.jpeg, MediaFormat.wav}

_PNG_SIGNATURE = bytes([0x89, 0x50, 0x4E, 0x47, 0x0D, 0x0A, 0x1A, 0x0A])


@dataclass(frozen=True)
class MediaUpload:
    upload_id: str
    user_id: str
    filename: str
    modality: Modality
    format: MediaFormat
    byte_size: int
    content_hash: str
    storage_ref: str
    consent: bool
    uploaded_at: str


@dataclass(frozen=True)
class DecodedImage:
    width: int
    height: int
    luma: np.ndarray  # (height, width) float64 in [0, 1]


@dataclass(frozen=True)
class DecodedAudio:
    sample_rate: int
    samples: np.ndarray  # mono float64 in [-1, 1]


def sniff_format(data: bytes) -> MediaFormat:
    """Identify one of the five accepted formats from magic bytes."""
    if not data:
        raise ServiceError("unsupported_format", "empty file")
    if data[:8] == _PNG_SIGNATURE:
        return MediaFormat.png
    if data[:3] == b"\xff\xd8\xff":
        return MediaFormat.jpeg
    if len(data) >= 12 and data[4:12] == b"ftypavif":
        return MediaFormat.avif
    if len(data) >= 12 and data[:4] == b"RIFF" and data[8:12] == b"WAVE":
        return MediaFormat.wav
    if data[:3] == b"ID3":
        return MediaFormat.mp3
    if len(data) >= 2 and data[0] == 0xFF and (data[1] & 0xE0) == 0xE0:
        return MediaFormat.mp3
    raise ServiceError("unsupported_format", "file signature matches no accepted format")


class BlobStore:
    """Content-addressed blob files: <root>/<hash[:2]>/<hash>."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def put(self, data: bytes) -> str:
        content_hash = hashlib.sha256(data).hexdigest()
        rel = f"{content_hash[:2]}/{content_hash}"
        path = self.root / rel
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp-{new_id()[:8]}")
            tmp.write_bytes(data)
            tmp.replace(path)  # identical content, benign race
        return rel

    def get(self, storage_ref: str) -> bytes:
        return (self.root / storage_ref).read_bytes()


class IngestService:
    def __init__(self, db: Database, blobs: BlobStore, config: AppConfig):
        self.db = db
        self.blobs = blobs
        self.config = config

    def ingest(self, user_id: str, filename: str, data: bytes, consent: bool) -> MediaUpload:
        if not consent:
            raise ServiceError(
                "consent_required", "explicit permission is required before storing media"
            )
        fmt = sniff_format(data)
        modality = MODALITY_BY_FORMAT[fmt]
        limit = (
            self.config.image_size_limit
            if modality is Modality.image
            else self.config.audio_size_limit
        )
        if len(data) > limit:
            raise ServiceError(
                "too_large", f"{modality.value} uploads are limited to {limit} bytes"
            )
        content_hash = hashlib.sha256(data).hexdigest()

        existing = self._find(user_id, content_hash)
        if existing is not None:
            return existing

        storage_ref = self.blobs.put(data)
        upload = MediaUpload(
            upload_id=new_id(),
            user_id=user_id,
            filename=filename,
            modality=modality,
            format=fmt,
            byte_size=len(data),
            content_hash=content_hash,
            storage_ref=storage_ref,
            consent=True,
            uploaded_at=utc_now_iso(),
        )
        try:
            self.db.execute(
                "INSERT INTO uploads (upload_id, user_id, filename, modality, format,"
                " byte_size, content_hash, storage_ref, consent, uploaded_at)"
                " VALUES (:upload_id, :user_id, :filename, :modality, :format,"
                " :byte_size, :content_hash, :storage_ref, 1, :uploaded_at)",
                {
                    "upload_id": upload.upload_id,
                    "user_id": user_id,
                    "filename": filename,
                    "modality": modality.value,
                    "format": fmt.value,
                    "byte_size": len(data),
                    "content_hash": content_hash,
                    "storage_ref": storage_ref,
                    "uploaded_at": upload.uploaded_at,
                },
            )
        except IntegrityError:
            # Concurrent duplicate upload; identical bytes, return the winner.
            existing = self._find(user_id, content_hash)
            assert existing is not None
            return existing
        return upload

    def get_upload(self, upload_id: str) -> MediaUpload | None:
        row = self.db.query_one(
            "SELECT * FROM uploads WHERE upload_id = :u", {"u": upload_id}
        )
        return self._from_row(row) if row else None

    def read_bytes(self, upload: MediaUpload) -> bytes:
        return self.blobs.get(upload.storage_ref)

    def decode_image(self, upload: MediaUpload) -> DecodedImage:
        if upload.modality is not Modality.image:
            raise ServiceError("undecodable_format", "upload is not an image")
        return decode_image_bytes(self.read_bytes(upload), upload.format)

    def decode_audio(self, upload: MediaUpload) -> DecodedAudio:
        if upload.modality is not Modality.audio:
            raise ServiceError("undecodable_format", "upload is not audio")
        return decode_audio_bytes(self.read_bytes(upload), upload.format)

    def _find(self, user_id: str, content_hash: str) -> MediaUpload | None:
        row = self.db.query_one(
            "SELECT * FROM uploads WHERE user_id = :u AND content_hash = :h",
            {"u": user_id, "h": content_hash},
        )
        return self._from_row(row) if row else None

    @staticmethod
    def _from_row(row: dict) -> MediaUpload:
        return MediaUpload(
            upload_id=row["upload_id"],
            user_id=row["user_id"],
            filename=row["filename"],
            modality=Modality(row["modality"]),
            format=MediaFormat(row["format"]),
            byte_size=row["byte_size"],
            content_hash=row["content_hash"],
            storage_ref=row["storage_ref"],
            consent=bool(row["consent"]),
            uploaded_at=row["uploaded_at"],
        )


def decode_image_bytes(data: bytes, fmt: MediaFormat) -> DecodedImage:
    """PNG/JPEG -> BT.601 luma in [0, 1]. AVIF is not natively decodable."""
    if fmt not in (MediaFormat.png, MediaFormat.jpeg):
        raise ServiceError(
            "undecodable_format",
            f"{fmt.value} is accepted for remote adapters but has no native decoder",
        )
    try:
        with Image.open(io.BytesIO(data)) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    except Exception as exc:
        raise ServiceError("decode_failure", f"could not decode {fmt.value} data: {exc}")
    luma = LUMA_R * rgb[:, :, 0] + LUMA_G * rgb[:, :, 1] + LUMA_B * rgb[:, :, 2]
    luma = np.clip(luma, 0.0, 1.0)
    height, width = luma.shape
    if height < 1 or width < 1:
        raise ServiceError("decode_failure", "decoded image has no pixels")
    return DecodedImage(width=width, height=height, luma=luma)


def decode_audio_bytes(data: bytes, fmt: MediaFormat) -> DecodedAudio:
    """16-bit PCM WAV -> mono float64 in [-1, 1]. MP3 is not natively decodable."""
    if fmt is not MediaFormat.wav:
        raise ServiceError(
            "undecodable_format",
            f"{fmt.value} is accepted for remote adapters but has no native decoder",
        )
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ServiceError("decode_failure", "not a RIFF/WAVE stream")

    fmt_chunk: bytes | None = None
    data_chunk: bytes | None = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise ServiceError("decode_failure", "truncated WAV chunk")
        if chunk_id == b"fmt ":
            fmt_chunk = body
        elif chunk_id == b"data":
            data_chunk = body
        pos += 8 + size + (size & 1)
    if fmt_chunk is None or data_chunk is None:
        raise ServiceError("decode_failure", "WAV is missing fmt or data chunk")
    if len(fmt_chunk) < 16:
        raise ServiceError("decode_failure", "WAV fmt chunk too short")

    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt_chunk)
    if audio_format != PCM_FORMAT_TAG or bits != 16:
        raise ServiceError(
            "undecodable_format",
            f"only 16-bit PCM WAV decodes natively (format tag {audio_format}, {bits}-bit)",
        )
    if channels < 1 or sample_rate <= 0:
        raise ServiceError("decode_failure", "invalid WAV channel count or sample rate")

    frame_count = len(data_chunk) // (2 * channels)
    usable = data_chunk[: frame_count * 2 * channels]
    if frame_count == 0:
        samples = np.zeros(0, dtype=np.float64)
    else:
        interleaved = np.frombuffer(usable, dtype="<i2").astype(np.float64)
        samples = interleaved.reshape(-1, channels).mean(axis=1) / 32768.0
        samples = np.clip(samples, -1.0, 1.0)
    return DecodedAudio(sample_rate=int(sample_rate), samples=samples)
