"""Conversational analysis sessions against remote multimodal models.

Assistant replies are semantic descriptions only: the turn type has no label
or score member, so no authenticity verdict can exist here by construction.
Audio sessions run a two-stage hybrid pipeline: transcription first, then
text analysis of a composed prompt embedding the transcript verbatim.

Each message costs one credit, charged before dispatch and refunded on any
adapter failure. Turns are persisted only when the adapter call succeeds, so
a session always alternates user/assistant starting with user.
"""

from __future__ import annotations

import base64
import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass

import httpx
from sqlalchemy import text

from .accounts import AccountService
from .config import EMPTY_TRANSCRIPT_MARKER, AppConfig
from .detectors.registry import AdapterKind, DetectorRegistry, HYBRID_AUDIO_MODEL_ID
from .errors import ServiceError
from .ingest import IngestService
from .persistence import Database
from .util import new_id, utc_now_iso

logger = logging.getLogger(__name__)

CHAT_PATH = "/v1/chat"
TRANSCRIBE_PATH = "/v1/transcribe"

ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"

_APPEND_TURN_SQL = text(
    """
    INSERT INTO mllm_turns (turn_id, session_id, seq, role, text, created_at)
    SELECT :turn_id, :session_id,
           COALESCE((SELECT MAX(seq) FROM mllm_turns
                     WHERE session_id = :session_id), 0) + 1,
           :role, :text, :created_at
    """
)


@dataclass(frozen=True)
class Turn:
    turn_id: str
    session_id: str
    seq: int
    role: str
    text: str
    created_at: str

    def to_wire(self) -> dict:
        return {"role": self.role, "text": self.text, "timestamp": self.created_at}


@dataclass(frozen=True)
class MllmSession:
    session_id: str
    user_id: str
    model_id: str
    upload_id: str | None
    transcript: str | None
    created_at: str
    turns: list[Turn]


class ChatAdapterClient:
    """Client for the chat and transcription wire protocols."""

    def __init__(self, chat_url: str, transcribe_url: str, timeout_s: float = 30.0):
        self.chat_url = chat_url
        self.transcribe_url = transcribe_url
        self.timeout_s = timeout_s

    def chat(self, model: str, messages: list[dict], attachment: dict | None = None) -> str:
        if not self.chat_url:
            raise ServiceError("adapter_unreachable", "no chat adapter endpoint configured")
        body: dict = {"model": model, "messages": messages}
        if attachment is not None:
            body["attachment"] = attachment
        payload = self._post(self.chat_url.rstrip("/") + CHAT_PATH, body)
        reply = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(reply, str) or not reply:
            raise ServiceError("malformed_response", "chat adapter must return a non-empty text field")
        return reply

    def transcribe(self, fmt: str, media_b64: str) -> str:
        if not self.transcribe_url:
            raise ServiceError("adapter_unreachable", "no transcription endpoint configured")
        payload = self._post(
            self.transcribe_url.rstrip("/") + TRANSCRIBE_PATH,
            {"format": fmt, "media_b64": media_b64},
        )
        transcript = payload.get("transcript") if isinstance(payload, dict) else None
        if not isinstance(transcript, str):
            raise ServiceError("malformed_response", "transcription adapter must return a transcript field")
        return transcript

    def _post(self, url: str, body: dict) -> object:
        try:
            response = httpx.post(url, json=body, timeout=self.timeout_s)
        except httpx.TimeoutException:
            raise ServiceError("adapter_timeout", f"adapter exceeded {self.timeout_s}s")
        except httpx.TransportError as exc:
            raise ServiceError("adapter_unreachable", f"adapter: {exc}")
        if response.status_code != 200:
            raise ServiceError(
                "malformed_response", f"adapter returned HTTP {response.status_code}"
            )
        try:
            return response.json()
        except ValueError:
            raise ServiceError("malformed_response", "adapter sent non-JSON body")


class MllmWorkspace:
    def __init__(
        self,
        db: Database,
        accounts: AccountService,
        ingest: IngestService,
        registry: DetectorRegistry,
        chat_client: ChatAdapterClient,
        config: AppConfig,
    ):
        self.db = db
        self.accounts = accounts
        self.ingest = ingest
        self.registry = registry
        self.chat_client = chat_client
        self.config = config
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- sessions -----------------------------------------------------------

    def create_session(
        self, user_id: str, model_id: str, upload_id: str | None = None
    ) -> MllmSession:
        if model_id not in self.registry or (
            self.registry.get(model_id).adapter_kind is not AdapterKind.mllm_chat
        ):
            raise ServiceError("unknown_model", f"{model_id!r} is not a registered chat model")
        descriptor = self.registry.get(model_id)
        if upload_id is not None:
            upload = self.ingest.get_upload(upload_id)
            if upload is None:
                raise ServiceError("not_found", f"no upload {upload_id}")
            if upload.user_id != user_id:
                raise ServiceError("foreign_upload", "attachment belongs to another account")
            if upload.modality is not descriptor.modality:
                raise ServiceError(
                    "modality_mismatch",
                    f"{model_id} accepts {descriptor.modality.value} attachments only",
                )
        session = MllmSession(
            session_id=new_id(),
            user_id=user_id,
            model_id=model_id,
            upload_id=upload_id,
            transcript=None,
            created_at=utc_now_iso(),
            turns=[],
        )
        self.db.execute(
            "INSERT INTO mllm_sessions (session_id, user_id, model_id, upload_id,"
            " transcript, created_at)"
            " VALUES (:sid, :uid, :mid, :up, NULL, :now)",
            {"sid": session.session_id, "uid": user_id, "mid": model_id,
             "up": upload_id, "now": session.created_at},
        )
        return session

    def get_session(self, user_id: str, session_id: str) -> MllmSession:
        row = self.db.query_one(
            "SELECT * FROM mllm_sessions WHERE session_id = :s", {"s": session_id}
        )
        if row is None or row["user_id"] != user_id:
            raise ServiceError("session_not_found", f"no session {session_id}")
        turns = [
            Turn(r["turn_id"], r["session_id"], r["seq"], r["role"], r["text"], r["created_at"])
            for r in self.db.query(
                "SELECT * FROM mllm_turns WHERE session_id = :s ORDER BY seq",
                {"s": session_id},
            )
        ]
        return MllmSession(
            session_id=row["session_id"],
            user_id=row["user_id"],
            model_id=row["model_id"],
            upload_id=row["upload_id"],
            transcript=row["transcript"],
            created_at=row["created_at"],
            turns=turns,
        )

    # -- messaging ------------------------------------------------------------

    def send_message(self, user_id: str, session_id: str, prompt: str) -> MllmSession:
        """Run one exchange; returns the refreshed session (last turn = reply)."""
        if not prompt or not prompt.strip():
            raise ServiceError("validation_error", "prompt must be non-empty")
        with self._session_lock(session_id):
            session = self.get_session(user_id, session_id)
            if session.model_id == HYBRID_AUDIO_MODEL_ID:
                self._run_hybrid(session, prompt)
            else:
                self._run_chat(session, prompt)
        return self.get_session(user_id, session_id)

    def _run_chat(self, session: MllmSession, prompt: str) -> None:
        attachment = self._attachment_payload(session)
        messages = [{"role": t.role, "text": t.text} for t in session.turns]
        messages.append({"role": ROLE_USER, "text": prompt})
        messages = messages[-self.config.chat_history_cap:]

        charge = self.accounts.charge_credit(session.user_id, ref=session.session_id)
        try:
            reply = self.chat_client.chat(session.model_id, messages, attachment)
        except ServiceError:
            self.accounts.refund_credit(session.user_id, charge.entry_id)
            raise
        self._append_exchange(session.session_id, prompt, reply)

    def _run_hybrid(self, session: MllmSession, prompt: str) -> None:
        if session.upload_id is None:
            raise ServiceError(
                "modality_mismatch", "the hybrid audio pipeline requires an audio attachment"
            )
        upload = self.ingest.get_upload(session.upload_id)
        assert upload is not None
        media_b64 = base64.b64encode(self.ingest.read_bytes(upload)).decode("ascii")

        charge = self.accounts.charge_credit(session.user_id, ref=session.session_id)
        try:
            transcript = self.chat_client.transcribe(upload.format.value, media_b64)
        except ServiceError as exc:
            self.accounts.refund_credit(session.user_id, charge.entry_id)
            raise ServiceError("transcription_failed", f"speech transcription failed: {exc.message}")

        composed = self.config.hybrid_prompt_template.format(
            transcript=transcript if transcript.strip() else EMPTY_TRANSCRIPT_MARKER,
            prompt=prompt,
        )
        messages = [{"role": t.role, "text": t.text} for t in session.turns]
        messages.append({"role": ROLE_USER, "text": composed})
        messages = messages[-self.config.chat_history_cap:]
        try:
            reply = self.chat_client.chat(session.model_id, messages, None)
        except ServiceError as exc:
            self.accounts.refund_credit(session.user_id, charge.entry_id)
            raise ServiceError("analysis_failed", f"transcript analysis failed: {exc.message}")
        self._append_exchange(session.session_id, prompt, reply, transcript=transcript)

    # -- internals --------------------------------------------------------------

    def _attachment_payload(self, session: MllmSession) -> dict | None:
        if session.upload_id is None:
            return None
        upload = self.ingest.get_upload(session.upload_id)
        assert upload is not None
        return {
            "modality": upload.modality.value,
            "format": upload.format.value,
            "media_b64": base64.b64encode(self.ingest.read_bytes(upload)).decode("ascii"),
        }

    def _append_exchange(
        self, session_id: str, prompt: str, reply: str, transcript: str | None = None
    ) -> None:
        now = utc_now_iso()

        def op(conn):
            conn.execute(
                _APPEND_TURN_SQL,
                {"turn_id": new_id(), "session_id": session_id, "role": ROLE_USER,
                 "text": prompt, "created_at": now},
            )
            conn.execute(
                _APPEND_TURN_SQL,
                {"turn_id": new_id(), "session_id": session_id, "role": ROLE_ASSISTANT,
                 "text": reply, "created_at": now},
            )
            if transcript is not None:
                conn.execute(
                    text("UPDATE mllm_sessions SET transcript = :t WHERE session_id = :s"),
                    {"t": transcript, "s": session_id},
                )

        self.db.run_in_transaction(op)

    @contextmanager
    def _session_lock(self, session_id: str):
        with self._locks_guard:
            lock = self._locks.setdefault(session_id, threading.Lock())
        with lock:
            yield
