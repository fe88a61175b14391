"""Service configuration, loadable from environment variables or a JSON file.

Environment variables: BIND_ADDR, STORE_URL, BLOB_ROOT, TOKEN_KEY, UI_ORIGIN,
ADMIN_EMAIL, CHAT_URL, TRANSCRIBE_URL, and per-detector adapter endpoints as
ADAPTER_URL_<DETECTOR_ID> with non-alphanumeric characters in the detector id
mapped to underscores (e.g. ADAPTER_URL_PG_FDD for "pg-fdd").
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

_ADAPTER_ENV_PREFIX = "ADAPTER_URL_"

# Default two-stage prompt for the hybrid audio pipeline; the transcript is
# embedded verbatim.
HYBRID_PROMPT_TEMPLATE = (
    "Transcript: {transcript}\n"
    "User question: {prompt}\n"
    "Describe the speaker characteristics, tone, and semantic consistency "
    "of this audio."
)

EMPTY_TRANSCRIPT_MARKER = "[no speech detected]"


class ConfigError(Exception):
    pass


def _env_key(detector_id: str) -> str:
    return _ADAPTER_ENV_PREFIX + re.sub(r"[^A-Za-z0-9]", "_", detector_id).upper()


@dataclass
class AppConfig:
    bind_addr: str = "127.0.0.1:8000"
    store_url: str = "sqlite:///./fakefinder.db"
    blob_root: str = "./blobs"
    token_key: str = ""
    token_ttl_hours: int = 24
    ui_origin: str = "http://localhost:5173"
    admin_email: str = ""
    chat_url: str = ""
    transcribe_url: str = ""
    adapter_urls: dict[str, str] = field(default_factory=dict)
    adapter_timeout_s: float = 30.0
    image_size_limit: int = 10 * 1024 * 1024
    audio_size_limit: int = 20 * 1024 * 1024
    password_hash_iterations: int = 600_000
    feedback_salt: str = ""
    chat_history_cap: int = 20
    hybrid_prompt_template: str = HYBRID_PROMPT_TEMPLATE

    def adapter_url(self, detector_id: str) -> str | None:
        return self.adapter_urls.get(detector_id)

    def require_token_key(self) -> None:
        if not self.token_key:
            raise ConfigError("TOKEN_KEY is required and missing from configuration")

    @property
    def effective_feedback_salt(self) -> str:
        return self.feedback_salt or self.token_key

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None, known_detector_ids: list[str] | None = None) -> "AppConfig":
        env = dict(os.environ if env is None else env)
        cfg = cls()
        simple = {
            "BIND_ADDR": "bind_addr",
            "STORE_URL": "store_url",
            "BLOB_ROOT": "blob_root",
            "TOKEN_KEY": "token_key",
            "UI_ORIGIN": "ui_origin",
            "ADMIN_EMAIL": "admin_email",
            "CHAT_URL": "chat_url",
            "TRANSCRIBE_URL": "transcribe_url",
            "FEEDBACK_SALT": "feedback_salt",
        }
        for var, attr in simple.items():
            if env.get(var):
                setattr(cfg, attr, env[var])
        if env.get("TOKEN_TTL_HOURS"):
            cfg.token_ttl_hours = int(env["TOKEN_TTL_HOURS"])
        if env.get("ADAPTER_TIMEOUT_S"):
            cfg.adapter_timeout_s = float(env["ADAPTER_TIMEOUT_S"])
        if env.get("PASSWORD_HASH_ITERATIONS"):
            cfg.password_hash_iterations = int(env["PASSWORD_HASH_ITERATIONS"])

        if known_detector_ids:
            for det_id in known_detector_ids:
                url = env.get(_env_key(det_id))
                if url:
                    cfg.adapter_urls[det_id] = url
        else:
            # Without a registry to match against, keep the raw env key suffix.
            for var, value in env.items():
                if var.startswith(_ADAPTER_ENV_PREFIX) and value:
                    cfg.adapter_urls[var[len(_ADAPTER_ENV_PREFIX):].lower().replace("_", "-")] = value
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "AppConfig":
        data = json.loads(Path(path).read_text())
        unknown = set(data) - {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def resolve_adapter_urls(self, detector_ids: list[str], env: dict[str, str] | None = None) -> None:
        """Re-match ADAPTER_URL_* environment entries against real detector ids."""
        env = dict(os.environ if env is None else env)
        for det_id in detector_ids:
            url = env.get(_env_key(det_id))
            if url:
                self.adapter_urls[det_id] = url

    @property
    def host(self) -> str:
        return self.bind_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_addr.rsplit(":", 1)[1])
