"""Password hashing and signed session tokens.

Passwords use PBKDF2-HMAC-SHA256 with a random per-hash salt, encoded as
"pbkdf2_sha256$<iterations>$<salt_hex>$<digest_hex>". Session tokens are
RFC 7519 compact JWTs, HS256, claims {sub, iat, exp}.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
import os
from datetime import datetime, timedelta, timezone

from .errors import ServiceError
from .util import utc_now

DEFAULT_ITERATIONS = 600_000
_SALT_BYTES = 16

_JWT_HEADER = {"alg": "HS256", "typ": "JWT"}


def hash_password(password: str, iterations: int = DEFAULT_ITERATIONS) -> str:
    salt = os.urandom(_SALT_BYTES)
    digest = hashlib.pbkdf2_hmac("sha256", password.encode("utf-8"), salt, iterations)
    return f"pbkdf2_sha256${iterations}${salt.hex()}${digest.hex()}"


def verify_password(password: str, encoded: str) -> bool:
    try:
        scheme, iterations, salt_hex, digest_hex = encoded.split("$")
        if scheme != "pbkdf2_sha256":
            return False
        candidate = hashlib.pbkdf2_hmac(
            "sha256", password.encode("utf-8"), bytes.fromhex(salt_hex), int(iterations)
        )
        return hmac.compare_digest(candidate, bytes.fromhex(digest_hex))
    except (ValueError, TypeError):
        return False


def _b64url(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def _b64url_decode(segment: str) -> bytes:
    padding = "=" * (-len(segment) % 4)
    return base64.urlsafe_b64decode(segment + padding)


def _sign(key: str, signing_input: bytes) -> bytes:
    return hmac.new(key.encode("utf-8"), signing_input, hashlib.sha256).digest()


def issue_token(
    key: str,
    subject: str,
    ttl: timedelta = timedelta(hours=24),
    now: datetime | None = None,
) -> tuple[str, int]:
    """Returns (compact token, exp epoch seconds)."""
    issued = now or utc_now()
    iat = int(issued.timestamp())
    exp = int((issued + ttl).timestamp())
    header = _b64url(json.dumps(_JWT_HEADER, separators=(",", ":")).encode())
    payload = _b64url(
        json.dumps({"sub": subject, "iat": iat, "exp": exp}, separators=(",", ":")).encode()
    )
    signing_input = f"{header}.{payload}".encode("ascii")
    signature = _b64url(_sign(key, signing_input))
    return f"{header}.{payload}.{signature}", exp


def verify_token(key: str, token: str, now: datetime | None = None) -> str:
    """Returns the subject claim; raises invalid_token or expired_token."""
    try:
        header_b64, payload_b64, signature_b64 = token.split(".")
        signing_input = f"{header_b64}.{payload_b64}".encode("ascii")
        expected = _sign(key, signing_input)
        actual = _b64url_decode(signature_b64)
    except (ValueError, UnicodeEncodeError):
        raise ServiceError("invalid_token", "malformed token")
    if not hmac.compare_digest(expected, actual):
        raise ServiceError("invalid_token", "token signature mismatch")
    try:
        claims = json.loads(_b64url_decode(payload_b64))
        subject = claims["sub"]
        exp = int(claims["exp"])
    except (ValueError, KeyError, TypeError):
        raise ServiceError("invalid_token", "malformed token claims")
    moment = now or utc_now()
    if moment.timestamp() >= exp:
        raise ServiceError("expired_token", "token has expired")
    if not isinstance(subject, str) or not subject:
        raise ServiceError("invalid_token", "missing subject claim")
    return subject


def anonymize_user_id(salt: str, user_id: str) -> str:
    """Salted one-way token for feedback rows; not invertible without the salt."""
    return hashlib.sha256((salt + "\x00" + user_id).encode("utf-8")).hexdigest()


def utc_from_timestamp(epoch: int) -> datetime:
    return datetime.fromtimestamp(epoch, tz=timezone.utc)
