"""Service error codes and their HTTP status mapping.

Every failure a module can raise carries a stable machine code. The gateway
maps each code to exactly one HTTP status and renders the uniform envelope
{"error": {"code": ..., "message": ...}}.
"""

from __future__ import annotations


class ServiceError(Exception):
    """Failure with a stable machine-readable code."""

    def __init__(self, code: str, message: str):
        if code not in ERROR_STATUS:
            raise ValueError(f"unregistered error code: {code}")
        super().__init__(message)
        self.code = code
        self.message = message


# code -> HTTP status. 401 auth, 402 credits, 403 ownership, 404 missing,
# 422 validation, 502 adapter failure, 504 adapter timeout.
ERROR_STATUS: dict[str, int] = {
    # accounts
    "duplicate_email": 422,
    "weak_password": 422,
    "mismatched_confirmation": 422,
    "invalid_region": 422,
    "invalid_email": 422,
    "invalid_credentials": 401,
    "invalid_token": 401,
    "expired_token": 401,
    "insufficient_credits": 402,
    "unknown_charge": 404,
    "double_refund": 422,
    "not_admin": 403,
    "invalid_amount": 422,
    "unknown_user": 404,
    # media ingest
    "unsupported_format": 422,
    "consent_required": 422,
    "too_large": 422,
    "decode_failure": 422,
    "undecodable_format": 422,
    "too_short": 422,
    # detectors / adapters
    "unknown_detector": 404,
    "adapter_unreachable": 502,
    "adapter_timeout": 504,
    "malformed_response": 502,
    # mllm workspace
    "unknown_model": 404,
    "modality_mismatch": 422,
    "foreign_upload": 403,
    "session_not_found": 404,
    "transcription_failed": 502,
    "analysis_failed": 502,
    # orchestrator
    "detector_not_runnable": 422,
    "not_found": 404,
    "forbidden": 403,
    "invalid_page": 422,
    # analytics / feedback
    "invalid_rating": 422,
    "unknown_model_reference": 422,
    "invalid_format_option": 422,
    # persistence
    "migration_conflict": 409,
    "conflict_retry_exhausted": 409,
    # gateway
    "validation_error": 422,
}
