"""Shared helpers: UTC timestamps and opaque identifiers."""

from __future__ import annotations

import uuid
from datetime import datetime, timezone


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def utc_now_iso() -> str:
    """Fixed-width ISO-8601 UTC timestamp, lexicographically sortable."""
    return utc_now().strftime("%Y-%m-%dT%H:%M:%S.%f+00:00")


def to_iso(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f+00:00")


def new_id() -> str:
    return str(uuid.uuid4())
