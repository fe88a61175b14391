"""Relational store access: engine setup, numbered migrations, transactions.

One query interface over two backends: embedded SQLite for tests/dev and a
server engine (MySQL/PostgreSQL) for deployment, selected by the store URL.
Credit balances are always derived from the CREDITS ledger rows, never cached.

SQLite specifics: WAL journal and a generous busy timeout, with pysqlite's
implicit transaction handling disabled so transactions start exactly where we
begin them. Write paths are designed to either be a single atomic statement
or to write as their first statement, which avoids read-to-write lock
upgrades under concurrency.
"""

from __future__ import annotations

import logging
import re
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, TypeVar

from sqlalchemy import create_engine, event, text
from sqlalchemy.engine import Connection, Engine
from sqlalchemy.exc import OperationalError
from sqlalchemy.pool import StaticPool

from ..errors import ServiceError
from ..util import utc_now_iso

logger = logging.getLogger(__name__)

MIGRATIONS_DIR = Path(__file__).parent / "migrations"

_RETRYABLE_MARKERS = (
    "database is locked",
    "database table is locked",
    "deadlock",
    "lock wait timeout",
)

T = TypeVar("T")


def _is_retryable(exc: OperationalError) -> bool:
    msg = str(exc.orig or exc).lower()
    return any(marker in msg for marker in _RETRYABLE_MARKERS)


class Database:
    """Engine wrapper with retrying single-statement and transactional APIs."""

    def __init__(self, store_url: str):
        self.store_url = store_url
        kwargs: dict[str, Any] = {"future": True}
        if store_url.startswith("sqlite"):
            kwargs["connect_args"] = {"check_same_thread": False, "timeout": 30}
            if ":memory:" in store_url:
                kwargs["poolclass"] = StaticPool
        self.engine: Engine = create_engine(store_url, **kwargs)
        if self.engine.dialect.name == "sqlite":
            self._configure_sqlite(self.engine)

    @staticmethod
    def _configure_sqlite(engine: Engine) -> None:
        @event.listens_for(engine, "connect")
        def _on_connect(dbapi_conn, _record):
            # Take over transaction control from pysqlite.
            dbapi_conn.isolation_level = None
            cur = dbapi_conn.cursor()
            cur.execute("PRAGMA journal_mode=WAL")
            cur.execute("PRAGMA busy_timeout=30000")
            cur.execute("PRAGMA foreign_keys=ON")
            cur.execute("PRAGMA synchronous=NORMAL")
            cur.close()

        @event.listens_for(engine, "begin")
        def _on_begin(conn):
            conn.exec_driver_sql("BEGIN")

    # -- single statements ------------------------------------------------

    def execute(self, sql: str, params: dict | None = None, retries: int = 5) -> int:
        """Run one write statement in its own transaction; returns rowcount."""
        def op(conn: Connection) -> int:
            return conn.execute(text(sql), params or {}).rowcount

        return self.run_in_transaction(op, retries=retries)

    def query(self, sql: str, params: dict | None = None) -> list[dict]:
        with self.engine.connect() as conn:
            rows = conn.execute(text(sql), params or {}).mappings().all()
            return [dict(r) for r in rows]

    def query_one(self, sql: str, params: dict | None = None) -> dict | None:
        rows = self.query(sql, params)
        return rows[0] if rows else None

    def scalar(self, sql: str, params: dict | None = None) -> Any:
        with self.engine.connect() as conn:
            return conn.execute(text(sql), params or {}).scalar()

    # -- transactions ------------------------------------------------------

    @contextmanager
    def transaction(self) -> Iterator[Connection]:
        """All-or-nothing block; caller handles retry if needed."""
        with self.engine.begin() as conn:
            yield conn

    def run_in_transaction(self, fn: Callable[[Connection], T], retries: int = 5) -> T:
        """Run fn inside a transaction, retrying on lock contention."""
        last: OperationalError | None = None
        for attempt in range(retries):
            try:
                with self.engine.begin() as conn:
                    return fn(conn)
            except OperationalError as exc:
                if not _is_retryable(exc):
                    raise
                last = exc
                time.sleep(0.05 * (attempt + 1))
        raise ServiceError(
            "conflict_retry_exhausted",
            f"transaction kept conflicting after {retries} attempts: {last}",
        )

    # -- migrations ---------------------------------------------------------

    def migrate(self) -> int:
        """Apply pending numbered migrations; idempotent. Returns the version."""
        known = discover_migrations()
        if not known:
            raise RuntimeError("no migration files found")
        target = max(num for num, _, _ in known)

        last_error: Exception | None = None
        for attempt in range(5):
            try:
                return self._apply_migrations(known, target)
            except ServiceError:
                raise
            except OperationalError as exc:
                # Concurrent migrator from another worker; re-check and retry.
                last_error = exc
                time.sleep(0.1 * (attempt + 1))
        raise RuntimeError(f"migration failed after retries: {last_error}")

    def _apply_migrations(self, known: list[tuple[int, str, Path]], target: int) -> int:
        with self.engine.begin() as conn:
            conn.exec_driver_sql(
                "CREATE TABLE IF NOT EXISTS schema_migrations ("
                " version INTEGER PRIMARY KEY,"
                " name VARCHAR(200) NOT NULL,"
                " applied_at VARCHAR(32) NOT NULL)"
            )
        with self.engine.begin() as conn:
            current = conn.execute(
                text("SELECT COALESCE(MAX(version), 0) FROM schema_migrations")
            ).scalar()
            assert current is not None
            if current > target:
                raise ServiceError(
                    "migration_conflict",
                    f"store is at schema version {current}, newer than this "
                    f"build's latest migration {target}",
                )
            for num, name, path in known:
                if num <= current:
                    continue
                logger.info("applying migration %04d_%s", num, name)
                for stmt in split_sql_statements(path.read_text()):
                    conn.exec_driver_sql(stmt)
                conn.execute(
                    text(
                        "INSERT INTO schema_migrations (version, name, applied_at)"
                        " VALUES (:v, :n, :t)"
                    ),
                    {"v": num, "n": name, "t": utc_now_iso()},
                )
        return target

    def close(self) -> None:
        self.engine.dispose()


def discover_migrations(directory: Path = MIGRATIONS_DIR) -> list[tuple[int, str, Path]]:
    """Numbered .sql files as (number, name, path), sorted by number."""
    found = []
    for path in sorted(directory.glob("*.sql")):
        m = re.match(r"^(\d{4})_(.+)\.sql$", path.name)
        if not m:
            continue
        found.append((int(m.group(1)), m.group(2), path))
    return found


def split_sql_statements(script: str) -> list[str]:
    """Split a migration script on statement-terminating semicolons."""
    without_comments = "\n".join(
        line for line in script.splitlines() if not line.strip().startswith("--")
    )
    return [stmt.strip() for stmt in without_comments.split(";") if stmt.strip()]
