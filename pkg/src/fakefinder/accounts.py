"""User accounts, authentication, and the append-only credit ledger.

Every account starts with 20 credits. Balances are derived by summing ledger
deltas; a charge is committed by a single INSERT..SELECT whose WHERE clause
re-checks the balance, so check-and-append is one indivisible statement
against the shared store.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

from sqlalchemy import text
from sqlalchemy.exc import IntegrityError

from .config import AppConfig
from .errors import ServiceError
from .persistence import Database
from .regions import is_valid_region
from .security import hash_password, issue_token, verify_password, verify_token
from .util import new_id, utc_now_iso

logger = logging.getLogger(__name__)

INITIAL_CREDITS = 20
INFERENCE_COST = 1
MIN_PASSWORD_LENGTH = 8

EMAIL_RE = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")


class CreditReason(str, Enum):
    initial_grant = "initial_grant"
    inference_charge = "inference_charge"
    inference_refund = "inference_refund"
    admin_grant = "admin_grant"


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    name: str
    email: str
    position: str
    region: str
    password_hash: str
    created_at: str


@dataclass(frozen=True)
class CreditEntry:
    entry_id: str
    user_id: str
    seq: int
    delta: int
    reason: CreditReason
    ref: str | None
    note: str | None
    created_at: str


# Single atomic check-and-append: the WHERE clause rejects any entry that
# would drive the balance negative, and seq comes from the same statement.
_APPEND_ENTRY_SQL = """
INSERT INTO credits (entry_id, user_id, seq, delta, reason, ref, note, created_at)
SELECT :entry_id, :user_id,
       COALESCE((SELECT MAX(seq) FROM credits WHERE user_id = :user_id), 0) + 1,
       :delta, :reason, :ref, :note, :created_at
WHERE (SELECT COALESCE(SUM(delta), 0) FROM credits WHERE user_id = :user_id)
      + :delta >= 0
"""

_APPEND_REFUND_SQL = """
INSERT INTO credits (entry_id, user_id, seq, delta, reason, ref, note, created_at)
SELECT :entry_id, :user_id,
       COALESCE((SELECT MAX(seq) FROM credits WHERE user_id = :user_id), 0) + 1,
       1, 'inference_refund', :charge_ref, NULL, :created_at
WHERE EXISTS (
        SELECT 1 FROM credits
        WHERE entry_id = :charge_ref AND user_id = :user_id
          AND reason = 'inference_charge')
  AND NOT EXISTS (
        SELECT 1 FROM credits
        WHERE reason = 'inference_refund' AND ref = :charge_ref)
"""


def validate_password(password: str) -> None:
    if (
        len(password) < MIN_PASSWORD_LENGTH
        or not any(c.isalpha() for c in password)
        or not any(c.isdigit() for c in password)
    ):
        raise ServiceError(
            "weak_password",
            "password must be at least 8 characters with at least one letter and one digit",
        )


class AccountService:
    def __init__(self, db: Database, config: AppConfig):
        self.db = db
        self.config = config
        # Constant-cost login path for unknown emails.
        self._dummy_hash = hash_password("invalid-dummy-1", config.password_hash_iterations)

    # -- registration and login -------------------------------------------

    def register(
        self,
        name: str,
        email: str,
        position: str,
        region: str,
        password: str,
        password_confirm: str,
    ) -> UserAccount:
        if not name.strip():
            raise ServiceError("validation_error", "name must be non-empty")
        if password != password_confirm:
            raise ServiceError("mismatched_confirmation", "password confirmation does not match")
        validate_password(password)
        email = email.strip().lower()
        if not EMAIL_RE.match(email):
            raise ServiceError("invalid_email", "email address is not syntactically valid")
        if not is_valid_region(region):
            raise ServiceError("invalid_region", f"{region!r} is not an ISO 3166-1 alpha-2 code")

        user_id = new_id()
        now = utc_now_iso()
        password_hash = hash_password(password, self.config.password_hash_iterations)

        def op(conn):
            conn.execute(
                text(
                    "INSERT INTO users (user_id, name, email, position, region,"
                    " password_hash, created_at)"
                    " VALUES (:user_id, :name, :email, :position, :region, :hash, :now)"
                ),
                {
                    "user_id": user_id,
                    "name": name,
                    "email": email,
                    "position": position,
                    "region": region,
                    "hash": password_hash,
                    "now": now,
                },
            )
            conn.execute(
                text(
                    "INSERT INTO credits (entry_id, user_id, seq, delta, reason, ref,"
                    " note, created_at)"
                    " VALUES (:entry_id, :user_id, 1, :delta, 'initial_grant', NULL,"
                    " NULL, :now)"
                ),
                {"entry_id": new_id(), "user_id": user_id, "delta": INITIAL_CREDITS, "now": now},
            )

        try:
            self.db.run_in_transaction(op)
        except IntegrityError:
            raise ServiceError("duplicate_email", "an account with this email already exists")
        logger.info("registered user %s (%s)", user_id, region)
        return UserAccount(user_id, name, email, position, region, password_hash, now)

    def login(self, email: str, password: str, now: datetime | None = None) -> tuple[str, int]:
        """Returns (token, exp epoch seconds)."""
        row = self.db.query_one(
            "SELECT * FROM users WHERE email = :email", {"email": email.strip().lower()}
        )
        if row is None:
            # Same cost and same error as a wrong password.
            verify_password(password, self._dummy_hash)
            raise ServiceError("invalid_credentials", "invalid email or password")
        if not verify_password(password, row["password_hash"]):
            raise ServiceError("invalid_credentials", "invalid email or password")
        return issue_token(
            self.config.token_key,
            row["user_id"],
            ttl=timedelta(hours=self.config.token_ttl_hours),
            now=now,
        )

    def authenticate(self, token: str, now: datetime | None = None) -> str:
        """Token -> user_id. Pure signature/expiry check, no store access."""
        return verify_token(self.config.token_key, token, now=now)

    # -- account lookups -----------------------------------------------------

    def get_user(self, user_id: str) -> UserAccount:
        row = self.db.query_one("SELECT * FROM users WHERE user_id = :u", {"u": user_id})
        if row is None:
            raise ServiceError("unknown_user", f"no account {user_id}")
        return UserAccount(
            row["user_id"], row["name"], row["email"], row["position"],
            row["region"], row["password_hash"], row["created_at"],
        )

    def is_admin(self, user_id: str) -> bool:
        admin_email = self.config.admin_email.strip().lower()
        if not admin_email:
            return False
        try:
            return self.get_user(user_id).email == admin_email
        except ServiceError:
            return False

    # -- credit ledger ------------------------------------------------------

    def charge_credit(self, user_id: str, ref: str | None = None) -> CreditEntry:
        self.get_user(user_id)
        entry_id = new_id()
        inserted = self.db.execute(
            _APPEND_ENTRY_SQL,
            {
                "entry_id": entry_id,
                "user_id": user_id,
                "delta": -INFERENCE_COST,
                "reason": CreditReason.inference_charge.value,
                "ref": ref,
                "note": None,
                "created_at": utc_now_iso(),
            },
        )
        if inserted == 0:
            raise ServiceError("insufficient_credits", "credit balance is zero; request more credits")
        return self._fetch_entry(entry_id)

    def refund_credit(self, user_id: str, charge_ref: str) -> CreditEntry:
        self.get_user(user_id)
        entry_id = new_id()
        inserted = self.db.execute(
            _APPEND_REFUND_SQL,
            {"entry_id": entry_id, "user_id": user_id, "charge_ref": charge_ref,
             "created_at": utc_now_iso()},
        )
        if inserted == 0:
            charge = self.db.query_one(
                "SELECT entry_id FROM credits WHERE entry_id = :e AND user_id = :u"
                " AND reason = 'inference_charge'",
                {"e": charge_ref, "u": user_id},
            )
            if charge is None:
                raise ServiceError("unknown_charge", f"no charge {charge_ref} for this user")
            raise ServiceError("double_refund", f"charge {charge_ref} was already refunded")
        return self._fetch_entry(entry_id)

    def grant_credits(self, admin_user_id: str, user_id: str, amount: int, note: str = "") -> CreditEntry:
        if not self.is_admin(admin_user_id):
            raise ServiceError("not_admin", "caller does not hold the admin role")
        if not isinstance(amount, int) or amount < 1:
            raise ServiceError("invalid_amount", "grant amount must be a positive integer")
        self.get_user(user_id)
        entry_id = new_id()
        inserted = self.db.execute(
            _APPEND_ENTRY_SQL,
            {
                "entry_id": entry_id,
                "user_id": user_id,
                "delta": amount,
                "reason": CreditReason.admin_grant.value,
                "ref": None,
                "note": note or None,
                "created_at": utc_now_iso(),
            },
        )
        if inserted == 0:  # positive delta never fails the balance check
            raise RuntimeError("grant unexpectedly rejected")
        return self._fetch_entry(entry_id)

    def get_balance(self, user_id: str) -> int:
        self.get_user(user_id)
        total = self.db.scalar(
            "SELECT COALESCE(SUM(delta), 0) FROM credits WHERE user_id = :u", {"u": user_id}
        )
        return int(total)

    def ledger_entries(self, user_id: str) -> list[CreditEntry]:
        rows = self.db.query(
            "SELECT * FROM credits WHERE user_id = :u ORDER BY seq", {"u": user_id}
        )
        return [self._entry_from_row(r) for r in rows]

    def _fetch_entry(self, entry_id: str) -> CreditEntry:
        row = self.db.query_one("SELECT * FROM credits WHERE entry_id = :e", {"e": entry_id})
        assert row is not None
        return self._entry_from_row(row)

    @staticmethod
    def _entry_from_row(row: dict) -> CreditEntry:
        return CreditEntry(
            entry_id=row["entry_id"],
            user_id=row["user_id"],
            seq=row["seq"],
            delta=row["delta"],
            reason=CreditReason(row["reason"]),
            ref=row["ref"],
            note=row["note"],
            created_at=row["created_at"],
        )

