"""Dashboard aggregates and anonymized feedback intake.

Statistics are recomputed from raw rows on every call inside one read
transaction, so the sum invariants (real+fake = total predictions, per-model
counts sum to total, per-region counts sum to users) cannot be torn by
concurrent writes. Feedback rows carry a salted hash of the submitter, never
the raw user id.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from sqlalchemy import text

from .config import AppConfig
from .detectors.registry import DetectorRegistry
from .errors import ServiceError
from .persistence import Database
from .security import anonymize_user_id
from .util import new_id, utc_now_iso

logger = logging.getLogger(__name__)

FEEDBACK_FORMAT_OPTIONS = ("image", "audio", "video")
OTHER_MODEL = "other"
UNSURE_MODEL = "unsure"


@dataclass(frozen=True)
class StatisticsSnapshot:
    total_users: int
    total_predictions: int
    real_count: int
    fake_count: int
    per_model: dict[str, int]
    per_modality: dict[str, int]
    per_region_users: dict[str, int]
    generated_at: str

    def to_dict(self) -> dict:
        return {
            "total_users": self.total_users,
            "total_predictions": self.total_predictions,
            "real_count": self.real_count,
            "fake_count": self.fake_count,
            "per_model": dict(self.per_model),
            "per_modality": dict(self.per_modality),
            "per_region_users": dict(self.per_region_users),
            "generated_at": self.generated_at,
        }


@dataclass(frozen=True)
class FeedbackForm:
    models_used: list[str]
    formats_used: list[str]
    most_accurate_model: str
    useful_features: str
    improvements: str
    rating: int
    user_role: str
    prior_exposure: bool
    free_text: str | None = None


@dataclass(frozen=True)
class FeedbackSummary:
    total_entries: int
    rating_histogram: dict[int, int]
    rating_mean: float | None
    most_accurate: dict[str, int]
    format_usage: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "total_entries": self.total_entries,
            "rating_histogram": {str(k): v for k, v in sorted(self.rating_histogram.items())},
            "rating_mean": self.rating_mean,
            "most_accurate": dict(self.most_accurate),
            "format_usage": dict(self.format_usage),
        }


class AnalyticsService:
    def __init__(self, db: Database, registry: DetectorRegistry, config: AppConfig):
        self.db = db
        self.registry = registry
        self.config = config

    # -- statistics -----------------------------------------------------------

    def compute_statistics(self) -> StatisticsSnapshot:
        with self.db.engine.begin() as conn:
            total_users = conn.execute(text("SELECT COUNT(*) FROM users")).scalar() or 0
            label_rows = conn.execute(
                text("SELECT label, COUNT(*) AS n FROM predictions GROUP BY label")
            ).mappings().all()
            per_model_rows = conn.execute(
                text("SELECT detector_id, COUNT(*) AS n FROM predictions GROUP BY detector_id")
            ).mappings().all()
            per_modality_rows = conn.execute(
                text("SELECT modality, COUNT(*) AS n FROM predictions GROUP BY modality")
            ).mappings().all()
            per_region_rows = conn.execute(
                text("SELECT region, COUNT(*) AS n FROM users GROUP BY region")
            ).mappings().all()

        label_counts = {r["label"]: r["n"] for r in label_rows}
        real_count = label_counts.get("real", 0)
        fake_count = label_counts.get("fake", 0)
        return StatisticsSnapshot(
            total_users=int(total_users),
            total_predictions=real_count + fake_count,
            real_count=real_count,
            fake_count=fake_count,
            per_model={r["detector_id"]: r["n"] for r in per_model_rows},
            per_modality={r["modality"]: r["n"] for r in per_modality_rows},
            per_region_users={r["region"]: r["n"] for r in per_region_rows},
            generated_at=utc_now_iso(),
        )

    # -- feedback --------------------------------------------------------------

    def submit_feedback(self, user_id: str, form: FeedbackForm) -> str:
        if not isinstance(form.rating, int) or not 1 <= form.rating <= 5:
            raise ServiceError("invalid_rating", "rating must be an integer from 1 to 5")
        for model in form.models_used:
            if model != OTHER_MODEL and model not in self.registry:
                raise ServiceError(
                    "unknown_model_reference", f"{model!r} is not a registered detector"
                )
        if form.most_accurate_model != UNSURE_MODEL and form.most_accurate_model not in self.registry:
            raise ServiceError(
                "unknown_model_reference",
                f"{form.most_accurate_model!r} is not a registered detector",
            )
        for fmt in form.formats_used:
            if fmt not in FEEDBACK_FORMAT_OPTIONS:
                raise ServiceError(
                    "invalid_format_option",
                    f"formats_used entries must be one of {FEEDBACK_FORMAT_OPTIONS}",
                )
        entry_id = new_id()
        self.db.execute(
            "INSERT INTO feedback (entry_id, models_used, formats_used,"
            " most_accurate_model, useful_features, improvements, rating, user_role,"
            " prior_exposure, free_text, submitter_token, created_at)"
            " VALUES (:entry_id, :models_used, :formats_used, :most_accurate,"
            " :useful_features, :improvements, :rating, :user_role, :prior_exposure,"
            " :free_text, :token, :created_at)",
            {
                "entry_id": entry_id,
                "models_used": json.dumps(form.models_used),
                "formats_used": json.dumps(form.formats_used),
                "most_accurate": form.most_accurate_model,
                "useful_features": form.useful_features,
                "improvements": form.improvements,
                "rating": form.rating,
                "user_role": form.user_role,
                "prior_exposure": 1 if form.prior_exposure else 0,
                "free_text": form.free_text,
                "token": anonymize_user_id(self.config.effective_feedback_salt, user_id),
                "created_at": utc_now_iso(),
            },
        )
        return entry_id

    def aggregate_feedback(self) -> FeedbackSummary:
        rows = self.db.query("SELECT rating, most_accurate_model, formats_used FROM feedback")
        histogram: dict[int, int] = {}
        most_accurate: dict[str, int] = {}
        format_usage: dict[str, int] = {}
        for row in rows:
            histogram[row["rating"]] = histogram.get(row["rating"], 0) + 1
            model = row["most_accurate_model"]
            most_accurate[model] = most_accurate.get(model, 0) + 1
            for fmt in json.loads(row["formats_used"]):
                format_usage[fmt] = format_usage.get(fmt, 0) + 1
        total = len(rows)
        mean = (
            round(sum(r * n for r, n in histogram.items()) / total, 4) if total else None
        )
        return FeedbackSummary(
            total_entries=total,
            rating_histogram=histogram,
            rating_mean=mean,
            most_accurate=most_accurate,
            format_usage=format_usage,
        )
