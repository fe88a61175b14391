"""Request/response bodies for the REST gateway."""

from __future__ import annotations

from pydantic import BaseModel, Field


class RegisterRequest(BaseModel):
    name: str
    email: str
    position: str
    region: str
    password: str
    password_confirm: str


class RegisterResponse(BaseModel):
    user_id: str
    name: str
    email: str
    position: str
    region: str
    created_at: str
    balance: int


class LoginRequest(BaseModel):
    email: str
    password: str


class TokenResponse(BaseModel):
    token: str
    expires_at: int


class BalanceResponse(BaseModel):
    user_id: str
    balance: int


class GrantRequest(BaseModel):
    user_id: str
    amount: int
    note: str = ""


class CreditEntryResponse(BaseModel):
    entry_id: str
    user_id: str
    delta: int
    reason: str
    ref: str | None
    note: str | None
    created_at: str


class UploadResponse(BaseModel):
    upload_id: str
    filename: str
    modality: str
    format: str
    byte_size: int
    content_hash: str
    uploaded_at: str


class DetectorResponse(BaseModel):
    detector_id: str
    display_name: str
    modality: str
    category: str
    adapter_kind: str
    version: str


class InferenceRequest(BaseModel):
    upload_id: str
    detector_id: str


class FaceRegionResponse(BaseModel):
    bbox: list[int] = Field(min_length=4, max_length=4)
    score: float


class PredictionResponse(BaseModel):
    prediction_id: str
    upload_id: str
    detector_id: str
    modality: str
    label: str
    score: float
    faces: list[FaceRegionResponse] | None = None
    latency_ms: int
    created_at: str


class SessionCreateRequest(BaseModel):
    model_id: str
    upload_id: str | None = None


class TurnResponse(BaseModel):
    role: str
    text: str
    timestamp: str


class SessionResponse(BaseModel):
    session_id: str
    model_id: str
    upload_id: str | None
    transcript: str | None
    created_at: str
    turns: list[TurnResponse]


class MessageRequest(BaseModel):
    prompt: str


class MessageResponse(BaseModel):
    session_id: str
    turn: TurnResponse
    transcript: str | None = None


class StatisticsResponse(BaseModel):
    total_users: int
    total_predictions: int
    real_count: int
    fake_count: int
    per_model: dict[str, int]
    per_modality: dict[str, int]
    per_region_users: dict[str, int]
    generated_at: str


class FeedbackRequest(BaseModel):
    models_used: list[str]
    formats_used: list[str]
    most_accurate_model: str
    useful_features: str = ""
    improvements: str = ""
    rating: int
    user_role: str = ""
    prior_exposure: bool = False
    free_text: str | None = None


class FeedbackSubmitResponse(BaseModel):
    entry_id: str


class FeedbackSummaryResponse(BaseModel):
    total_entries: int
    rating_histogram: dict[str, int]
    rating_mean: float | None
    most_accurate: dict[str, int]
    format_usage: dict[str, int]


class HealthResponse(BaseModel):
    status: str
