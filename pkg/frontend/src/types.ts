// API payload types, mirroring the backend's response schemas.

export type Modality = 'image' | 'audio';
export type Label = 'real' | 'fake';

export interface RegisterRequest {
  name: string;
  email: string;
  position: string;
  region: string;
  password: string;
  password_confirm: string;
}

export interface RegisterResponse {
  user_id: string;
  name: string;
  email: string;
  position: string;
  region: string;
  created_at: string;
  balance: number;
}

export interface TokenResponse {
  token: string;
  expires_at: number;
}

export interface BalanceResponse {
  user_id: string;
  balance: number;
}

export interface CreditEntryResponse {
  entry_id: string;
  user_id: string;
  delta: number;
  reason: string;
  ref: string | null;
  note: string | null;
  created_at: string;
}

export interface UploadResponse {
  upload_id: string;
  filename: string;
  modality: Modality;
  format: string;
  byte_size: number;
  content_hash: string;
  uploaded_at: string;
}

export interface DetectorInfo {
  detector_id: string;
  display_name: string;
  modality: Modality;
  category: string;
  adapter_kind: string;
  version: string;
}

export interface FaceRegion {
  bbox: [number, number, number, number];
  score: number;
}

export interface Prediction {
  prediction_id: string;
  upload_id: string;
  detector_id: string;
  modality: Modality;
  label: Label;
  score: number;
  faces: FaceRegion[] | null;
  latency_ms: number;
  created_at: string;
}

export interface ChatTurn {
  role: 'user' | 'assistant';
  text: string;
  timestamp: string;
}

export interface ChatSession {
  session_id: string;
  model_id: string;
  upload_id: string | null;
  transcript: string | null;
  created_at: string;
  turns: ChatTurn[];
}

export interface ChatMessageResponse {
  session_id: string;
  turn: ChatTurn;
  transcript: string | null;
}

export interface StatisticsSnapshot {
  total_users: number;
  total_predictions: number;
  real_count: number;
  fake_count: number;
  per_model: Record<string, number>;
  per_modality: Record<string, number>;
  per_region_users: Record<string, number>;
  generated_at: string;
}

export interface FeedbackRequest {
  models_used: string[];
  formats_used: string[];
  most_accurate_model: string;
  useful_features?: string;
  improvements?: string;
  rating: number;
  user_role?: string;
  prior_exposure?: boolean;
  free_text?: string | null;
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
