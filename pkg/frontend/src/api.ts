// Typed API client. Every call goes through one of the ROUTES entries below;
// a test checks this table one-to-one against the backend's OpenAPI document.

import type {
  BalanceResponse,
  ChatMessageResponse,
  ChatSession,
  CreditEntryResponse,
  DetectorInfo,
  FeedbackRequest,
  Prediction,
  RegisterRequest,
  RegisterResponse,
  StatisticsSnapshot,
  TokenResponse,
  UploadResponse,
} from './types.js';

export const API_BASE = '';
const TOKEN_KEY = 'fakefinder.token';

export const ROUTES = {
  register: { method: 'post', path: '/api/register' },
  login: { method: 'post', path: '/api/login' },
  credits: { method: 'get', path: '/api/credits' },
  grantCredits: { method: 'post', path: '/api/admin/credits' },
  upload: { method: 'post', path: '/api/uploads' },
  detectors: { method: 'get', path: '/api/detectors' },
  runInference: { method: 'post', path: '/api/inferences' },
  listHistory: { method: 'get', path: '/api/inferences' },
  getPrediction: { method: 'get', path: '/api/inferences/{prediction_id}' },
  createSession: { method: 'post', path: '/api/mllm/sessions' },
  sendMessage: { method: 'post', path: '/api/mllm/sessions/{session_id}/messages' },
  statistics: { method: 'get', path: '/api/statistics' },
  submitFeedback: { method: 'post', path: '/api/feedback' },
  feedbackSummary: { method: 'get', path: '/api/admin/feedback' },
  health: { method: 'get', path: '/healthz' },
} as const;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export function getToken(): string | null {
  return window.sessionStorage.getItem(TOKEN_KEY);
}

export function setToken(token: string | null): void {
  if (token === null) {
    window.sessionStorage.removeItem(TOKEN_KEY);
  } else {
    window.sessionStorage.setItem(TOKEN_KEY, token);
  }
}

function fill(path: string, params: Record<string, string> = {}): string {
  return path.replace(/\{(\w+)\}/g, (_, name: string) => {
    const value = params[name];
    if (value === undefined) throw new Error(`missing path parameter ${name}`);
    return encodeURIComponent(value);
  });
}

async function request<T>(
  route: { method: string; path: string },
  options: {
    pathParams?: Record<string, string>;
    query?: Record<string, string>;
    json?: unknown;
    form?: FormData;
  } = {},
): Promise<T> {
  let url = API_BASE + fill(route.path, options.pathParams);
  if (options.query) {
    url += '?' + new URLSearchParams(options.query).toString();
  }
  const headers: Record<string, string> = {};
  const token = getToken();
  if (token) headers['Authorization'] = `Bearer ${token}`;
  let body: BodyInit | undefined;
  if (options.json !== undefined) {
    headers['Content-Type'] = 'application/json';
    body = JSON.stringify(options.json);
  } else if (options.form) {
    body = options.form;
  }
  const response = await fetch(url, { method: route.method.toUpperCase(), headers, body });
  const payload = await response.json().catch(() => null);
  if (!response.ok) {
    const error = payload?.error ?? { code: 'unknown', message: `HTTP ${response.status}` };
    throw new ApiError(response.status, error.code, error.message);
  }
  return payload as T;
}

export const api = {
  register: (body: RegisterRequest) =>
    request<RegisterResponse>(ROUTES.register, { json: body }),

  login: (email: string, password: string) =>
    request<TokenResponse>(ROUTES.login, { json: { email, password } }),

  credits: () => request<BalanceResponse>(ROUTES.credits),

  grantCredits: (user_id: string, amount: number, note = '') =>
    request<CreditEntryResponse>(ROUTES.grantCredits, { json: { user_id, amount, note } }),

  upload: (file: File, consent: boolean) => {
    const form = new FormData();
    form.append('file', file);
    form.append('consent', String(consent));
    return request<UploadResponse>(ROUTES.upload, { form });
  },

  detectors: (modality?: 'image' | 'audio') =>
    request<DetectorInfo[]>(ROUTES.detectors, {
      query: modality ? { modality } : undefined,
    }),

  runInference: (upload_id: string, detector_id: string) =>
    request<Prediction>(ROUTES.runInference, { json: { upload_id, detector_id } }),

  listHistory: (page = 1, pageSize = 20) =>
    request<Prediction[]>(ROUTES.listHistory, {
      query: { page: String(page), page_size: String(pageSize) },
    }),

  getPrediction: (predictionId: string) =>
    request<Prediction>(ROUTES.getPrediction, {
      pathParams: { prediction_id: predictionId },
    }),

  createSession: (model_id: string, upload_id?: string) =>
    request<ChatSession>(ROUTES.createSession, {
      json: upload_id ? { model_id, upload_id } : { model_id },
    }),

  sendMessage: (sessionId: string, prompt: string) =>
    request<ChatMessageResponse>(ROUTES.sendMessage, {
      pathParams: { session_id: sessionId },
      json: { prompt },
    }),

  statistics: () => request<StatisticsSnapshot>(ROUTES.statistics),

  submitFeedback: (body: FeedbackRequest) =>
    request<{ entry_id: string }>(ROUTES.submitFeedback, { json: body }),

  feedbackSummary: () =>
    request<{
      total_entries: number;
      rating_histogram: Record<string, number>;
      rating_mean: number | null;
      most_accurate: Record<string, number>;
      format_usage: Record<string, number>;
    }>(ROUTES.feedbackSummary),

  health: () => request<{ status: string }>(ROUTES.health),
};
