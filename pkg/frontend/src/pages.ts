// Page renderers for the six page groups: landing, account (register/login),
// detectors with upload, results, chat workspace, statistics, feedback.

import { api, ApiError, getToken, setToken } from './api.js';
import { renderChatView } from './chat.js';
import { creditTracker, renderCreditTracker } from './creditTracker.js';
import { clear, el } from './dom.js';
import { createDropzone } from './dropzone.js';
import { renderGauge, toGauge } from './gauge.js';
import {
  decodeWavSamples,
  renderFaceOverlay,
  renderWaveform,
  renderWaveformPlaceholder,
} from './overlay.js';
import type { ChatSession, DetectorInfo, Prediction, UploadResponse } from './types.js';

interface AppState {
  upload: UploadResponse | null;
  uploadFile: File | null;
  inferencePending: boolean;
  session: ChatSession | null;
}

export const state: AppState = {
  upload: null,
  uploadFile: null,
  inferencePending: false,
  session: null,
};

function errorBanner(error: unknown): HTMLElement {
  const message =
    error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
  return el('div', { class: 'error-banner', role: 'alert', text: message });
}

async function mountCreditTracker(target: HTMLElement): Promise<void> {
  try {
    const { balance } = await api.credits();
    target.replaceChildren(renderCreditTracker(creditTracker(balance)));
  } catch {
    target.replaceChildren();
  }
}

// -- landing ---------------------------------------------------------------

export function landingPage(root: HTMLElement): void {
  root.append(
    el('section', { class: 'landing' }, [
      el('h1', { text: 'Check whether media was AI-generated' }),
      el('p', {
        text:
          'Upload an image or audio clip, run a detector, and read the ' +
          'evidence: confidence gauges, face regions, waveforms, and ' +
          'model-written descriptions.',
      }),
      el('p', {}, [
        el('a', { href: '#/detect', text: 'Open the detector' }),
        el('span', { text: ' · ' }),
        el('a', { href: '#/account', text: 'Create an account' }),
      ]),
    ]),
  );
}

// -- account: register / login --------------------------------------------------

export function accountPage(root: HTMLElement): void {
  const status = el('div', { class: 'account-status' });
  const registerForm = el('form', { class: 'register-form' });
  const fields: Record<string, HTMLInputElement> = {};
  for (const [name, type] of [
    ['name', 'text'], ['email', 'email'], ['position', 'text'], ['region', 'text'],
    ['password', 'password'], ['password_confirm', 'password'],
  ] as const) {
    const input = el('input', { name, type, placeholder: name.replace('_', ' ') });
    fields[name] = input;
    registerForm.append(el('label', { text: name.replace('_', ' ') }), input);
  }
  const submit = el('button', { type: 'submit', text: 'Register' });
  registerForm.append(submit);
  registerForm.addEventListener('submit', async (event) => {
    event.preventDefault();
    try {
      const account = await api.register({
        name: fields.name!.value,
        email: fields.email!.value,
        position: fields.position!.value,
        region: fields.region!.value.toUpperCase(),
        password: fields.password!.value,
        password_confirm: fields.password_confirm!.value,
      });
      status.replaceChildren(
        el('p', { text: `Welcome ${account.name}; you have ${account.balance} credits.` }),
      );
    } catch (error) {
      status.replaceChildren(errorBanner(error));
    }
  });

  const loginForm = el('form', { class: 'login-form' });
  const email = el('input', { name: 'email', type: 'email', placeholder: 'email' });
  const password = el('input', { name: 'password', type: 'password', placeholder: 'password' });
  loginForm.append(email, password, el('button', { type: 'submit', text: 'Log in' }));
  loginForm.addEventListener('submit', async (event) => {
    event.preventDefault();
    try {
      const { token } = await api.login(email.value, password.value);
      setToken(token);
      status.replaceChildren(el('p', { text: 'Logged in.' }));
    } catch (error) {
      status.replaceChildren(errorBanner(error));
    }
  });

  root.append(
    el('section', { class: 'account' }, [
      el('h2', { text: 'Account' }), registerForm, el('h2', { text: 'Log in' }),
      loginForm, status,
    ]),
  );
}

// -- detector page ------------------------------------------------------------

export function detectorPage(root: HTMLElement): void {
  const tracker = el('div', { class: 'tracker-slot' });
  void mountCreditTracker(tracker);

  const uploadStatus = el('div', { class: 'upload-status' });
  const detectorSelect = el('select', { class: 'detector-select' });
  const runButton = el('button', { text: 'Run detection', disabled: 'disabled' });
  const result = el('div', { class: 'result-slot' });

  const dropzone = createDropzone(async (file) => {
    try {
      const upload = await api.upload(file, true);
      state.upload = upload;
      state.uploadFile = file;
      uploadStatus.replaceChildren(
        el('p', { text: `${upload.filename}: ${upload.format} (${upload.modality})` }),
      );
      const detectors = await api.detectors(upload.modality);
      populateDetectors(detectorSelect, detectors);
      runButton.removeAttribute('disabled');
    } catch (error) {
      uploadStatus.replaceChildren(errorBanner(error));
    }
  });

  runButton.addEventListener('click', async () => {
    if (!state.upload || state.inferencePending) return;
    state.inferencePending = true; // one in-flight inference per tab
    runButton.setAttribute('disabled', 'disabled');
    result.replaceChildren(el('div', { class: 'spinner', role: 'status' }));
    try {
      const prediction = await api.runInference(state.upload.upload_id, detectorSelect.value);
      await renderResult(result, prediction);
    } catch (error) {
      result.replaceChildren(errorBanner(error));
    } finally {
      state.inferencePending = false;
      runButton.removeAttribute('disabled');
      void mountCreditTracker(tracker);
    }
  });

  root.append(
    el('section', { class: 'detector-page' }, [
      el('h2', { text: 'Detectors' }), tracker, dropzone, uploadStatus,
      el('div', {}, [detectorSelect, runButton]), result,
    ]),
  );
}

function populateDetectors(select: HTMLSelectElement, detectors: DetectorInfo[]): void {
  clear(select);
  for (const d of detectors.filter((d) => d.adapter_kind !== 'mllm_chat')) {
    select.append(el('option', { value: d.detector_id, text: d.display_name }));
  }
}

async function renderResult(slot: HTMLElement, prediction: Prediction): Promise<void> {
  const card = el('div', { class: 'prediction-card', 'data-prediction': prediction.prediction_id });
  card.append(renderGauge(toGauge(prediction.score, prediction.label)));
  card.append(
    el('p', {
      class: 'prediction-meta',
      text: `${prediction.detector_id} · ${prediction.latency_ms} ms`,
    }),
  );
  if (prediction.modality === 'image' && prediction.faces && state.uploadFile) {
    const url = URL.createObjectURL(state.uploadFile);
    const img = el('img', { src: url, class: 'result-image' });
    img.addEventListener('load', () => {
      card.append(renderFaceOverlay(prediction.faces!, img.naturalWidth, img.width));
    });
    card.append(img);
  }
  if (prediction.modality === 'audio' && state.uploadFile) {
    if (state.upload?.format === 'wav') {
      const buffer = await state.uploadFile.arrayBuffer();
      try {
        card.append(renderWaveform(decodeWavSamples(buffer), 480));
      } catch {
        card.append(renderWaveformPlaceholder(480));
      }
    } else {
      card.append(renderWaveformPlaceholder(480));
    }
  }
  slot.replaceChildren(card);
}

// -- chat workspace --------------------------------------------------------------

export function chatPage(root: HTMLElement): void {
  const view = el('div', { class: 'chat-slot' });
  const modelSelect = el('select', { class: 'model-select' });
  const prompt = el('input', { type: 'text', placeholder: 'e.g. Is this image real?' });
  const send = el('button', { text: 'Send' });
  const status = el('div', { class: 'chat-status' });

  void (async () => {
    try {
      const detectors = await api.detectors();
      for (const d of detectors.filter((d) => d.adapter_kind === 'mllm_chat')) {
        modelSelect.append(el('option', { value: d.detector_id, text: d.display_name }));
      }
    } catch (error) {
      status.replaceChildren(errorBanner(error));
    }
  })();

  send.addEventListener('click', async () => {
    if (!prompt.value.trim()) return;
    try {
      if (!state.session || state.session.model_id !== modelSelect.value) {
        state.session = await api.createSession(
          modelSelect.value,
          state.upload?.upload_id ?? undefined,
        );
      }
      view.replaceChildren(renderChatView(state.session, { pending: true }));
      const response = await api.sendMessage(state.session.session_id, prompt.value);
      state.session = {
        ...state.session,
        transcript: response.transcript,
        turns: [
          ...state.session.turns,
          { role: 'user', text: prompt.value, timestamp: response.turn.timestamp },
          response.turn,
        ],
      };
      view.replaceChildren(renderChatView(state.session, { pending: false }));
      prompt.value = '';
    } catch (error) {
      if (state.session) {
        view.replaceChildren(
          renderChatView(state.session, {
            pending: false,
            error: error instanceof ApiError ? `${error.code}: ${error.message}` : String(error),
          }),
        );
      } else {
        status.replaceChildren(errorBanner(error));
      }
    }
  });

  root.append(
    el('section', { class: 'chat-page' }, [
      el('h2', { text: 'Model workspace' }),
      el('p', { text: 'Conversational analysis; responses describe, they do not classify.' }),
      modelSelect, view, el('div', { class: 'prompt-bar' }, [prompt, send]), status,
    ]),
  );
}

// -- statistics dashboard ------------------------------------------------------------

export function statisticsPage(root: HTMLElement): void {
  const section = el('section', { class: 'stats-page' }, [el('h2', { text: 'Statistics' })]);
  root.append(section);
  void (async () => {
    try {
      const snapshot = await api.statistics();
      const cards = el('div', { class: 'stat-cards' });
      const entries: [string, string][] = [
        ['Total users', String(snapshot.total_users)],
        ['Predictions', String(snapshot.total_predictions)],
        ['Real', String(snapshot.real_count)],
        ['Fake', String(snapshot.fake_count)],
      ];
      for (const [title, value] of entries) {
        cards.append(
          el('div', { class: 'stat-card' }, [
            el('h3', { text: title }),
            el('p', { class: 'stat-value', text: value }),
          ]),
        );
      }
      section.append(cards);
      section.append(tally('Model utilization', snapshot.per_model));
      section.append(tally('Per modality', snapshot.per_modality));
      section.append(tally('Users by region', snapshot.per_region_users));
    } catch (error) {
      section.append(errorBanner(error));
    }
  })();
}

function tally(title: string, counts: Record<string, number>): HTMLElement {
  const block = el('div', { class: 'tally' }, [el('h3', { text: title })]);
  const list = el('ul');
  for (const [key, count] of Object.entries(counts).sort((a, b) => b[1] - a[1])) {
    list.append(el('li', { text: `${key}: ${count}` }));
  }
  block.append(list);
  return block;
}

// -- feedback ------------------------------------------------------------------------

export function feedbackPage(root: HTMLElement): void {
  const status = el('div');
  const form = el('form', { class: 'feedback-form' });
  const modelsUsed = el('input', { name: 'models_used', placeholder: 'models used (comma separated)' });
  const mostAccurate = el('input', { name: 'most_accurate', placeholder: 'most accurate model or "unsure"' });
  const rating = el('select', { name: 'rating' });
  for (const n of [1, 2, 3, 4, 5]) {
    rating.append(el('option', { value: String(n), text: `${n}` }));
  }
  const formats = ['image', 'audio', 'video'].map((fmt) => {
    const box = el('input', { type: 'checkbox', name: 'formats', value: fmt });
    form.append(el('label', { text: fmt }), box);
    return box;
  });
  const features = el('textarea', { name: 'useful_features', placeholder: 'useful features' });
  const improvements = el('textarea', { name: 'improvements', placeholder: 'desired improvements' });
  const role = el('input', { name: 'user_role', placeholder: 'your role' });
  const priorExposure = el('input', { type: 'checkbox', name: 'prior_exposure' });
  form.append(
    modelsUsed, mostAccurate, el('label', { text: 'rating' }), rating, features,
    improvements, role, el('label', { text: 'used deepfake tools before?' }), priorExposure,
    el('button', { type: 'submit', text: 'Send feedback' }),
  );
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    try {
      await api.submitFeedback({
        models_used: modelsUsed.value.split(',').map((s) => s.trim()).filter(Boolean),
        formats_used: formats.filter((f) => f.checked).map((f) => f.value),
        most_accurate_model: mostAccurate.value || 'unsure',
        useful_features: features.value,
        improvements: improvements.value,
        rating: Number(rating.value),
        user_role: role.value,
        prior_exposure: priorExposure.checked,
      });
      status.replaceChildren(el('p', { text: 'Thanks; your feedback was recorded.' }));
    } catch (error) {
      status.replaceChildren(errorBanner(error));
    }
  });
  root.append(el('section', { class: 'feedback-page' }, [el('h2', { text: 'Feedback' }), form, status]));
}

export function isLoggedIn(): boolean {
  return getToken() !== null;
}
