// Chat workspace transcript view. Bubbles carry text only: this renderer has
// no code path that produces a real/fake badge, score, or gauge, because the
// assistant's replies are semantic descriptions, not verdicts.

import { clear, el } from './dom.js';
import type { ChatSession } from './types.js';

export interface ChatViewOptions {
  pending?: boolean; // a message is in flight
  error?: string | null; // inline adapter/API error to surface
}

export function renderChatView(session: ChatSession, options: ChatViewOptions = {}): HTMLElement {
  const root = el('div', { class: 'chat-view', 'data-session': session.session_id });
  root.append(
    el('div', { class: 'chat-model', text: session.model_id }),
  );
  if (session.transcript !== null) {
    root.append(
      el('div', { class: 'chat-transcript' }, [
        el('strong', { text: 'Transcript: ' }),
        el('span', { text: session.transcript }),
      ]),
    );
  }
  const turns = el('div', { class: 'chat-turns' });
  for (const turn of session.turns) {
    turns.append(
      el('div', { class: `chat-bubble chat-${turn.role}`, 'data-role': turn.role }, [
        el('p', { class: 'chat-text', text: turn.text }),
        el('time', { class: 'chat-time', text: turn.timestamp }),
      ]),
    );
  }
  root.append(turns);
  if (options.pending) {
    root.append(
      el('div', { class: 'chat-pending', role: 'status' }, [
        el('span', { class: 'spinner' }),
        el('span', { text: 'waiting for the model…' }),
      ]),
    );
  }
  if (options.error) {
    root.append(
      el('div', { class: 'chat-error', role: 'alert' }, [
        el('span', { text: options.error }),
        el('span', { class: 'chat-error-note', text: ' (no credits were spent)' }),
      ]),
    );
  }
  return root;
}

export function updateChatView(
  container: HTMLElement,
  session: ChatSession,
  options: ChatViewOptions = {},
): void {
  clear(container);
  container.append(renderChatView(session, options));
}
