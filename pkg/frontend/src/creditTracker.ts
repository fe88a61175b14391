// Credit tracker widget: shows the remaining balance, switches to an alert
// with a request-more call to action exactly when the balance reaches zero.

import { el } from './dom.js';

export const LOW_CREDIT_THRESHOLD = 3;

export interface CreditTrackerState {
  balance: number;
  alert: boolean; // zero balance: blocked, ask for more
  low: boolean; // positive but running out
}

export function creditTracker(balance: number): CreditTrackerState {
  if (balance < 0 || !Number.isInteger(balance)) {
    throw new Error(`balance must be a non-negative integer, got ${balance}`);
  }
  return {
    balance,
    alert: balance === 0,
    low: balance > 0 && balance <= LOW_CREDIT_THRESHOLD,
  };
}

export function renderCreditTracker(
  state: CreditTrackerState,
  onRequestMore?: () => void,
): HTMLElement {
  const classes = ['credit-tracker'];
  if (state.alert) classes.push('credit-alert');
  if (state.low) classes.push('credit-low');
  const root = el('div', {
    class: classes.join(' '),
    'data-balance': String(state.balance),
  });
  root.append(el('span', { class: 'credit-count', text: `${state.balance} credits` }));
  if (state.alert) {
    const alert = el('div', { class: 'credit-alert-banner', role: 'alert' }, [
      el('span', { text: 'You are out of credits.' }),
    ]);
    const cta = el('button', { class: 'request-more', text: 'Request more credits' });
    if (onRequestMore) cta.addEventListener('click', onRequestMore);
    alert.append(cta);
    root.append(alert);
  }
  return root;
}
