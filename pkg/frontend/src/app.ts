// SPA bootstrap: navigation bar plus hash routing over the page groups.

import { el } from './dom.js';
import {
  accountPage,
  chatPage,
  detectorPage,
  feedbackPage,
  landingPage,
  statisticsPage,
} from './pages.js';
import { Router } from './router.js';

const NAV_LINKS: [string, string][] = [
  ['/', 'Home'],
  ['/account', 'Account'],
  ['/detect', 'Detect'],
  ['/chat', 'Workspace'],
  ['/stats', 'Statistics'],
  ['/feedback', 'Feedback'],
];

export function mountApp(host: HTMLElement): Router {
  const nav = el('nav', { class: 'top-nav' });
  for (const [path, title] of NAV_LINKS) {
    nav.append(el('a', { href: `#${path}`, text: title }));
  }
  const outlet = el('main', { id: 'outlet' });
  host.replaceChildren(nav, outlet);

  const router = new Router(outlet)
    .register('/', landingPage)
    .register('/account', accountPage)
    .register('/detect', detectorPage)
    .register('/chat', chatPage)
    .register('/stats', statisticsPage)
    .register('/feedback', feedbackPage);
  void router.render();
  return router;
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  mountApp(document.getElementById('app')!);
}
