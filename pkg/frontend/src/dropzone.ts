// Drag-and-drop upload area with a click-to-browse fallback.

import { el } from './dom.js';

export function createDropzone(onFile: (file: File) => void): HTMLElement {
  const input = el('input', { type: 'file', class: 'dropzone-input', hidden: 'hidden' });
  const zone = el('div', { class: 'dropzone', tabindex: '0' }, [
    el('p', { text: 'Drag and drop an image or audio file, or click to browse' }),
    input,
  ]);

  zone.addEventListener('click', () => input.click());
  zone.addEventListener('dragover', (event) => {
    event.preventDefault();
    zone.classList.add('dragover');
  });
  zone.addEventListener('dragleave', () => zone.classList.remove('dragover'));
  zone.addEventListener('drop', (event) => {
    event.preventDefault();
    zone.classList.remove('dragover');
    const file = event.dataTransfer?.files?.[0];
    if (file) onFile(file);
  });
  input.addEventListener('change', () => {
    const file = input.files?.[0];
    if (file) onFile(file);
  });
  return zone;
}
