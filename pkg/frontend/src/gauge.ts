// Radial confidence gauge: green for real, orange-red for fake, percent from
// the fake-probability score.

import { el } from './dom.js';
import type { Label } from './types.js';

export type GaugeColor = 'green' | 'orange_red';

export interface GaugeViewModel {
  percent: number; // 0..100, rounded
  label: Label;
  color: GaugeColor;
}

export const GAUGE_COLORS: Record<GaugeColor, string> = {
  green: '#1db954',
  orange_red: '#ff4530',
};

export function toGauge(score: number, label: Label): GaugeViewModel {
  if (score < 0 || score > 1) throw new Error(`score ${score} outside [0, 1]`);
  return {
    percent: Math.round(score * 100),
    label,
    color: label === 'real' ? 'green' : 'orange_red',
  };
}

export function renderGauge(model: GaugeViewModel): HTMLElement {
  const size = 120;
  const radius = 52;
  const circumference = 2 * Math.PI * radius;
  const filled = (model.percent / 100) * circumference;
  const stroke = GAUGE_COLORS[model.color];

  const root = el('div', {
    class: `gauge gauge-${model.color}`,
    'data-percent': String(model.percent),
    'data-label': model.label,
    'data-color': model.color,
  });
  const svgNS = 'http://www.w3.org/2000/svg';
  const svg = document.createElementNS(svgNS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${size} ${size}`);
  svg.setAttribute('width', String(size));
  svg.setAttribute('height', String(size));

  const track = document.createElementNS(svgNS, 'circle');
  track.setAttribute('cx', String(size / 2));
  track.setAttribute('cy', String(size / 2));
  track.setAttribute('r', String(radius));
  track.setAttribute('fill', 'none');
  track.setAttribute('stroke', '#2a2a2a');
  track.setAttribute('stroke-width', '10');

  const arc = document.createElementNS(svgNS, 'circle');
  arc.setAttribute('cx', String(size / 2));
  arc.setAttribute('cy', String(size / 2));
  arc.setAttribute('r', String(radius));
  arc.setAttribute('fill', 'none');
  arc.setAttribute('stroke', stroke);
  arc.setAttribute('stroke-width', '10');
  arc.setAttribute('stroke-linecap', 'round');
  arc.setAttribute('stroke-dasharray', `${filled} ${circumference - filled}`);
  arc.setAttribute('transform', `rotate(-90 ${size / 2} ${size / 2})`);

  const text = document.createElementNS(svgNS, 'text');
  text.setAttribute('x', '50%');
  text.setAttribute('y', '50%');
  text.setAttribute('dominant-baseline', 'middle');
  text.setAttribute('text-anchor', 'middle');
  text.setAttribute('fill', stroke);
  text.textContent = `${model.percent}%`;

  svg.append(track, arc, text);
  root.append(svg);
  root.append(el('div', { class: 'gauge-caption', text: model.label }));
  return root;
}
