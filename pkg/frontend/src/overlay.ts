// Result overlays: face bounding boxes scaled to the displayed image size,
// and a min/max-per-column waveform for audio results.

import { el } from './dom.js';
import type { FaceRegion } from './types.js';

export interface ScreenBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function scaleBox(
  bbox: [number, number, number, number],
  sourceWidth: number,
  displayWidth: number,
): ScreenBox {
  const scale = displayWidth / sourceWidth;
  const [x, y, w, h] = bbox;
  return {
    x: Math.round(x * scale),
    y: Math.round(y * scale),
    w: Math.max(1, Math.round(w * scale)),
    h: Math.max(1, Math.round(h * scale)),
  };
}

export function renderFaceOverlay(
  faces: FaceRegion[],
  sourceWidth: number,
  displayWidth: number,
): HTMLElement {
  const root = el('div', { class: 'face-overlay' });
  faces.forEach((face, index) => {
    const box = scaleBox(face.bbox, sourceWidth, displayWidth);
    const node = el('div', {
      class: 'face-box',
      'data-face-index': String(index),
      'data-face-score': face.score.toFixed(2),
      style: `left:${box.x}px;top:${box.y}px;width:${box.w}px;height:${box.h}px;`,
    });
    node.append(el('span', { class: 'face-score', text: `${Math.round(face.score * 100)}%` }));
    root.append(node);
  });
  return root;
}

export interface WaveformColumn {
  min: number;
  max: number;
}

export function waveformColumns(samples: Float32Array | number[], width: number): WaveformColumn[] {
  if (width < 1) throw new Error('display width must be at least 1 pixel');
  const data = samples instanceof Float32Array ? samples : Float32Array.from(samples);
  const columns: WaveformColumn[] = [];
  for (let c = 0; c < width; c++) {
    const start = Math.floor((c * data.length) / width);
    const end = Math.max(Math.floor(((c + 1) * data.length) / width), start + 1);
    let min = 0;
    let max = 0;
    if (start < data.length) {
      min = Infinity;
      max = -Infinity;
      for (let i = start; i < Math.min(end, data.length); i++) {
        const v = data[i]!;
        if (v < min) min = v;
        if (v > max) max = v;
      }
    }
    columns.push({ min, max });
  }
  return columns;
}

export function renderWaveform(
  samples: Float32Array | number[],
  width: number,
  height = 80,
  predictionColor = '#888',
): HTMLElement {
  const columns = waveformColumns(samples, width);
  const svgNS = 'http://www.w3.org/2000/svg';
  const svg = document.createElementNS(svgNS, 'svg');
  svg.setAttribute('width', String(width));
  svg.setAttribute('height', String(height));
  svg.setAttribute('class', 'waveform');
  const mid = height / 2;
  const points: string[] = [];
  columns.forEach((col, c) => points.push(`${c},${mid - col.max * mid}`));
  for (let c = columns.length - 1; c >= 0; c--) {
    points.push(`${c},${mid - columns[c]!.min * mid}`);
  }
  const polyline = document.createElementNS(svgNS, 'polygon');
  polyline.setAttribute('points', points.join(' '));
  polyline.setAttribute('fill', predictionColor);
  polyline.setAttribute('fill-opacity', '0.85');
  svg.append(polyline);
  const wrap = el('div', { class: 'waveform-wrap', 'data-columns': String(columns.length) });
  wrap.append(svg);
  return wrap;
}

// Static placeholder for formats we do not decode client-side (mp3).
export function renderWaveformPlaceholder(width: number, height = 80): HTMLElement {
  const root = el('div', {
    class: 'waveform-wrap waveform-placeholder',
    style: `width:${width}px;height:${height}px;`,
    text: 'waveform unavailable for this format',
  });
  return root;
}

// 16-bit PCM WAV decoding for the browser-side waveform; mono-averaged.
export function decodeWavSamples(buffer: ArrayBuffer): Float32Array {
  const view = new DataView(buffer);
  const tag = (offset: number) =>
    String.fromCharCode(view.getUint8(offset), view.getUint8(offset + 1), view.getUint8(offset + 2), view.getUint8(offset + 3));
  if (buffer.byteLength < 12 || tag(0) !== 'RIFF' || tag(8) !== 'WAVE') {
    throw new Error('not a RIFF/WAVE stream');
  }
  let offset = 12;
  let channels = 0;
  let bits = 0;
  let format = 0;
  let dataStart = -1;
  let dataLength = 0;
  while (offset + 8 <= buffer.byteLength) {
    const id = tag(offset);
    const size = view.getUint32(offset + 4, true);
    if (id === 'fmt ') {
      format = view.getUint16(offset + 8, true);
      channels = view.getUint16(offset + 10, true);
      bits = view.getUint16(offset + 22, true);
    } else if (id === 'data') {
      dataStart = offset + 8;
      dataLength = size;
    }
    offset += 8 + size + (size % 2);
  }
  if (format !== 1 || bits !== 16 || channels < 1 || dataStart < 0) {
    throw new Error('only 16-bit PCM WAV is decoded client-side');
  }
  const frameCount = Math.floor(dataLength / (2 * channels));
  const out = new Float32Array(frameCount);
  for (let i = 0; i < frameCount; i++) {
    let acc = 0;
    for (let ch = 0; ch < channels; ch++) {
      acc += view.getInt16(dataStart + (i * channels + ch) * 2, true);
    }
    out[i] = acc / channels / 32768;
  }
  return out;
}
