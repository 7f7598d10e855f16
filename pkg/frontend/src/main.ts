/** DOM wiring for the live demo page. */

import { createSession, feed, getConfig, subscribeEvents } from './api.js';
import { EditBatcher } from './batcher.js';
import { applyEvent, initialState } from './reducer.js';
import type { SessionEvent, ViewState } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing element #${id}`);
  return element as T;
};

let state: ViewState = initialState();
let sessionId: string | null = null;
let batcher: EditBatcher | null = null;
let unsubscribe: (() => void) | null = null;
let lastEnter = 0;

function fmtSeconds(value: number | null): string {
  return value === null ? '—' : `${value.toFixed(2)} s`;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;');
}

function renderView(): void {
  const typed = state.typedText;
  const boundary = state.stableBoundary;
  $('mirror').innerHTML =
    `<span class="stable">${escapeHtml(typed.slice(0, boundary))}</span>` +
    `<span class="unstable">${escapeHtml(typed.slice(boundary))}</span>`;

  const statusChip = $('status');
  statusChip.textContent = state.status === 'waiting' ? 'waiting for more input' : state.status;
  statusChip.className = `chip chip-${state.status}`;

  const memory = $('memory');
  memory.innerHTML = state.memoryView
    .map(
      (entry, i) =>
        `<li><span class="entry-segments">${escapeHtml(entry.segments.join(''))}</span>` +
        `<span class="entry-inference">#${i + 1} ${escapeHtml(entry.inference)}</span></li>`,
    )
    .join('');
  $('truncated').hidden = state.truncations === 0;

  $('timer-input').textContent = fmtSeconds(state.timers.input_s);
  $('timer-latency').textContent = fmtSeconds(state.timers.latency_s);
  $('timer-compute').textContent = fmtSeconds(state.timers.compute_s);

  const answer = $('answer');
  answer.textContent = state.finalResponse ?? '';
  answer.hidden = state.finalResponse === null;
  $('error').textContent = state.errorMessage ?? '';
  $('error').hidden = state.errorMessage === null;

  const input = $<HTMLTextAreaElement>('input');
  input.disabled = batcher?.isClosed ?? true;
}

function onEvent(event: SessionEvent): void {
  state = applyEvent(state, event);
  renderView();
}

function subscribe(sid: string): void {
  unsubscribe?.();
  unsubscribe = subscribeEvents(sid, onEvent, () => {
    // the stream also closes on network drops; if the session is still
    // running, resubscribe - the service replays the full log, so refold
    if (state.status !== 'done' && state.status !== 'error') {
      state = initialState();
      setTimeout(() => subscribe(sid), 500);
    }
  });
}

async function startSession(): Promise<void> {
  unsubscribe?.();
  state = initialState();
  const options = {
    format: $<HTMLSelectElement>('format').value,
    granularity: $<HTMLSelectElement>('granularity').value,
    inference_model: $<HTMLSelectElement>('inference-model').value,
    output_model: $<HTMLSelectElement>('output-model').value,
  };
  try {
    sessionId = await createSession(options);
  } catch (error) {
    state.errorMessage = String(error);
    state.status = 'error';
    renderView();
    return;
  }
  const sid = sessionId;
  batcher = new EditBatcher((edit) => {
    feed(sid, edit).catch((error) => console.warn('feed failed:', error));
  });
  subscribe(sid);
  const input = $<HTMLTextAreaElement>('input');
  input.value = '';
  input.disabled = false;
  input.focus();
  state.status = 'streaming';
  renderView();
}

function finishInput(): void {
  batcher?.finish();
  renderView();
}

function fillSelect(select: HTMLSelectElement, values: string[], selected: string): void {
  select.innerHTML = values
    .map((v) => `<option${v === selected ? ' selected' : ''}>${escapeHtml(v)}</option>`)
    .join('');
}

async function init(): Promise<void> {
  try {
    const config = await getConfig();
    fillSelect($<HTMLSelectElement>('format'), config.formats, config.defaults.format);
    fillSelect(
      $<HTMLSelectElement>('granularity'),
      config.granularities,
      config.defaults.granularity,
    );
    fillSelect(
      $<HTMLSelectElement>('inference-model'),
      config.models,
      config.defaults.inference_model,
    );
    fillSelect($<HTMLSelectElement>('output-model'), config.models, config.defaults.output_model);
  } catch (error) {
    $('error').textContent = `service unreachable: ${error}`;
    $('error').hidden = false;
    return;
  }

  $('start').addEventListener('click', () => void startSession());
  $('finish').addEventListener('click', finishInput);

  const input = $<HTMLTextAreaElement>('input');
  input.addEventListener('input', () => batcher?.update(input.value));
  input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') {
      const now = Date.now();
      if (now - lastEnter < 400) {
        event.preventDefault();
        finishInput();
      }
      lastEnter = now;
    }
  });
  renderView();
}

void init();
