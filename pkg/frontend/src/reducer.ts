/**
 * Pure fold of session events into the view state.
 *
 * render(events) is deterministic and side-effect free (unknown event kinds
 * log a console warning but change nothing), so the whole UI state is
 * unit-testable without a browser. Latency and compute timers always come
 * from the service's metrics event; the UI never measures time itself.
 */

import type { MemoryEntryView, SessionEvent, Timers, ViewState } from './types.js';

export function initialState(): ViewState {
  return {
    typedText: '',
    stableBoundary: 0,
    stableSegments: [],
    memoryView: [],
    eventLog: [],
    timers: { input_s: null, latency_s: null, compute_s: null },
    status: 'idle',
    finalResponse: null,
    errorMessage: null,
    truncations: 0,
  };
}

function boundaryOf(segments: string[], typedText: string): number {
  const total = segments.reduce((n, s) => n + s.length, 0);
  return Math.min(total, typedText.length);
}

export function applyEvent(state: ViewState, event: SessionEvent): ViewState {
  const payload = event.payload ?? {};
  const next: ViewState = { ...state, eventLog: [...state.eventLog, event] };

  switch (event.kind) {
    case 'char_visible': {
      next.typedText = String(payload.visible_text ?? '');
      // a backspace may have invalidated previously stable segments
      let segments = next.stableSegments;
      while (segments.reduce((n, s) => n + s.length, 0) > next.typedText.length) {
        segments = segments.slice(0, -1);
      }
      next.stableSegments = segments;
      next.stableBoundary = boundaryOf(segments, next.typedText);
      if (next.status === 'idle') next.status = 'streaming';
      return next;
    }
    case 'segment_stable': {
      const index = Number(payload.index ?? next.stableSegments.length);
      const segments = next.stableSegments.slice(0, index);
      segments[index] = String(payload.text ?? '');
      next.stableSegments = segments;
      next.stableBoundary = boundaryOf(segments, next.typedText);
      return next;
    }
    case 'inference_started':
      next.status = 'inferring';
      return next;
    case 'inference_done': {
      const index = Number(payload.entry_index ?? next.memoryView.length);
      const entry: MemoryEntryView = {
        segments: (payload.segment_texts as string[] | undefined) ?? [],
        inference: String(payload.inference_text ?? ''),
      };
      const memoryView = next.memoryView.slice(0, index);
      memoryView[index] = entry;
      next.memoryView = memoryView;
      next.status = 'streaming';
      return next;
    }
    case 'wait':
      next.status = 'waiting';
      return next;
    case 'output_started':
      next.status = 'answering';
      return next;
    case 'final_response':
      next.finalResponse = String(payload.text ?? '');
      next.status = 'done';
      return next;
    case 'metrics': {
      if ('memory_truncated' in payload) {
        next.truncations += 1;
        const remaining = Number(payload.entries_remaining ?? next.memoryView.length);
        next.memoryView = next.memoryView.slice(0, remaining);
        return next;
      }
      const timers: Timers = {
        input_s: (payload.input_s as number | undefined) ?? null,
        latency_s: (payload.latency_s as number | undefined) ?? null,
        compute_s: (payload.compute_s as number | undefined) ?? null,
      };
      next.timers = timers;
      return next;
    }
    case 'error':
      next.errorMessage = String(payload.message ?? 'unknown error');
      next.status = 'error';
      return next;
    default:
      console.warn(`ignoring unknown session event kind: ${event.kind}`);
      return state;
  }
}

/** Fold a whole event log; same list in, same state out. */
export function render(events: SessionEvent[]): ViewState {
  return events.reduce(applyEvent, initialState());
}
