import { describe, expect, it, vi } from 'vitest';

import { applyEvent, initialState, render } from '../src/reducer.js';
import type { SessionEvent } from '../src/types.js';

import fixture from './fixtures/session_events.json';

const recorded = fixture.events as SessionEvent[];
const summary = fixture.expected_summary as {
  response: string;
  latency_s: number;
  compute_s: number;
  input_s: number;
  steps: { kind: string; text: string; new_segment_texts: string[] }[];
};

function ev(kind: string, payload: Record<string, unknown>, t = 0): SessionEvent {
  return { kind, payload, t };
}

describe('render over the recorded session log', () => {
  it('reproduces the session end state', () => {
    const state = render(recorded);
    expect(state.status).toBe('done');
    expect(state.finalResponse).toBe(summary.response);
    expect(state.eventLog).toHaveLength(recorded.length);

    const inferenceSteps = summary.steps.filter((s) => s.kind === 'inference');
    expect(state.memoryView).toHaveLength(inferenceSteps.length);
    state.memoryView.forEach((entry, i) => {
      expect(entry.inference).toBe(inferenceSteps[i]!.text);
      expect(entry.segments).toEqual(inferenceSteps[i]!.new_segment_texts);
    });

    // typed text is the final visible snapshot; all of it ended up stable
    const lastVisible = [...recorded]
      .reverse()
      .find((e) => e.kind === 'char_visible')!.payload.visible_text;
    expect(state.typedText).toBe(lastVisible);
    expect(state.stableBoundary).toBeLessThanOrEqual(state.typedText.length);
  });

  it('shows exactly the latency the metrics event reported', () => {
    const state = render(recorded);
    const metrics = recorded.find(
      (e) => e.kind === 'metrics' && 'latency_s' in e.payload,
    )!;
    expect(state.timers.latency_s).toBe(metrics.payload.latency_s);
    expect(state.timers.compute_s).toBe(metrics.payload.compute_s);
    expect(state.timers.input_s).toBe(metrics.payload.input_s);
    expect(state.timers.latency_s).toBe(summary.latency_s);
  });

  it('is a pure deterministic fold', () => {
    const first = render(recorded);
    const second = render(recorded);
    expect(second).toEqual(first);

    const before = initialState();
    const frozen = JSON.stringify(before);
    applyEvent(before, recorded[0]!);
    expect(JSON.stringify(before)).toBe(frozen);
  });
});

describe('applyEvent unit behaviour', () => {
  it('empty log yields the initial state', () => {
    expect(render([])).toEqual(initialState());
  });

  it('two inferences then final and metrics populate memory and timers', () => {
    const state = render([
      ev('inference_done', {
        entry_index: 0,
        inference_text: 'I1',
        segment_texts: ['A.'],
        busy_s: 0.1,
      }),
      ev('inference_done', {
        entry_index: 1,
        inference_text: 'I2',
        segment_texts: [' B.'],
        busy_s: 0.1,
      }),
      ev('final_response', { text: 'The answer is (A).', busy_s: 0.2 }),
      ev('metrics', { latency_s: 0.21, compute_s: 0.4, input_s: 3.2, steps: 3 }),
    ]);
    expect(state.memoryView).toHaveLength(2);
    expect(state.timers).toEqual({ latency_s: 0.21, compute_s: 0.4, input_s: 3.2 });
    expect(state.finalResponse).toBe('The answer is (A).');
  });

  it('wait renders the waiting status chip', () => {
    const state = render([ev('wait', { text: 'wait', busy_s: 0.1 })]);
    expect(state.status).toBe('waiting');
  });

  it('unknown kinds are ignored with a console warning', () => {
    const warn = vi.spyOn(console, 'warn').mockImplementation(() => {});
    const known = render([ev('char_visible', { visible_text: 'hi' })]);
    const withUnknown = render([
      ev('char_visible', { visible_text: 'hi' }),
      ev('telemetry_blob', { anything: 1 }),
    ]);
    expect(withUnknown).toEqual(known);
    expect(warn).toHaveBeenCalledOnce();
    warn.mockRestore();
  });

  it('stable boundary tracks segment_stable and never exceeds the text', () => {
    const state = render([
      ev('char_visible', { visible_text: 'One. Two' }),
      ev('segment_stable', { index: 0, text: 'One.' }),
    ]);
    expect(state.stableBoundary).toBe(4);

    const afterBackspace = applyEvent(
      state,
      ev('char_visible', { visible_text: 'On' }),
    );
    expect(afterBackspace.stableBoundary).toBeLessThanOrEqual(2);
  });

  it('memory truncation metrics trim the view and count the conflict', () => {
    const state = render([
      ev('inference_done', { entry_index: 0, inference_text: 'I1', segment_texts: ['A.'] }),
      ev('inference_done', { entry_index: 1, inference_text: 'I2', segment_texts: [' B.'] }),
      ev('metrics', { memory_truncated: 1, entries_remaining: 1 }),
    ]);
    expect(state.memoryView).toHaveLength(1);
    expect(state.memoryView[0]!.inference).toBe('I1');
    expect(state.truncations).toBe(1);
  });

  it('error events surface the message', () => {
    const state = render([ev('error', { message: 'backend gone' })]);
    expect(state.status).toBe('error');
    expect(state.errorMessage).toBe('backend gone');
  });
});
