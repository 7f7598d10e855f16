/** Wire types mirrored from the session service. */

export type EventKind =
  | 'char_visible'
  | 'segment_stable'
  | 'inference_started'
  | 'inference_done'
  | 'wait'
  | 'output_started'
  | 'final_response'
  | 'metrics'
  | 'error';

export interface SessionEvent {
  kind: EventKind | string;
  payload: Record<string, unknown>;
  /** Monotonic seconds since session start. */
  t: number;
}

export interface MemoryEntryView {
  segments: string[];
  inference: string;
}

export interface Timers {
  input_s: number | null;
  latency_s: number | null;
  compute_s: number | null;
}

export type SessionStatus =
  | 'idle'
  | 'streaming'
  | 'inferring'
  | 'waiting'
  | 'answering'
  | 'done'
  | 'error';

export interface ViewState {
  typedText: string;
  /** Char offset up to which segments are stable; never exceeds typedText. */
  stableBoundary: number;
  stableSegments: string[];
  memoryView: MemoryEntryView[];
  eventLog: SessionEvent[];
  timers: Timers;
  status: SessionStatus;
  finalResponse: string | null;
  errorMessage: string | null;
  /** How many times the memory was truncated after an edit conflict. */
  truncations: number;
}

export interface ServiceConfig {
  formats: string[];
  granularities: string[];
  models: string[];
  defaults: {
    format: string;
    granularity: string;
    inference_model: string;
    output_model: string;
  };
}
