/** Thin client for the session service HTTP/SSE API. */

import type { ServiceConfig, SessionEvent } from './types.js';

export type Edit =
  | { op: 'append'; text: string }
  | { op: 'backspace'; count: number }
  | { op: 'finish' };

export interface SessionOptions {
  format?: string;
  granularity?: string;
  inference_model?: string;
  output_model?: string;
}

async function checkOk(response: Response): Promise<Response> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = JSON.stringify((await response.json()).detail);
    } catch {
      // keep the status text
    }
    throw new Error(`HTTP ${response.status}: ${detail}`);
  }
  return response;
}

export async function getConfig(base = ''): Promise<ServiceConfig> {
  const response = await checkOk(await fetch(`${base}/config`));
  return (await response.json()) as ServiceConfig;
}

export async function createSession(options: SessionOptions, base = ''): Promise<string> {
  const response = await checkOk(
    await fetch(`${base}/sessions`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(options),
    }),
  );
  const body = (await response.json()) as { session_id: string };
  return body.session_id;
}

export async function feed(sessionId: string, edit: Edit, base = ''): Promise<number> {
  const response = await checkOk(
    await fetch(`${base}/sessions/${sessionId}/feed`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(edit),
    }),
  );
  const body = (await response.json()) as { visible_len: number };
  return body.visible_len;
}

/**
 * Subscribe to the session event stream. The service replays past events
 * first, so reconnecting resumes cleanly. Returns a disposer.
 */
export function subscribeEvents(
  sessionId: string,
  onEvent: (event: SessionEvent) => void,
  onClose?: () => void,
  base = '',
): () => void {
  const source = new EventSource(`${base}/sessions/${sessionId}/events`);
  source.onmessage = (message) => {
    onEvent(JSON.parse(message.data) as SessionEvent);
  };
  source.onerror = () => {
    // the server closes the stream after the terminal event
    source.close();
    onClose?.();
  };
  return () => source.close();
}
