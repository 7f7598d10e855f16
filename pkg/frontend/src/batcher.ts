/**
 * Turns raw textarea snapshots into batched feed edits.
 *
 * Keystrokes are accumulated for up to 50 ms and collapsed into at most one
 * backspace plus one append per flush, bounding the request rate while the
 * service still sees every intermediate state it needs.
 */

import type { Edit } from './api.js';

export const BATCH_WINDOW_MS = 50;

function commonPrefixLength(a: string, b: string): number {
  const limit = Math.min(a.length, b.length);
  let i = 0;
  while (i < limit && a[i] === b[i]) i += 1;
  return i;
}

/** Edits that transform `sent` into `current`: backspace to the common
 * prefix, then append the rest. */
export function diffEdits(sent: string, current: string): Edit[] {
  if (sent === current) return [];
  const keep = commonPrefixLength(sent, current);
  const edits: Edit[] = [];
  if (keep < sent.length) {
    edits.push({ op: 'backspace', count: sent.length - keep });
  }
  if (keep < current.length) {
    edits.push({ op: 'append', text: current.slice(keep) });
  }
  return edits;
}

export class EditBatcher {
  private sentText = '';
  private pendingText: string | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private closed = false;

  constructor(
    private readonly send: (edit: Edit) => void,
    private readonly windowMs: number = BATCH_WINDOW_MS,
  ) {}

  /** Record the latest full text; flushes after at most windowMs. */
  update(text: string): void {
    if (this.closed) return;
    this.pendingText = text;
    if (this.timer === null) {
      this.timer = setTimeout(() => this.flush(), this.windowMs);
    }
  }

  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    if (this.pendingText === null || this.closed) return;
    for (const edit of diffEdits(this.sentText, this.pendingText)) {
      this.send(edit);
    }
    this.sentText = this.pendingText;
    this.pendingText = null;
  }

  /** Flush outstanding edits, then emit finish and refuse further input. */
  finish(): void {
    this.flush();
    if (!this.closed) {
      this.closed = true;
      this.send({ op: 'finish' });
    }
  }

  get isClosed(): boolean {
    return this.closed;
  }
}
