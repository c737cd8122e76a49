/**
 * NDJSON count streaming.
 *
 * The counts endpoint emits one JSON object per line and keeps the
 * connection open while the run is active. The subscription tracks the
 * last interval it has seen and reconnects with `after_ps` set to it,
 * so a dropped connection resumes from the last interval instead of
 * replaying or skipping.
 */

import type { CountRecordWire } from "./types.js";

/** Parse an NDJSON byte stream, yielding one parsed object per line. */
export async function* ndjsonObjects<T>(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<T, void, void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buf = "";
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buf += decoder.decode(value, { stream: true });
      let nl;
      while ((nl = buf.indexOf("\n")) >= 0) {
        const line = buf.slice(0, nl).trim();
        buf = buf.slice(nl + 1);
        if (line) yield JSON.parse(line) as T;
      }
    }
    const tail = (buf + decoder.decode()).trim();
    if (tail) yield JSON.parse(tail) as T;
  } finally {
    reader.releaseLock();
  }
}

export interface CountsSource {
  /** GET the counts stream; mirrors ConsoleApi.fetchCounts. */
  fetchCounts(
    handleId: string,
    opts: { follow: boolean; afterPs: number; signal?: AbortSignal },
  ): Promise<Response>;
}

export interface SubscriptionOpts {
  follow?: boolean;
  /** resume point; records with interval_start_ps <= afterPs are skipped */
  afterPs?: number;
  onRecord: (record: CountRecordWire) => void;
  onEnd?: () => void;
  /** transport failure; return false to stop instead of reconnecting */
  onRetry?: (error: unknown, attempt: number) => boolean;
  retryDelayMs?: number;
}

/**
 * One live subscription per dashboard. start() resolves when the
 * stream ends cleanly or the subscription is stopped.
 */
export class CountsSubscription {
  lastIntervalPs: number;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(
    private readonly source: CountsSource,
    private readonly handleId: string,
    private readonly opts: SubscriptionOpts,
  ) {
    this.lastIntervalPs = opts.afterPs ?? -1;
  }

  async start(): Promise<void> {
    let attempt = 0;
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const res = await this.source.fetchCounts(this.handleId, {
          follow: this.opts.follow ?? true,
          afterPs: this.lastIntervalPs,
          signal: this.controller.signal,
        });
        if (!res.body) throw new Error("counts response has no body");
        for await (const record of ndjsonObjects<CountRecordWire>(res.body)) {
          if (this.stopped) return;
          if (record.interval_start_ps <= this.lastIntervalPs) continue;
          this.lastIntervalPs = record.interval_start_ps;
          this.opts.onRecord(record);
        }
        this.opts.onEnd?.();
        return;
      } catch (err) {
        if (this.stopped) return;
        attempt += 1;
        const goOn = this.opts.onRetry?.(err, attempt) ?? true;
        if (!goOn) return;
        await sleep(this.opts.retryDelayMs ?? 1000);
      }
    }
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
