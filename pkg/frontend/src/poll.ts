// 2-second polling of every configured broker's registry plus the last
// submitted job. Poll failures keep the previous snapshot and raise a
// stale flag; a later success clears it (last write wins).

import { getJob, getNodes } from './api.js';
import type { ApiResult } from './api.js';
import type { JdfSnapshot, NodesResponse } from './types.js';

export const POLL_INTERVAL_MS = 2_000;

export interface PollState {
  registries: Map<string, NodesResponse>;
  stale: Map<string, boolean>;
  job: JdfSnapshot | null;
  jobStale: boolean;
}

export function initialPollState(): PollState {
  return { registries: new Map(), stale: new Map(), job: null, jobStale: false };
}

export function applyNodesResult(
  state: PollState,
  broker: string,
  result: ApiResult<NodesResponse>,
): PollState {
  const registries = new Map(state.registries);
  const stale = new Map(state.stale);
  if (result.ok) {
    registries.set(broker, result.value);
    stale.set(broker, false);
  } else {
    stale.set(broker, true); // keep the last snapshot
  }
  return { ...state, registries, stale };
}

export function applyJobResult(
  state: PollState,
  result: ApiResult<JdfSnapshot>,
): PollState {
  if (result.ok) {
    return { ...state, job: result.value, jobStale: false };
  }
  return { ...state, jobStale: true };
}

export type Fetchers = {
  nodes: (broker: string) => Promise<ApiResult<NodesResponse>>;
  job: (broker: string, jobId: string) => Promise<ApiResult<JdfSnapshot>>;
};

export class StatusPoller {
  private state = initialPollState();
  private timer: ReturnType<typeof setInterval> | null = null;
  private jobTarget: { broker: string; jobId: string } | null = null;
  private inFlight = false;

  constructor(
    private brokers: string[],
    private onChange: (state: PollState) => void,
    private fetchers: Fetchers = { nodes: getNodes, job: getJob },
    private intervalMs: number = POLL_INTERVAL_MS,
  ) {}

  start(): void {
    if (this.timer !== null) return;
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  setBrokers(brokers: string[]): void {
    this.brokers = brokers;
  }

  watchJob(broker: string, jobId: string): void {
    this.jobTarget = { broker, jobId };
  }

  snapshot(): PollState {
    return this.state;
  }

  async tick(): Promise<void> {
    if (this.inFlight) return; // skip a beat rather than pile up
    this.inFlight = true;
    try {
      for (const broker of this.brokers) {
        const result = await this.fetchers.nodes(broker);
        this.state = applyNodesResult(this.state, broker, result);
      }
      if (this.jobTarget !== null) {
        const result = await this.fetchers.job(this.jobTarget.broker, this.jobTarget.jobId);
        this.state = applyJobResult(this.state, result);
      }
      this.onChange(this.state);
    } finally {
      this.inFlight = false;
    }
  }
}
