// Thin fetch wrappers over the broker HTTP gateway. Every result is a
// tagged union so callers keep their state on failure instead of
// throwing through the UI.

import { queryBody } from './query.js';
import type { JdfSnapshot, NodesResponse, Query, QueryResult } from './types.js';

export type ApiResult<T> = { ok: true; value: T } | { ok: false; error: string };

async function getJson<T>(url: string, timeoutMs = 10_000): Promise<ApiResult<T>> {
  try {
    const resp = await fetch(url, { signal: AbortSignal.timeout(timeoutMs) });
    if (!resp.ok) {
      return { ok: false, error: `${url}: HTTP ${resp.status}` };
    }
    return { ok: true, value: (await resp.json()) as T };
  } catch (err) {
    return { ok: false, error: `${url}: ${String(err)}` };
  }
}

export async function submitSearch(
  gatewayBase: string,
  query: Query,
  timeoutMs = 120_000,
): Promise<ApiResult<QueryResult>> {
  const url = `${gatewayBase}/query`;
  try {
    const resp = await fetch(url, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: queryBody(query),
      signal: AbortSignal.timeout(timeoutMs),
    });
    const text = await resp.text();
    if (!resp.ok) {
      return { ok: false, error: `${url}: HTTP ${resp.status}: ${text}` };
    }
    return { ok: true, value: JSON.parse(text) as QueryResult };
  } catch (err) {
    return { ok: false, error: `${url}: ${String(err)}` };
  }
}

export function getNodes(gatewayBase: string): Promise<ApiResult<NodesResponse>> {
  return getJson<NodesResponse>(`${gatewayBase}/nodes`, 5_000);
}

export async function getJob(
  gatewayBase: string,
  jobId: string,
): Promise<ApiResult<JdfSnapshot>> {
  const result = await getJson<{ found: boolean; jdf: JdfSnapshot | null }>(
    `${gatewayBase}/jobs/${jobId}`,
    5_000,
  );
  if (!result.ok) return result;
  if (!result.value.found || result.value.jdf === null) {
    return { ok: false, error: `job ${jobId} not found` };
  }
  return { ok: true, value: result.value.jdf };
}
