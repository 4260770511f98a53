// Pure view models and HTML renderers. Everything here is a function of
// the last gateway responses plus form state; no hidden state, no DOM
// reads, so the whole layer is testable as strings.

import type { Hit, JdfSnapshot, NodesResponse, QueryResult } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

// partition id -> VO id, joined from every configured broker's registry.
export function buildPartitionVoMap(registries: NodesResponse[]): Record<string, string> {
  const map: Record<string, string> = {};
  for (const registry of registries) {
    for (const node of registry.nodes) {
      for (const pid of node.partitions) {
        map[pid] = node.vo_id;
      }
    }
  }
  return map;
}

export interface ResultRow {
  recordId: number;
  title: string;
  terms: string[];
  year: number;
  score: number;
  partition: string;
  vo: string;
}

export interface ResultViewModel {
  jobId: string | null;
  partial: boolean;
  rows: ResultRow[];
  error: string | null;
}

export function resultViewModel(
  result: QueryResult | null,
  error: string | null,
  partitionVo: Record<string, string>,
): ResultViewModel {
  if (error !== null || result === null) {
    return { jobId: null, partial: false, rows: [], error };
  }
  const rows = result.hits.map((hit: Hit) => ({
    recordId: hit.record_id,
    title: hit.title,
    terms: hit.title.split(/\s+/).filter((t) => t.length > 0),
    year: hit.year,
    score: hit.score,
    partition: hit.partition_id,
    vo: partitionVo[hit.partition_id] ?? '?',
  }));
  return { jobId: result.job_id, partial: result.partial, rows, error: null };
}

export function renderResults(vm: ResultViewModel): string {
  if (vm.error !== null) {
    return `<div class="error-banner">${escapeHtml(vm.error)}</div>`;
  }
  if (vm.jobId === null) {
    return '<div class="empty">No search yet.</div>';
  }
  const badge = vm.partial
    ? '<span class="badge badge-partial">partial result</span>'
    : '<span class="badge badge-complete">complete</span>';
  const head = `<div class="result-meta">job <code>${escapeHtml(vm.jobId)}</code> ${badge}</div>`;
  if (vm.rows.length === 0) {
    return `${head}<div class="empty">No hits.</div>`;
  }
  const body = vm.rows
    .map((row) => {
      const terms = row.terms
        .map(
          (t) =>
            `<span class="term" data-term="${escapeHtml(t)}">${escapeHtml(t)}</span>`,
        )
        .join(' ');
      return (
        `<tr><td class="title-cell">${terms}</td><td>${row.year}</td>` +
        `<td>${row.score}</td><td>${escapeHtml(row.vo)}</td>` +
        `<td><code>${escapeHtml(row.partition)}</code></td><td>${row.recordId}</td></tr>`
      );
    })
    .join('');
  return (
    `${head}<table class="results"><thead><tr>` +
    '<th>title</th><th>year</th><th>score</th><th>VO</th><th>partition</th><th>id</th>' +
    `</tr></thead><tbody>${body}</tbody></table>`
  );
}

export interface VoPanel {
  broker: string;
  voId: string | null;
  stale: boolean;
  nodes: { nodeId: string; status: string; partitions: string[] }[];
}

export interface StatusViewModel {
  vos: VoPanel[];
  job: JdfSnapshot | null;
  jobStale: boolean;
}

export function statusViewModel(
  brokers: string[],
  registries: Map<string, NodesResponse>,
  stale: Map<string, boolean>,
  job: JdfSnapshot | null,
  jobStale: boolean,
): StatusViewModel {
  const vos = brokers.map((broker) => {
    const registry = registries.get(broker);
    return {
      broker,
      voId: registry ? registry.vo_id : null,
      stale: stale.get(broker) ?? true,
      nodes: registry
        ? registry.nodes.map((n) => ({
            nodeId: n.node_id,
            status: n.status,
            partitions: n.partitions,
          }))
        : [],
    };
  });
  return { vos, job, jobStale };
}

export function renderStatus(vm: StatusViewModel): string {
  const voBlocks = vm.vos
    .map((vo) => {
      const staleMark = vo.stale ? ' <span class="stale">stale</span>' : '';
      const name = vo.voId ?? vo.broker;
      const nodes = vo.nodes.length
        ? vo.nodes
            .map(
              (n) =>
                `<li class="node node-${n.status}" data-node="${escapeHtml(n.nodeId)}">` +
                `${escapeHtml(n.nodeId)} <span class="status">${n.status}</span>` +
                ` <small>${n.partitions.map(escapeHtml).join(', ')}</small></li>`,
            )
            .join('')
        : '<li class="empty">no nodes</li>';
      return `<div class="vo-panel"><h3>${escapeHtml(name)}${staleMark}</h3><ul>${nodes}</ul></div>`;
    })
    .join('');

  let jobBlock = '<div class="empty">No job submitted yet.</div>';
  if (vm.job !== null) {
    const staleMark = vm.jobStale ? ' <span class="stale">stale</span>' : '';
    const tasks = vm.job.tasks
      .map(
        (t) =>
          `<li class="task task-${t.outcome}">${escapeHtml(t.task_id)} ` +
          `${escapeHtml(t.partition_id)} on ${escapeHtml(t.node_id)}: ` +
          `<span class="outcome">${t.outcome}</span>` +
          (t.error ? ` <small>${escapeHtml(t.error)}</small>` : '') +
          '</li>',
      )
      .join('');
    jobBlock =
      `<div class="job-panel"><h3>job <code>${escapeHtml(vm.job.job_id)}</code> ` +
      `<span class="job-status job-${vm.job.status}">${vm.job.status}</span>${staleMark}</h3>` +
      `<ul>${tasks}</ul></div>`;
  }
  return `<div class="vo-panels">${voBlocks}</div>${jobBlock}`;
}
