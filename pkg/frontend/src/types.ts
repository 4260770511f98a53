// Gateway wire shapes. These mirror the broker's JSON bodies exactly;
// the UI never invents fields of its own.

export type QueryKind = 'keyword' | 'multivariate';

export interface FieldConstraint {
  field: 'title' | 'authors' | 'keywords' | 'venue';
  token: string;
}

export interface YearConstraint {
  field: 'year';
  lo: number;
  hi: number;
}

export type Constraint = FieldConstraint | YearConstraint;

export interface Query {
  kind: QueryKind;
  text: string;
  constraints: Constraint[];
  top_k: number;
}

export interface Hit {
  record_id: number;
  score: number;
  partition_id: string;
  year: number;
  title: string;
}

export interface QueryResult {
  job_id: string;
  hits: Hit[];
  partial: boolean;
}

export interface TaskSnapshot {
  task_id: string;
  node_id: string;
  endpoint: string;
  partition_id: string;
  outcome: 'pending' | 'ok' | 'failed';
  error: string | null;
  attempts: number;
  stats: { partition_id: string; records_scanned: number; elapsed_ms: number } | null;
}

export interface JdfSnapshot {
  job_id: string;
  query: Query;
  tasks: TaskSnapshot[];
  result_sink: string;
  created_at: string;
  status: 'created' | 'dispatched' | 'merging' | 'done' | 'partial' | 'failed';
}

export interface NodeEntry {
  node_id: string;
  endpoint: string;
  vo_id: string;
  status: 'online' | 'offline';
  last_heartbeat: number;
  partitions: string[];
}

export interface NodesResponse {
  vo_id: string;
  nodes: NodeEntry[];
}
