// Form state -> gateway query. The produced JSON must be byte-identical
// to what the CLI sends for the same logical query (golden-tested), so
// key order is fixed: kind, text, constraints, top_k; constraint keys
// field+token or field+lo+hi.

import type { Constraint, Query, QueryKind } from './types.js';

export interface PredicateRow {
  field: string;
  value: string;
}

export interface SearchFormState {
  mode: QueryKind;
  keyword: string;
  predicates: PredicateRow[];
  yearFrom: string; // raw input text; '' means unset
  yearTo: string;
  topK: string;
  targetBroker: string; // gateway base URL of the selected VO
}

export const PREDICATE_FIELDS = ['title', 'authors', 'keywords', 'venue'] as const;

export function emptyForm(broker: string): SearchFormState {
  return {
    mode: 'keyword',
    keyword: '',
    predicates: [],
    yearFrom: '',
    yearTo: '',
    topK: '10',
    targetBroker: broker,
  };
}

// Mirrors the server-side tokenizer for ASCII input: lowercase, split on
// every non-alphanumeric character, drop empties. Used only to validate
// that text will produce at least one token.
export function tokenize(text: string): string[] {
  return text.toLowerCase().split(/[^a-z0-9]+/).filter((t) => t.length > 0);
}

export interface BuildOk {
  ok: true;
  query: Query;
}

export interface BuildError {
  ok: false;
  errors: string[];
}

export function buildQuery(form: SearchFormState): BuildOk | BuildError {
  const errors: string[] = [];
  const topK = Number.parseInt(form.topK, 10);
  if (!Number.isFinite(topK) || topK < 1) {
    errors.push('top_k must be a positive integer');
  }

  if (form.mode === 'keyword') {
    if (tokenize(form.keyword).length === 0) {
      errors.push('keyword text needs at least one searchable token');
    }
    if (errors.length > 0) return { ok: false, errors };
    return {
      ok: true,
      query: { kind: 'keyword', text: form.keyword, constraints: [], top_k: topK },
    };
  }

  const constraints: Constraint[] = [];
  for (const row of form.predicates) {
    if (row.value.trim() === '') continue; // blank rows are ignored
    if (!(PREDICATE_FIELDS as readonly string[]).includes(row.field)) {
      errors.push(`unknown predicate field '${row.field}'`);
      continue;
    }
    if (tokenize(row.value).length === 0) {
      errors.push(`predicate on '${row.field}' has no searchable token`);
      continue;
    }
    constraints.push({ field: row.field as Constraint['field'], token: row.value } as Constraint);
  }
  const hasFrom = form.yearFrom.trim() !== '';
  const hasTo = form.yearTo.trim() !== '';
  if (hasFrom || hasTo) {
    const lo = Number.parseInt(hasFrom ? form.yearFrom : form.yearTo, 10);
    const hi = Number.parseInt(hasTo ? form.yearTo : form.yearFrom, 10);
    if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
      errors.push('year bounds must be integers');
    } else if (lo > hi) {
      errors.push('year range has lo > hi');
    } else {
      constraints.push({ field: 'year', lo, hi });
    }
  }
  if (constraints.length === 0) {
    errors.push('multivariate search needs at least one predicate');
  }
  if (errors.length > 0) return { ok: false, errors };
  return {
    ok: true,
    query: { kind: 'multivariate', text: '', constraints, top_k: topK },
  };
}

export function submitEnabled(form: SearchFormState): boolean {
  return buildQuery(form).ok;
}

// Canonical bytes of a query: key order is fixed by construction and
// JSON.stringify emits insertion order, matching the CLI's encoder.
export function queryBody(query: Query): string {
  return JSON.stringify(query);
}
