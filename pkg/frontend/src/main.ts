// DOM wiring: reads the form, delegates everything else to the pure
// query/view/poll modules. At most one search is in flight at a time.

import { submitSearch } from './api.js';
import { buildQuery, emptyForm, PREDICATE_FIELDS, type SearchFormState } from './query.js';
import { StatusPoller, type PollState } from './poll.js';
import {
  buildPartitionVoMap,
  renderResults,
  renderStatus,
  resultViewModel,
  statusViewModel,
} from './view.js';
import type { QueryResult } from './types.js';

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (el === null) throw new Error(`missing element #${id}`);
  return el as T;
};

const DEFAULT_BROKERS = 'http://127.0.0.1:8001';

function brokerList(): string[] {
  return ($<HTMLInputElement>('brokers').value || DEFAULT_BROKERS)
    .split(',')
    .map((b) => b.trim().replace(/\/$/, ''))
    .filter((b) => b.length > 0);
}

let form: SearchFormState = emptyForm('');
let lastResult: QueryResult | null = null;
let lastError: string | null = null;
let searching = false;
let pollState: PollState | null = null;

function readForm(): SearchFormState {
  const predicates = Array.from(document.querySelectorAll('.pred-row')).map((row) => ({
    field: (row.querySelector('.pred-field') as HTMLSelectElement).value,
    value: (row.querySelector('.pred-value') as HTMLInputElement).value,
  }));
  return {
    mode: $<HTMLSelectElement>('mode').value as SearchFormState['mode'],
    keyword: $<HTMLInputElement>('keyword').value,
    predicates,
    yearFrom: $<HTMLInputElement>('year-from').value,
    yearTo: $<HTMLInputElement>('year-to').value,
    topK: $<HTMLInputElement>('top-k').value,
    targetBroker: $<HTMLSelectElement>('target-vo').value,
  };
}

function refreshValidity(): void {
  form = readForm();
  const built = buildQuery(form);
  const button = $<HTMLButtonElement>('submit');
  button.disabled = !built.ok || searching;
  $('form-errors').textContent = built.ok ? '' : built.errors.join('; ');
  document.querySelectorAll<HTMLElement>('.keyword-only').forEach((el) => {
    el.style.display = form.mode === 'keyword' ? '' : 'none';
  });
  document.querySelectorAll<HTMLElement>('.multi-only').forEach((el) => {
    el.style.display = form.mode === 'multivariate' ? '' : 'none';
  });
}

function rerenderResults(): void {
  const voMap = pollState ? buildPartitionVoMap([...pollState.registries.values()]) : {};
  $('results').innerHTML = renderResults(resultViewModel(lastResult, lastError, voMap));
}

function rerenderStatus(): void {
  if (pollState === null) return;
  const vm = statusViewModel(
    brokerList(),
    pollState.registries,
    pollState.stale,
    pollState.job,
    pollState.jobStale,
  );
  $('status').innerHTML = renderStatus(vm);
}

function addPredicateRow(field = 'title', value = ''): void {
  const row = document.createElement('div');
  row.className = 'pred-row';
  const options = PREDICATE_FIELDS.map(
    (f) => `<option value="${f}"${f === field ? ' selected' : ''}>${f}</option>`,
  ).join('');
  row.innerHTML =
    `<select class="pred-field">${options}</select>` +
    `<input class="pred-value" placeholder="exact token" value="${value}">` +
    '<button type="button" class="pred-remove">×</button>';
  row.querySelector('.pred-remove')!.addEventListener('click', () => {
    row.remove();
    refreshValidity();
  });
  row.querySelectorAll('select,input').forEach((el) => {
    el.addEventListener('input', refreshValidity);
  });
  $('pred-rows').appendChild(row);
  refreshValidity();
}

async function runSearch(): Promise<void> {
  const built = buildQuery(readForm());
  if (!built.ok || searching) return;
  searching = true;
  refreshValidity();
  const target = $<HTMLSelectElement>('target-vo').value;
  const outcome = await submitSearch(target, built.query);
  if (outcome.ok) {
    lastResult = outcome.value;
    lastError = null;
    poller.watchJob(target, outcome.value.job_id);
    void poller.tick();
  } else {
    // Gateway unreachable: keep the form and last result, show the error.
    lastError = outcome.error;
  }
  searching = false;
  refreshValidity();
  rerenderResults();
}

function refreshBrokerSelector(): void {
  const select = $<HTMLSelectElement>('target-vo');
  const current = select.value;
  select.innerHTML = '';
  for (const broker of brokerList()) {
    const opt = document.createElement('option');
    opt.value = broker;
    const vo = pollState?.registries.get(broker)?.vo_id;
    opt.textContent = vo ? `${vo} (${broker})` : broker;
    select.appendChild(opt);
  }
  if ([...select.options].some((o) => o.value === current)) select.value = current;
}

const poller = new StatusPoller(brokerList(), (state) => {
  pollState = state;
  refreshBrokerSelector();
  rerenderStatus();
  rerenderResults();
});

function init(): void {
  const params = new URLSearchParams(window.location.search);
  const brokers = params.get('brokers') ?? DEFAULT_BROKERS;
  $<HTMLInputElement>('brokers').value = brokers;

  $('add-pred').addEventListener('click', () => addPredicateRow());
  $('submit').addEventListener('click', () => void runSearch());
  $('brokers').addEventListener('change', () => {
    poller.setBrokers(brokerList());
    refreshBrokerSelector();
    void poller.tick();
  });
  ['mode', 'keyword', 'year-from', 'year-to', 'top-k'].forEach((id) => {
    $(id).addEventListener('input', refreshValidity);
  });
  // Clicking a term in a result row seeds the next keyword query.
  $('results').addEventListener('click', (ev) => {
    const target = ev.target as HTMLElement;
    const term = target.dataset?.term;
    if (term) {
      $<HTMLSelectElement>('mode').value = 'keyword';
      $<HTMLInputElement>('keyword').value = term;
      refreshValidity();
    }
  });

  refreshBrokerSelector();
  refreshValidity();
  rerenderResults();
  poller.start();
}

init();
