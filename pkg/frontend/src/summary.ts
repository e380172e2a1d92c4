import type { TraceRow } from './types.js';

/** The final trace as CSV, one row per label, for the download link. */
export function traceCsv(history: TraceRow[]): string {
  const lines = ['iteration,queried_index,label,cumulative_anomalies,loss'];
  for (const r of history) {
    lines.push(`${r.iteration},${r.queried_index},${r.label},${r.cumulative_anomalies},${r.loss}`);
  }
  return lines.join('\n') + '\n';
}

/** End-of-session screen: totals, the label history, a trace download. */
export function renderSummary(history: TraceRow[], anomaliesFound: number, budget: number): HTMLElement {
  const el = document.createElement('section');
  el.className = 'summary';

  const head = document.createElement('h2');
  head.textContent = `budget spent: ${anomaliesFound} anomalies in ${history.length} labels`;
  el.appendChild(head);

  const gauge = document.createElement('p');
  gauge.className = 'summary-budget';
  gauge.textContent = `${history.length} / ${budget} labels used`;
  el.appendChild(gauge);

  const table = document.createElement('table');
  table.className = 'trace-table';
  table.innerHTML =
    '<tr><th>#</th><th>instance</th><th>label</th><th>found</th><th>loss</th></tr>';
  for (const r of history) {
    const tr = document.createElement('tr');
    tr.innerHTML =
      `<td>${r.iteration}</td><td>${r.queried_index}</td>` +
      `<td>${r.label === 1 ? 'anomaly' : 'nominal'}</td>` +
      `<td>${r.cumulative_anomalies}</td><td>${r.loss.toFixed(4)}</td>`;
    table.appendChild(tr);
  }
  el.appendChild(table);

  const link = document.createElement('a');
  link.className = 'trace-download';
  link.textContent = 'download trace.csv';
  link.download = 'trace.csv';
  link.href = `data:text/csv;charset=utf-8,${encodeURIComponent(traceCsv(history))}`;
  el.appendChild(link);
  return el;
}
