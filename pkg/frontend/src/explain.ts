import type { ExplainPayload } from './types.js';

/** Terms sorted by |weight| descending, the order the panel renders. */
export function orderedTerms(payload: ExplainPayload): [string, number][] {
  return [...payload.terms].sort((a, b) => Math.abs(b[1]) - Math.abs(a[1]));
}

/**
 * Why one instance scored what it did: the most-relevant member as a
 * badge, that member's region rules, and the local surrogate terms as
 * signed bars (positive pushes the score up, negative down).
 */
export function renderExplainPanel(payload: ExplainPayload): HTMLElement {
  const el = document.createElement('section');
  el.className = 'explain-panel';

  const head = document.createElement('header');
  const badge = document.createElement('span');
  badge.className = 'member-badge';
  badge.textContent = `member ${payload.member}`;
  const score = document.createElement('span');
  score.className = 'explain-score';
  score.textContent = `instance ${payload.index}, score ${payload.score.toFixed(3)}`;
  head.append(badge, score);
  el.appendChild(head);

  const rules = document.createElement('ul');
  rules.className = 'region-rules';
  for (const rule of payload.rules) {
    const li = document.createElement('li');
    li.textContent = rule;
    rules.appendChild(li);
  }
  el.appendChild(rules);

  const terms = orderedTerms(payload);
  const maxW = Math.max(1e-12, ...terms.map(([, w]) => Math.abs(w)));
  const list = document.createElement('div');
  list.className = 'surrogate-terms';
  for (const [text, w] of terms) {
    const row = document.createElement('div');
    row.className = 'term-row';
    const label = document.createElement('span');
    label.className = 'term-text';
    label.textContent = text;
    const track = document.createElement('div');
    track.className = 'term-track';
    const bar = document.createElement('div');
    bar.className = `term-bar ${w >= 0 ? 'term-pos' : 'term-neg'}`;
    bar.style.width = `${((100 * Math.abs(w)) / maxW).toFixed(1)}%`;
    track.appendChild(bar);
    const value = document.createElement('span');
    value.className = 'term-weight';
    value.textContent = (w >= 0 ? '+' : '') + w.toFixed(3);
    row.append(label, track, value);
    list.appendChild(row);
  }
  el.appendChild(list);
  return el;
}
