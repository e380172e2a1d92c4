import type { Label, QueryPayload, RankRow } from './types.js';

/** Rank of the card's instance in the current top list, if it is there. */
export function cardRank(card: QueryPayload, top: RankRow[]): number | null {
  const row = top.find((r) => r.index === card.index);
  return row ? row.rank : null;
}

function barRow(label: string, width: number, text: string, cls: string): HTMLElement {
  const row = document.createElement('div');
  row.className = 'bar-row';
  const name = document.createElement('span');
  name.className = 'bar-label';
  name.textContent = label;
  const track = document.createElement('div');
  track.className = 'bar-track';
  const fill = document.createElement('div');
  fill.className = `bar-fill ${cls}`;
  fill.style.width = `${Math.max(0, Math.min(100, width)).toFixed(1)}%`;
  track.appendChild(fill);
  const value = document.createElement('span');
  value.className = 'bar-value';
  value.textContent = text;
  row.append(name, track, value);
  return row;
}

/**
 * The pending query: feature values plus one score bar and one relevance
 * bar per ensemble member, and the label buttons. Relevance widths map
 * [0,1] onto [0,100]% directly; score widths are relative to the card's
 * largest member score.
 */
export function renderQueryCard(
  card: QueryPayload,
  top: RankRow[],
  onLabel: (index: number, label: Label) => void,
): HTMLElement {
  const el = document.createElement('section');
  el.className = 'query-card';
  el.dataset.index = String(card.index);

  const head = document.createElement('header');
  const rank = cardRank(card, top);
  head.innerHTML = `<h2>instance ${card.index}</h2>` +
    `<span class="card-score">score ${card.score.toFixed(3)}</span>` +
    `<span class="card-rank">${rank === null ? 'below top list' : `rank ${rank}`}</span>`;
  el.appendChild(head);

  const table = document.createElement('table');
  table.className = 'feature-table';
  for (const [name, value] of Object.entries(card.features)) {
    const tr = document.createElement('tr');
    tr.innerHTML = `<td>${name}</td><td class="num">${value.toFixed(3)}</td>`;
    table.appendChild(tr);
  }
  el.appendChild(table);

  const members = document.createElement('div');
  members.className = 'member-bars';
  const maxScore = Math.max(1e-12, ...card.member_scores);
  card.member_scores.forEach((s, m) => {
    const p = card.relevance[m] ?? 0;
    members.appendChild(barRow(`m${m} score`, (100 * s) / maxScore, s.toFixed(2), 'score-bar'));
    members.appendChild(barRow(`m${m} relevance`, 100 * p, p.toFixed(2), 'relevance-bar'));
  });
  el.appendChild(members);

  const actions = document.createElement('div');
  actions.className = 'label-actions';
  for (const [text, label] of [['anomaly', 1], ['nominal', -1]] as Array<[string, Label]>) {
    const btn = document.createElement('button');
    btn.className = `label-btn label-${text}`;
    btn.textContent = text;
    btn.addEventListener('click', () => onLabel(card.index, label));
    actions.appendChild(btn);
  }
  el.appendChild(actions);
  return el;
}
