import type { TraceRow } from './types.js';

/** (iteration, cumulative anomalies) pairs straight from the trace. */
export function curvePoints(history: TraceRow[]): Array<[number, number]> {
  return history.map((r) => [r.iteration, r.cumulative_anomalies]);
}

/**
 * Discovery curve as an inline SVG: anomalies found vs labels spent.
 * The x axis always spans the full budget so the curve fills in
 * left to right as the session progresses.
 */
export function renderDiscoveryCurve(history: TraceRow[], budget: number, width = 320, height = 120): SVGSVGElement {
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('class', 'discovery-curve');
  const pad = 6;
  const points = curvePoints(history);
  const yMax = Math.max(1, ...points.map(([, c]) => c));
  const toX = (it: number) => pad + (it / Math.max(1, budget)) * (width - 2 * pad);
  const toY = (c: number) => height - pad - (c / yMax) * (height - 2 * pad);

  const line = document.createElementNS('http://www.w3.org/2000/svg', 'polyline');
  const coords = [[0, 0] as [number, number], ...points]
    .map(([it, c]) => `${toX(it).toFixed(1)},${toY(c).toFixed(1)}`)
    .join(' ');
  line.setAttribute('points', coords);
  line.setAttribute('fill', 'none');
  line.setAttribute('class', 'curve-line');
  svg.appendChild(line);
  return svg;
}

/** "t / B" budget gauge with a proportional fill bar. */
export function renderBudgetGauge(t: number, budget: number): HTMLElement {
  const wrap = document.createElement('div');
  wrap.className = 'budget-gauge';
  const text = document.createElement('span');
  text.className = 'budget-text';
  text.textContent = `${t} / ${budget}`;
  const bar = document.createElement('div');
  bar.className = 'budget-bar';
  const fill = document.createElement('div');
  fill.className = 'budget-fill';
  fill.style.width = `${budget > 0 ? Math.min(100, (100 * t) / budget) : 0}%`;
  bar.appendChild(fill);
  wrap.append(text, bar);
  return wrap;
}
