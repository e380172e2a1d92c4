import type { GridPayload, TraceRow } from './types.js';

/**
 * Cells where `member` carries the highest relevance of all members.
 * A member that dominates nowhere gets an all-false mask, so its
 * region simply draws nothing.
 */
export function argmaxRegionMask(grid: GridPayload, member: number): boolean[][] {
  const M = grid.relevance.length;
  return grid.ys.map((_, i) =>
    grid.xs.map((_, j) => {
      const mine = grid.relevance[member]?.[i]?.[j];
      if (mine === undefined) return false;
      for (let k = 0; k < M; k++) {
        if (k !== member && (grid.relevance[k]?.[i]?.[j] ?? -Infinity) > mine) return false;
      }
      return true;
    }),
  );
}

export interface ScatterOptions {
  /** indices into `points` that were already shown to the analyst */
  queried?: TraceRow[];
  pendingIndex?: number | null;
  /** shade the argmax region of this member, Fig-style */
  shadeMember?: number | null;
  size?: number;
}

/**
 * 2-D dataset view: the service's precomputed score grid as a heat layer,
 * the raw points on top, queried points circled, the pending query
 * highlighted. All numbers come from the payload; the client only scales
 * them onto the canvas.
 */
export function renderScatter(points: number[][], grid: GridPayload, opts: ScatterOptions = {}): SVGSVGElement {
  const size = opts.size ?? 360;
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('viewBox', `0 0 ${size} ${size}`);
  svg.setAttribute('class', 'scatter');

  const [x0, x1] = [grid.xs[0] ?? 0, grid.xs[grid.xs.length - 1] ?? 1];
  const [y0, y1] = [grid.ys[0] ?? 0, grid.ys[grid.ys.length - 1] ?? 1];
  const toX = (x: number) => ((x - x0) / (x1 - x0 || 1)) * size;
  const toY = (y: number) => size - ((y - y0) / (y1 - y0 || 1)) * size;

  const flat = grid.score.flat();
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  const cellW = size / grid.xs.length;
  const cellH = size / grid.ys.length;

  const heat = document.createElementNS('http://www.w3.org/2000/svg', 'g');
  heat.setAttribute('class', 'heat-layer');
  grid.score.forEach((row, i) => {
    row.forEach((s, j) => {
      const cell = document.createElementNS('http://www.w3.org/2000/svg', 'rect');
      cell.setAttribute('x', (j * cellW).toFixed(1));
      cell.setAttribute('y', (size - (i + 1) * cellH).toFixed(1));
      cell.setAttribute('width', cellW.toFixed(1));
      cell.setAttribute('height', cellH.toFixed(1));
      cell.setAttribute('fill-opacity', (hi > lo ? (s - lo) / (hi - lo) : 0).toFixed(3));
      cell.setAttribute('class', 'heat-cell');
      heat.appendChild(cell);
    });
  });
  svg.appendChild(heat);

  if (opts.shadeMember !== null && opts.shadeMember !== undefined) {
    const mask = argmaxRegionMask(grid, opts.shadeMember);
    const shade = document.createElementNS('http://www.w3.org/2000/svg', 'g');
    shade.setAttribute('class', 'region-layer');
    mask.forEach((row, i) => {
      row.forEach((on, j) => {
        if (!on) return;
        const cell = document.createElementNS('http://www.w3.org/2000/svg', 'rect');
        cell.setAttribute('x', (j * cellW).toFixed(1));
        cell.setAttribute('y', (size - (i + 1) * cellH).toFixed(1));
        cell.setAttribute('width', cellW.toFixed(1));
        cell.setAttribute('height', cellH.toFixed(1));
        cell.setAttribute('class', 'region-cell');
        shade.appendChild(cell);
      });
    });
    svg.appendChild(shade);
  }

  const queried = new Map<number, TraceRow>();
  for (const r of opts.queried ?? []) queried.set(r.queried_index, r);

  const dots = document.createElementNS('http://www.w3.org/2000/svg', 'g');
  dots.setAttribute('class', 'point-layer');
  points.forEach((p, idx) => {
    const [px, py] = [p[0] ?? 0, p[1] ?? 0];
    const dot = document.createElementNS('http://www.w3.org/2000/svg', 'circle');
    dot.setAttribute('cx', toX(px).toFixed(1));
    dot.setAttribute('cy', toY(py).toFixed(1));
    dot.setAttribute('r', '2');
    const row = queried.get(idx);
    let cls = 'pt';
    if (row) cls += row.label === 1 ? ' pt-queried pt-anomaly' : ' pt-queried pt-nominal';
    if (idx === opts.pendingIndex) cls += ' pt-pending';
    dot.setAttribute('class', cls);
    dots.appendChild(dot);
  });
  svg.appendChild(dots);
  return svg;
}
