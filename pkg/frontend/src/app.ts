import { ApiError, HttpSessionApi, type SessionApi } from './api.js';
import { renderQueryCard } from './card.js';
import { SessionController, type SessionView } from './controller.js';
import { renderBudgetGauge, renderDiscoveryCurve } from './curve.js';
import { renderExplainPanel } from './explain.js';
import { renderStartForm } from './form.js';
import { renderScatter } from './scatter.js';
import { renderSummary } from './summary.js';
import type { DatasetListing, ExplainPayload } from './types.js';

const SESSION_KEY = 'glocal:sessionId';

/** One browser tab drives one session; the id survives reloads. */
export class App {
  private readonly controller: SessionController;
  private datasets: DatasetListing[] = [];
  private explanation: ExplainPayload | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: SessionApi,
    private readonly storage: Pick<Storage, 'getItem' | 'setItem' | 'removeItem'> = sessionStorage,
  ) {
    this.controller = new SessionController(api, (id) => {
      if (id === null) this.storage.removeItem(SESSION_KEY);
      else this.storage.setItem(SESSION_KEY, id);
    });
    this.controller.subscribe((view) => this.render(view));
  }

  async boot(): Promise<void> {
    const stored = this.storage.getItem(SESSION_KEY);
    if (stored) {
      try {
        await this.controller.resume(stored);
        return;
      } catch {
        this.storage.removeItem(SESSION_KEY);
      }
    }
    this.datasets = (await this.api.listDatasets()).datasets;
    this.render(this.controller.get());
  }

  private render(view: SessionView): void {
    this.root.replaceChildren();
    if (view.error) {
      const banner = document.createElement('p');
      banner.className = 'error-banner';
      banner.textContent = view.error;
      this.root.appendChild(banner);
    }
    if (view.phase === 'idle') this.renderStart();
    else if (view.phase === 'active') this.renderActive(view);
    else this.renderDone(view);
  }

  private renderStart(): void {
    const form = renderStartForm(this.datasets, async ({ dataset, config }) => {
      try {
        await this.controller.start(dataset, config);
      } catch (err) {
        form.showError(err instanceof ApiError ? err.message : String(err));
      }
    });
    this.root.appendChild(form);
  }

  private renderActive(view: SessionView): void {
    const layout = document.createElement('div');
    layout.className = 'layout';

    const left = document.createElement('div');
    left.className = 'pane';
    if (view.card) {
      if (this.explanation && this.explanation.index !== view.card.index) {
        this.explanation = null;
      }
      left.appendChild(
        renderQueryCard(view.card, view.top, (index, label) => {
          void this.controller.label(index, label);
        }),
      );
      const explainBtn = document.createElement('button');
      explainBtn.className = 'explain-btn';
      explainBtn.textContent = 'why this instance?';
      const cardIndex = view.card.index;
      explainBtn.addEventListener('click', async () => {
        try {
          this.explanation = await this.controller.explain(cardIndex);
          this.render(this.controller.get());
        } catch (err) {
          explainBtn.textContent = err instanceof Error ? err.message : String(err);
        }
      });
      left.appendChild(explainBtn);
    }
    if (this.explanation) left.appendChild(renderExplainPanel(this.explanation));
    layout.appendChild(left);

    const right = document.createElement('div');
    right.className = 'pane';
    right.appendChild(renderBudgetGauge(view.t, view.budget));
    right.appendChild(renderDiscoveryCurve(view.history, view.budget));
    if (view.dataset?.points && view.grid) {
      right.appendChild(
        renderScatter(view.dataset.points, view.grid, {
          queried: view.history,
          pendingIndex: view.card?.index ?? null,
          shadeMember: this.explanation?.member ?? null,
        }),
      );
    }
    layout.appendChild(right);
    this.root.appendChild(layout);
  }

  private renderDone(view: SessionView): void {
    this.root.appendChild(renderSummary(view.history, view.anomaliesFound, view.budget));
    if (view.dataset?.points && view.grid) {
      this.root.appendChild(
        renderScatter(view.dataset.points, view.grid, { queried: view.history }),
      );
    }
  }
}

export function main(): void {
  const root = document.getElementById('app');
  if (!root) throw new Error('missing #app element');
  const base = new URLSearchParams(location.search).get('api') ?? '';
  const app = new App(root, new HttpSessionApi(base));
  void app.boot();
}
