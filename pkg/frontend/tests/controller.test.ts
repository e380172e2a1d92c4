import { describe, expect, it } from 'vitest';

import { ApiError } from '../src/api.js';
import { SessionController } from '../src/controller.js';
import { curvePoints } from '../src/curve.js';
import { FakeApi } from './fake_api.js';

async function started(api: FakeApi) {
  const controller = new SessionController(api);
  await controller.start('probe', { budget: api.budget, seed: 0 });
  return controller;
}

describe('label flow', () => {
  it('shows the first card after start', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    const view = controller.get();
    expect(view.phase).toBe('active');
    expect(view.card?.index).toBe(0);
    expect(view.t).toBe(0);
  });

  it('replaces the card with the next query after a label', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    const accepted = await controller.label(0, -1);
    expect(accepted).toBe(true);
    const view = controller.get();
    expect(view.card?.index).toBe(5);
    expect(view.t).toBe(1);
    expect(view.history).toHaveLength(1);
    expect(view.history[0]?.queried_index).toBe(0);
    expect(view.history[0]?.label).toBe(-1);
  });

  it('keeps exactly one pending card at a time', async () => {
    const api = new FakeApi();
    const controller = await started(api);
    await controller.label(0, 1);
    const view = controller.get();
    expect(view.card).not.toBeNull();
    expect(view.history.map((r) => r.queried_index)).not.toContain(view.card?.index);
  });

  it('drops a submit for an index that is not the pending card', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    const accepted = await controller.label(3, 1);
    expect(accepted).toBe(false);
    expect(api.submitCalls).toBe(0);
    expect(controller.get().card?.index).toBe(0);
  });

  it('treats a second submit of the same card as a no-op', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    const first = controller.label(0, 1);
    const second = controller.label(0, 1);
    expect(await first).toBe(true);
    expect(await second).toBe(false);
    expect(api.submitCalls).toBe(1);
    expect(controller.get().t).toBe(1);
  });
});

describe('discovery curve', () => {
  it('increments exactly on anomaly labels', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1, 2], budget: 4 });
    const controller = await started(api);
    await controller.label(0, 1);
    expect(controller.get().anomaliesFound).toBe(1);
    await controller.label(5, -1);
    expect(controller.get().anomaliesFound).toBe(1);
    await controller.label(1, 1);
    expect(controller.get().anomaliesFound).toBe(2);

    const points = curvePoints(controller.get().history);
    expect(points).toEqual([
      [1, 1],
      [2, 1],
      [3, 2],
    ]);
  });

  it('never decreases along the history', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1, 2], budget: 4 });
    const controller = await started(api);
    for (const label of [-1, 1, -1, 1] as const) {
      const index = controller.get().card?.index;
      await controller.label(index ?? -1, label);
    }
    const counts = controller.get().history.map((r) => r.cumulative_anomalies);
    for (let i = 1; i < counts.length; i++) {
      expect(counts[i]).toBeGreaterThanOrEqual(counts[i - 1] ?? 0);
    }
  });
});

describe('stale-card conflict', () => {
  it('refetches the real pending card after a 409', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    expect(controller.get().card?.index).toBe(0);

    api.externalAdvance(-1);
    const accepted = await controller.label(0, 1);

    expect(accepted).toBe(false);
    expect(controller.get().card?.index).toBe(5);
    expect(controller.get().t).toBe(1);
    expect(controller.get().error).toMatch(/pending query is 5/);
  });

  it('can label normally after recovering', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    const controller = await started(api);
    api.externalAdvance(-1);
    await controller.label(0, 1);

    const accepted = await controller.label(5, 1);
    expect(accepted).toBe(true);
    expect(controller.get().error).toBeNull();
    expect(controller.get().anomaliesFound).toBe(1);
  });

  it('keeps the card and reports other failures', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1] });
    api.submitLabel = async () => {
      throw new ApiError(500, 'server_error', 'histogram exploded');
    };
    const controller = await started(api);
    const accepted = await controller.label(0, 1);
    expect(accepted).toBe(false);
    expect(controller.get().card?.index).toBe(0);
    expect(controller.get().error).toMatch(/histogram exploded/);
  });
});

describe('budget exhaustion', () => {
  it('moves to the summary phase when the budget is spent', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1, 2], budget: 2 });
    const controller = await started(api);
    await controller.label(0, 1);
    expect(controller.get().phase).toBe('active');
    await controller.label(5, -1);

    const view = controller.get();
    expect(view.phase).toBe('done');
    expect(view.card).toBeNull();
    expect(view.history).toHaveLength(2);
    expect(view.anomaliesFound).toBe(1);
  });

  it('drops labels once done', async () => {
    const api = new FakeApi({ queryOrder: [0, 5], budget: 1 });
    const controller = await started(api);
    await controller.label(0, 1);
    const calls = api.submitCalls;
    expect(await controller.label(5, 1)).toBe(false);
    expect(api.submitCalls).toBe(calls);
  });
});

describe('resume', () => {
  it('rebuilds a mid-session view from the server state', async () => {
    const api = new FakeApi({ queryOrder: [0, 5, 1, 2], budget: 4 });
    await api.createSession('probe', {});
    api.externalAdvance(1);
    api.externalAdvance(-1);

    const controller = new SessionController(api);
    await controller.resume('fake00000001');
    const view = controller.get();
    expect(view.phase).toBe('active');
    expect(view.t).toBe(2);
    expect(view.card?.index).toBe(1);
    expect(view.history).toHaveLength(2);
    expect(view.anomaliesFound).toBe(1);
  });

  it('lands on the summary when resuming a finished session', async () => {
    const api = new FakeApi({ queryOrder: [0, 5], budget: 2 });
    await api.createSession('probe', {});
    api.externalAdvance(1);
    api.externalAdvance(1);

    const controller = new SessionController(api);
    await controller.resume('fake00000001');
    expect(controller.get().phase).toBe('done');
    expect(controller.get().anomaliesFound).toBe(2);
  });
});

describe('session id persistence', () => {
  it('reports the id on start and clears it when the session ends', async () => {
    const ids: Array<string | null> = [];
    const api = new FakeApi({ queryOrder: [0, 5], budget: 1 });
    const controller = new SessionController(api, (id) => ids.push(id));
    await controller.start('probe', {});
    expect(ids).toEqual(['fake00000001']);
    await controller.label(0, 1);
    expect(ids).toEqual(['fake00000001', null]);
  });
});
