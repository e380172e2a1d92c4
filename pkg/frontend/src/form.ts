import type { DatasetListing, SessionConfig } from './types.js';

export interface StartRequest {
  dataset: string;
  config: SessionConfig;
}

/** Client-side check before anything is sent; null means acceptable. */
export function validateConfig(config: SessionConfig): string | null {
  if (config.budget !== undefined && (!Number.isInteger(config.budget) || config.budget < 1)) {
    return 'budget must be a whole number of at least 1';
  }
  if (config.n_members !== undefined && (!Number.isInteger(config.n_members) || config.n_members < 1)) {
    return 'ensemble needs at least one member';
  }
  if (config.tau !== undefined && !(config.tau > 0 && config.tau < 0.5)) {
    return 'tau must sit in (0, 0.5)';
  }
  return null;
}

/**
 * Dataset picker plus the numeric knobs. Submitting validates locally
 * first and shows the problem inline; only a clean config reaches
 * `onStart`. Server-side rejections land in the same message slot via
 * `showError`.
 */
export function renderStartForm(
  datasets: DatasetListing[],
  onStart: (req: StartRequest) => void,
): HTMLElement & { showError: (msg: string) => void } {
  const el = document.createElement('form') as HTMLFormElement & { showError: (msg: string) => void };
  el.className = 'start-form';

  const select = document.createElement('select');
  select.name = 'dataset';
  for (const ds of datasets) {
    const opt = document.createElement('option');
    opt.value = ds.id;
    opt.textContent = `${ds.name} (${ds.n} x ${ds.d}, ${ds.anomalies} anomalies)`;
    select.appendChild(opt);
  }

  const numeric = (name: string, value: number, step = '1') => {
    const input = document.createElement('input');
    input.type = 'number';
    input.name = name;
    input.value = String(value);
    input.step = step;
    return input;
  };
  const budget = numeric('budget', 30);
  const members = numeric('n_members', 4);
  const seed = numeric('seed', 0);

  const message = document.createElement('p');
  message.className = 'form-error';
  message.hidden = true;

  const submit = document.createElement('button');
  submit.type = 'submit';
  submit.textContent = 'start session';

  const field = (label: string, input: HTMLElement) => {
    const wrap = document.createElement('label');
    wrap.textContent = label;
    wrap.appendChild(input);
    return wrap;
  };
  el.append(
    field('dataset', select),
    field('budget', budget),
    field('members', members),
    field('seed', seed),
    message,
    submit,
  );

  el.showError = (msg: string) => {
    message.textContent = msg;
    message.hidden = false;
  };

  el.addEventListener('submit', (ev) => {
    ev.preventDefault();
    const config: SessionConfig = {
      budget: Number(budget.value),
      n_members: Number(members.value),
      seed: Number(seed.value),
    };
    const problem = validateConfig(config);
    if (problem) {
      el.showError(problem);
      return;
    }
    message.hidden = true;
    onStart({ dataset: select.value, config });
  });
  return el;
}
