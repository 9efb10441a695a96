import { beforeEach, describe, expect, it, vi } from 'vitest';

import { App } from '../src/app';
import { ReviewApi } from '../src/api';
import type { BiasHistoryRecord } from '../src/types';

const LEDGER: BiasHistoryRecord[] = [
  {
    step: 0,
    sift_pipeline: 'Information gathering',
    bias_features: [],
    bias_detection_function: '',
    bias_mitigation_function: '',
    mitigation_success_status: '',
    details: 'Risk assessment indicates project should proceed through SIFT.',
  },
];

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), { status });
}

function makeApp(routes: Record<string, (init?: RequestInit) => Response>) {
  const fetchImpl = vi.fn(async (url: string, init?: RequestInit) => {
    const key = `${init?.method ?? 'GET'} ${url}`;
    const handler = routes[key];
    if (!handler) throw new Error(`unexpected request: ${key}`);
    return handler(init);
  });
  const root = document.createElement('div');
  document.body.replaceChildren(root);
  return { app: new App(new ReviewApi('', fetchImpl), root), root, fetchImpl };
}

describe('App', () => {
  beforeEach(() => {
    window.location.hash = '';
    document.body.innerHTML = '';
  });

  it('builds the queue from projects with open gates', async () => {
    const { app, root } = makeApp({
      'GET /projects': () => jsonResponse(200, { projects: ['a', 'b'] }),
      'GET /projects/a/gate': () =>
        jsonResponse(200, {
          gate_id: 'g1',
          project_id: 'a',
          pipeline: 'Pre-model',
          stage: 'Prepare data',
          prompt: 'Prepare the data.',
          options: ['done'],
          hog_refs: [],
        }),
      'GET /projects/b/gate': () => jsonResponse(404, { code: 'no_open_gate', message: '' }),
    });
    await app.showQueue();
    const items = [...root.querySelectorAll('.queue-item')];
    expect(items).toHaveLength(1);
    expect(items[0].getAttribute('data-project')).toBe('a');
  });

  it('renders a project view with a timeline equal to the export payload', async () => {
    const { app, root } = makeApp({
      'GET /projects/Svc2020': () =>
        jsonResponse(200, {
          project_id: 'Svc2020',
          name: 'Service early adopter model',
          description: 'd',
          data_location: 'mem://x',
          status: 'Active',
          revision: 1,
          similar_projects: [],
          older_versions: [],
          timeout_days: null,
          bias_history: LEDGER,
        }),
      'GET /projects/Svc2020/bias-history': () => jsonResponse(200, { bias_history: LEDGER }),
      'GET /projects/Svc2020/gate': () => jsonResponse(404, { code: 'no_open_gate', message: '' }),
    });
    await app.showProject('Svc2020');
    const rows = [...root.querySelectorAll('.timeline-step')];
    expect(rows).toHaveLength(LEDGER.length);
    expect(rows[0].querySelector('.details')?.textContent).toBe(LEDGER[0].details);
    expect(root.querySelector('.gate-area')?.innerHTML).toBe('');
  });

  it('shows the HOG panel next to an open gate', async () => {
    const { app, root } = makeApp({
      'GET /projects/p': () =>
        jsonResponse(200, {
          project_id: 'p',
          name: 'n',
          description: '',
          data_location: 'mem://x',
          status: 'Active',
          revision: 1,
          similar_projects: [],
          older_versions: [],
          timeout_days: null,
          bias_history: [],
        }),
      'GET /projects/p/bias-history': () => jsonResponse(200, { bias_history: [] }),
      'GET /projects/p/gate': () =>
        jsonResponse(200, {
          gate_id: 'g9',
          project_id: 'p',
          pipeline: 'Information gathering',
          stage: 'Risk assessment',
          prompt: 'Assess risk.',
          options: ['proceed', 'terminate', 'exit-and-revise'],
          hog_refs: [],
        }),
      'GET /hog?pipeline=Information%20gathering&stage=Risk%20assessment': () =>
        jsonResponse(200, {
          entries: [
            {
              sme_field: 'HR',
              question: 'What laws apply?',
              answer: '',
              stages: ['Information gathering :: Risk assessment'],
              tags: [],
            },
          ],
        }),
    });
    await app.showProject('p');
    expect(root.querySelector('.gate-form')).not.toBeNull();
    expect(root.querySelector('.hog-entry')?.getAttribute('data-sme')).toBe('HR');
  });

  it('launches a simulation with the chosen scenario and seed', async () => {
    const { app, root, fetchImpl } = makeApp({
      'POST /simulate/marketing': () =>
        jsonResponse(200, {
          project_id: 'Svc2020',
          status: 'Active',
          records: 1,
          blocked_at: { pipeline: 'Information gathering', stage: 'Risk assessment' },
        }),
    });
    app.showSimulationLauncher();
    const form = root.querySelector<HTMLFormElement>('.simulate-form')!;
    form.querySelector<HTMLSelectElement>('select[name=scenario]')!.value = 'project1';
    form.querySelector<HTMLInputElement>('input[name=seed]')!.value = '7';
    form.querySelector<HTMLInputElement>('input[name=interactive]')!.checked = true;
    form.dispatchEvent(new Event('submit', { cancelable: true }));
    await vi.waitFor(() => {
      expect(root.querySelector('.simulation-summary')).not.toBeNull();
    });
    const [, init] = fetchImpl.mock.calls[0];
    expect(JSON.parse(init!.body as string)).toEqual({
      scenario: 'project1',
      seed: 7,
      interactive: true,
    });
    expect(root.querySelector('.simulation-summary')?.textContent).toContain('Svc2020');
  });
});
