import { describe, expect, it } from 'vitest';

import {
  renderGateForm,
  renderGateQueue,
  renderHogPanel,
  renderProjectSummary,
  renderSimulationSummary,
  renderTimeline,
} from '../src/render';
import type { BiasHistoryRecord, PendingGate, ProjectDocument } from '../src/types';

const RECORDS: BiasHistoryRecord[] = [
  {
    step: 0,
    sift_pipeline: 'Information gathering',
    bias_features: [],
    bias_detection_function: '',
    bias_mitigation_function: '',
    mitigation_success_status: '',
    details: 'Risk assessment indicates project should proceed through SIFT.',
  },
  {
    step: 1,
    sift_pipeline: 'Pre-model',
    bias_features: ['marital_status', 'race', 'sex'],
    bias_detection_function: 'computeSampProportion',
    bias_mitigation_function: '',
    mitigation_success_status: '',
    details: 'Get additional data.',
  },
  {
    step: 2,
    sift_pipeline: 'Exit SIFT',
    bias_features: [],
    bias_detection_function: '',
    bias_mitigation_function: '',
    mitigation_success_status: '',
    details: 'Team will collect additional data.  Project terminated and added to project database.',
  },
];

function parse(html: string): Document {
  return new DOMParser().parseFromString(html, 'text/html');
}

describe('renderTimeline', () => {
  it('renders one row per record, in step order, with every field', () => {
    const doc = parse(renderTimeline(RECORDS));
    const rows = [...doc.querySelectorAll('.timeline-step')];
    expect(rows).toHaveLength(3);
    rows.forEach((row, i) => {
      const record = RECORDS[i];
      expect(row.getAttribute('data-step')).toBe(String(record.step));
      expect(row.querySelector('.pipeline')?.textContent).toBe(record.sift_pipeline);
      expect(row.querySelector('.features')?.textContent).toBe(record.bias_features.join(', '));
      expect(row.querySelector('.detection')?.textContent).toBe(record.bias_detection_function);
      expect(row.querySelector('.mitigation')?.textContent).toBe(record.bias_mitigation_function);
      expect(row.querySelector('.success')?.textContent).toBe(record.mitigation_success_status);
      expect(row.querySelector('.details')?.textContent).toBe(record.details);
    });
  });

  it('escapes markup in payload values', () => {
    const hostile = { ...RECORDS[0], details: '<script>alert(1)</script>' };
    const html = renderTimeline([hostile]);
    expect(html).not.toContain('<script>');
    expect(parse(html).querySelector('.details')?.textContent).toBe(hostile.details);
  });

  it('shows an empty state for an empty ledger', () => {
    expect(renderTimeline([])).toContain('timeline-empty');
  });
});

describe('renderProjectSummary', () => {
  it('shows the values the API returned', () => {
    const project = {
      project_id: 'Svc2020',
      name: 'Service early adopter model',
      description: 'early adopters',
      data_location: 'generated://marketing/Svc2020',
      status: 'Terminated',
      revision: 4,
      similar_projects: ['Old2019'],
      older_versions: [],
      timeout_days: 365,
      bias_history: [],
    } as ProjectDocument;
    const doc = parse(renderProjectSummary(project));
    expect(doc.querySelector('h2')?.textContent).toBe(project.name);
    expect(doc.querySelector('.status')?.textContent).toBe('Terminated');
    expect(doc.querySelector('.revision')?.textContent).toBe('4');
    expect(doc.body.textContent).toContain('Old2019');
  });
});

describe('renderGateQueue and HOG panel', () => {
  const gate: PendingGate = {
    gate_id: 'g1',
    project_id: 'Svc2020',
    pipeline: 'Information gathering',
    stage: 'Risk assessment',
    prompt: 'Assess the fairness risk of continuing this project.',
    options: ['proceed', 'terminate', 'exit-and-revise'],
    hog_refs: [],
  };

  it('lists each gate with a project link', () => {
    const doc = parse(renderGateQueue([gate]));
    const item = doc.querySelector('.queue-item');
    expect(item?.getAttribute('data-project')).toBe('Svc2020');
    expect(item?.querySelector('a')?.getAttribute('href')).toBe('#/projects/Svc2020');
    expect(item?.textContent).toContain('Information gathering / Risk assessment');
  });

  it('renders gate options exactly as served', () => {
    const doc = parse(renderGateForm(gate));
    const values = [...doc.querySelectorAll('input[name=decision]')].map((i) =>
      i.getAttribute('value'),
    );
    expect(values).toEqual(['proceed', 'terminate', 'exit-and-revise']);
    expect(doc.querySelector('textarea[name=rationale]')?.hasAttribute('required')).toBe(true);
  });

  it('renders HOG questions and answers', () => {
    const doc = parse(
      renderHogPanel([
        {
          sme_field: 'Legal',
          question: 'What laws apply?',
          answer: 'Start from shipping jurisdictions.',
          stages: ['Information gathering :: Risk assessment'],
          tags: ['regulation'],
        },
      ]),
    );
    const entry = doc.querySelector('.hog-entry');
    expect(entry?.getAttribute('data-sme')).toBe('Legal');
    expect(entry?.querySelector('.question')?.textContent).toBe('What laws apply?');
    expect(entry?.querySelector('.answer')?.textContent).toBe('Start from shipping jurisdictions.');
  });
});

describe('renderSimulationSummary', () => {
  it('links the created project and shows the blocking stage', () => {
    const doc = parse(
      renderSimulationSummary({
        project_id: 'Svc2020',
        status: 'Active',
        records: 1,
        blocked_at: { pipeline: 'Information gathering', stage: 'Risk assessment' },
      }),
    );
    const p = doc.querySelector('.simulation-summary');
    expect(p?.querySelector('a')?.getAttribute('href')).toBe('#/projects/Svc2020');
    expect(p?.textContent).toContain('Information gathering / Risk assessment');
    expect(p?.textContent).toContain('1 ledger records');
  });
});
