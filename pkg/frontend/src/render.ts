/** Pure HTML renderers: every view is a function from payload to markup.
 *
 * Rendering is kept free of fetch and DOM state so tests can assert that the
 * markup contains exactly the values the API returned.
 */

import type {
  BiasHistoryRecord,
  HogEntry,
  PendingGate,
  ProjectDocument,
  SimulationSummary,
} from './types';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

export function renderProjectSummary(project: ProjectDocument): string {
  return `
    <section class="project-summary" data-project="${escapeHtml(project.project_id)}">
      <h2>${escapeHtml(project.name)}</h2>
      <p class="description">${escapeHtml(project.description)}</p>
      <dl>
        <dt>Status</dt><dd class="status">${escapeHtml(project.status)}</dd>
        <dt>Data location</dt><dd>${escapeHtml(project.data_location)}</dd>
        <dt>Revision</dt><dd class="revision">${project.revision}</dd>
        <dt>Similar projects</dt>
        <dd>${project.similar_projects.map(escapeHtml).join(', ') || '—'}</dd>
        <dt>Older versions</dt>
        <dd>${project.older_versions.map(escapeHtml).join(', ') || '—'}</dd>
      </dl>
    </section>`;
}

/** One timeline row per ledger record, in step order, all seven fields shown. */
export function renderTimeline(records: BiasHistoryRecord[]): string {
  if (records.length === 0) {
    return '<p class="timeline-empty">No bias history recorded yet.</p>';
  }
  const rows = records
    .map(
      (r) => `
      <li class="timeline-step" data-step="${r.step}">
        <span class="step">${r.step}</span>
        <span class="pipeline">${escapeHtml(r.sift_pipeline)}</span>
        <span class="features">${r.bias_features.map(escapeHtml).join(', ')}</span>
        <span class="detection">${escapeHtml(r.bias_detection_function)}</span>
        <span class="mitigation">${escapeHtml(r.bias_mitigation_function)}</span>
        <span class="success">${escapeHtml(r.mitigation_success_status)}</span>
        <span class="details">${escapeHtml(r.details)}</span>
      </li>`,
    )
    .join('');
  return `<ol class="timeline">${rows}</ol>`;
}

export function renderGateQueue(gates: PendingGate[]): string {
  if (gates.length === 0) {
    return '<p class="queue-empty">No gates are waiting for review.</p>';
  }
  const rows = gates
    .map(
      (g) => `
      <li class="queue-item" data-project="${escapeHtml(g.project_id)}">
        <a href="#/projects/${encodeURIComponent(g.project_id)}">
          <span class="project">${escapeHtml(g.project_id)}</span>
          <span class="stage">${escapeHtml(g.pipeline)} / ${escapeHtml(g.stage)}</span>
        </a>
      </li>`,
    )
    .join('');
  return `<ul class="gate-queue">${rows}</ul>`;
}

export function renderHogPanel(entries: HogEntry[]): string {
  if (entries.length === 0) {
    return '<p class="hog-empty">No guidance entries are keyed to this stage.</p>';
  }
  const items = entries
    .map(
      (e) => `
      <article class="hog-entry" data-sme="${escapeHtml(e.sme_field)}">
        <h4>${escapeHtml(e.sme_field)}</h4>
        <p class="question">${escapeHtml(e.question)}</p>
        ${e.answer ? `<p class="answer">${escapeHtml(e.answer)}</p>` : ''}
        ${e.tags.length ? `<p class="tags">${e.tags.map(escapeHtml).join(', ')}</p>` : ''}
      </article>`,
    )
    .join('');
  return `<aside class="hog-panel">${items}</aside>`;
}

/** Rationale is mandatory at risk gates; the service rejects it anyway, the
 * form just refuses to submit early.
 */
export function rationaleRequired(gate: PendingGate): boolean {
  return gate.stage === 'Risk assessment';
}

export function renderGateForm(gate: PendingGate): string {
  const options = gate.options
    .map(
      (o) =>
        `<label><input type="radio" name="decision" value="${escapeHtml(o)}"> ${escapeHtml(o)}</label>`,
    )
    .join('');
  const required = rationaleRequired(gate);
  return `
    <form class="gate-form" data-gate="${escapeHtml(gate.gate_id)}">
      <h3>${escapeHtml(gate.pipeline)} / ${escapeHtml(gate.stage)}</h3>
      <p class="prompt">${escapeHtml(gate.prompt)}</p>
      <fieldset class="options">${options}</fieldset>
      <label>Rationale${required ? ' (required)' : ''}
        <textarea name="rationale" ${required ? 'required' : ''}></textarea>
      </label>
      <label>Decider <input name="decider" type="text"></label>
      <p class="form-error" hidden></p>
      <button type="submit">Record decision</button>
    </form>`;
}

export function renderSimulationSummary(summary: SimulationSummary): string {
  const blocked = summary.blocked_at
    ? `${escapeHtml(summary.blocked_at.pipeline)} / ${escapeHtml(summary.blocked_at.stage)}`
    : '—';
  return `
    <p class="simulation-summary" data-project="${escapeHtml(summary.project_id)}">
      Created <a href="#/projects/${encodeURIComponent(summary.project_id)}">
      ${escapeHtml(summary.project_id)}</a>:
      status ${escapeHtml(summary.status)}, ${summary.records} ledger records,
      waiting at ${blocked}.
    </p>`;
}
