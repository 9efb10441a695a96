/** Application shell: hash routing between the gate queue, project views,
 * and the simulation launcher. All data comes from the HTTP API.
 */

import { ApiError, ReviewApi } from './api';
import { GateController } from './gate';
import {
  renderGateQueue,
  renderHogPanel,
  renderProjectSummary,
  renderSimulationSummary,
  renderTimeline,
} from './render';
import type { PendingGate } from './types';

export class App {
  constructor(
    private readonly api: ReviewApi,
    private readonly root: HTMLElement,
  ) {}

  start(): void {
    window.addEventListener('hashchange', () => void this.route());
    void this.route();
  }

  async route(): Promise<void> {
    const hash = window.location.hash || '#/queue';
    const projectMatch = /^#\/projects\/(.+)$/.exec(hash);
    try {
      if (projectMatch) {
        await this.showProject(decodeURIComponent(projectMatch[1]));
      } else if (hash === '#/simulate') {
        this.showSimulationLauncher();
      } else {
        await this.showQueue();
      }
    } catch (err) {
      this.root.innerHTML = `<p class="app-error">${
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)
      }</p>`;
    }
  }

  /** Every project with an open gate, one queue row each. */
  async showQueue(): Promise<void> {
    const { projects } = await this.api.listProjects();
    const gates: PendingGate[] = [];
    for (const id of projects) {
      const gate = await this.api.getGate(id);
      if (gate) gates.push(gate);
    }
    this.root.innerHTML = `
      <nav><a href="#/simulate">Run a simulation</a></nav>
      <h1>Pending gates</h1>
      ${renderGateQueue(gates)}`;
  }

  async showProject(projectId: string): Promise<void> {
    const project = await this.api.getProject(projectId);
    const history = await this.api.getBiasHistory(projectId);
    const gate = await this.api.getGate(projectId);
    this.root.innerHTML = `
      <nav><a href="#/queue">Back to queue</a></nav>
      ${renderProjectSummary(project)}
      <h3>Bias history</h3>
      ${renderTimeline(history.bias_history)}
      <div class="gate-area"></div>
      <div class="hog-area"></div>
      <div class="advance-area">
        <button class="advance">Advance</button>
        <p class="advance-result" hidden></p>
      </div>`;
    const gateArea = this.root.querySelector<HTMLElement>('.gate-area')!;
    if (gate) {
      new GateController(this.api, gate).renderInto(gateArea);
      const { entries } = await this.api.getHog(gate.pipeline, gate.stage);
      this.root.querySelector<HTMLElement>('.hog-area')!.innerHTML = renderHogPanel(entries);
      gateArea.querySelector('form')!.addEventListener('submit', () => {
        // refresh once the controller's own handler settles
        setTimeout(() => void this.route(), 0);
      });
    }
    this.root.querySelector<HTMLElement>('.advance')!.addEventListener('click', async () => {
      const result = this.root.querySelector<HTMLElement>('.advance-result')!;
      try {
        const outcome = await this.api.advance(projectId);
        result.textContent = JSON.stringify(outcome);
        result.hidden = false;
        await this.route();
      } catch (err) {
        result.textContent = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
        result.hidden = false;
      }
    });
  }

  showSimulationLauncher(): void {
    this.root.innerHTML = `
      <nav><a href="#/queue">Back to queue</a></nav>
      <h1>Simulation launcher</h1>
      <form class="simulate-form">
        <label>Scenario
          <select name="scenario">
            <option value="project1">project1</option>
            <option value="project2">project2</option>
          </select>
        </label>
        <label>Seed <input name="seed" type="number"></label>
        <label><input name="interactive" type="checkbox"> stop at human gates</label>
        <button type="submit">Run</button>
      </form>
      <div class="simulate-result"></div>`;
    const form = this.root.querySelector<HTMLFormElement>('.simulate-form')!;
    form.addEventListener('submit', async (event) => {
      event.preventDefault();
      const data = new FormData(form);
      const seedRaw = String(data.get('seed') ?? '');
      const result = this.root.querySelector<HTMLElement>('.simulate-result')!;
      try {
        const summary = await this.api.simulateMarketing(
          data.get('scenario') === 'project1' ? 'project1' : 'project2',
          seedRaw === '' ? undefined : Number(seedRaw),
          data.get('interactive') === 'on',
        );
        result.innerHTML = renderSimulationSummary(summary);
      } catch (err) {
        result.innerHTML = `<p class="app-error">${
          err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)
        }</p>`;
      }
    });
  }
}

export function mount(root: HTMLElement, baseUrl = ''): App {
  const app = new App(new ReviewApi(baseUrl), root);
  app.start();
  return app;
}
