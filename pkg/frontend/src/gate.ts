/** Gate view controller: decision form handling with conflict surfacing.
 *
 * The gate id acts as the optimistic lock: if another reviewer resolved the
 * gate first, the service answers 409 (no_open_gate) and the form surfaces a
 * conflict banner without touching any local state.
 */

import { ApiError, ReviewApi } from './api';
import type { Outcome, PendingGate } from './types';
import { rationaleRequired, renderGateForm } from './render';

export interface SubmissionResult {
  status: 'resolved' | 'rejected' | 'conflict';
  outcome?: Outcome;
  message?: string;
}

export class GateController {
  constructor(
    private readonly api: ReviewApi,
    readonly gate: PendingGate,
  ) {}

  renderInto(container: HTMLElement): void {
    container.innerHTML = renderGateForm(this.gate);
    const form = container.querySelector('form')!;
    form.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submitFrom(form);
    });
  }

  /** Validate and submit the form; returns what happened for the caller to act on. */
  async submitFrom(form: HTMLFormElement): Promise<SubmissionResult> {
    const data = new FormData(form);
    const decision = String(data.get('decision') ?? '');
    const rationale = String(data.get('rationale') ?? '').trim();
    const decider = String(data.get('decider') ?? '').trim();
    if (!decision) {
      return this.fail(form, 'Choose one of the offered decisions.');
    }
    if (rationaleRequired(this.gate) && !rationale) {
      return this.fail(form, 'This gate requires a written rationale.');
    }
    try {
      const outcome = await this.api.decide(this.gate.project_id, {
        decision,
        rationale,
        decider,
      });
      return { status: 'resolved', outcome };
    } catch (err) {
      if (err instanceof ApiError && err.code === 'no_open_gate') {
        // someone else resolved this gate: report the conflict, change nothing
        this.showError(form, 'This gate was already resolved by another reviewer.');
        return { status: 'conflict', message: err.message };
      }
      if (err instanceof ApiError) {
        return this.fail(form, `${err.code}: ${err.message}`);
      }
      throw err;
    }
  }

  private fail(form: HTMLFormElement, message: string): SubmissionResult {
    this.showError(form, message);
    return { status: 'rejected', message };
  }

  private showError(form: HTMLFormElement, message: string): void {
    const banner = form.querySelector<HTMLElement>('.form-error');
    if (banner) {
      banner.textContent = message;
      banner.hidden = false;
    }
  }
}
