/** Controller tying the API client, view state, and renderer together.
 * It is DOM-agnostic: the host passes a callback that receives fresh
 * markup after every state change, which makes the full round-trip
 * testable with a mocked fetch. */

import { ApiClient, ApiError, ConflictError } from "./api.js";
import { renderCampaign } from "./render.js";
import {
  checkForm,
  initialState,
  toggleCensored,
  toggleSort,
  withBanner,
  withView,
} from "./state.js";
import type { AppState, SortKey } from "./types.js";

export type RenderSink = (html: string, state: AppState) => void;

export class CampaignConsole {
  state: AppState = initialState();

  constructor(
    private api: ApiClient,
    private campaignId: string,
    private sink: RenderSink,
  ) {}

  private commit(state: AppState): void {
    this.state = state;
    this.sink(renderCampaign(state), state);
  }

  async refresh(): Promise<void> {
    try {
      const view = await this.api.getCampaign(this.campaignId);
      this.commit(withView(this.state, view));
    } catch (err) {
      this.fail(err);
    }
  }

  async propose(): Promise<void> {
    this.commit({ ...this.state, busy: true });
    try {
      await this.api.propose(this.campaignId);
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  setField(name: "q" | "cycles", value: string): void {
    this.commit({ ...this.state, form: { ...this.state.form, [name]: value } });
  }

  setCensored(checked: boolean): void {
    const censorCycles = this.state.view?.config.censor_cycles ?? 0;
    this.commit({
      ...this.state,
      form: toggleCensored(this.state.form, checked, censorCycles),
    });
  }

  sortBy(key: SortKey): void {
    this.commit(toggleSort(this.state, key));
  }

  /** Record the outcome under the campaign's current version, then ask for
   * the next proposal and re-render — all without a page reload. A stale
   * version turns into a conflict banner and nothing else changes. */
  async submitOutcome(): Promise<void> {
    const view = this.state.view;
    if (!view) return;
    const check = checkForm(this.state.form, view.config.grid);
    if (!check.ok) {
      this.commit(
        withBanner(this.state, {
          kind: "error",
          message: check.errors.join("; "),
        }),
      );
      return;
    }
    this.commit({ ...this.state, busy: true });
    try {
      await this.api.submitResult(
        this.campaignId,
        { q: check.q, cycles: check.cycles, censored: this.state.form.censored },
        view.version,
      );
      await this.api.propose(this.campaignId);
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    if (err instanceof ConflictError) {
      this.commit(
        withBanner(this.state, {
          kind: "conflict",
          currentVersion: err.currentVersion,
        }),
      );
    } else if (err instanceof ApiError) {
      this.commit(
        withBanner(this.state, { kind: "error", message: err.message }),
      );
    } else {
      this.commit(
        withBanner(this.state, { kind: "error", message: String(err) }),
      );
    }
  }
}
