/** Pure view-state helpers: form prefill rules, history sorting, and banner
 * transitions. No statistics — every number shown comes from the server
 * payload untouched. */

import type {
  AppState,
  Banner,
  CampaignView,
  OutcomeForm,
  ResultRow,
  SortKey,
} from "./types.js";

export function initialState(): AppState {
  return {
    view: null,
    banner: { kind: "none" },
    sortKey: "round",
    sortAsc: true,
    form: { q: "", cycles: "", censored: false },
    busy: false,
  };
}

/** The form starts from the current recommendation but stays editable. */
export function prefillForm(view: CampaignView): OutcomeForm {
  return {
    q: view.proposal ? String(view.proposal.q) : "",
    cycles: "",
    censored: false,
  };
}

export function withView(state: AppState, view: CampaignView): AppState {
  return {
    ...state,
    view,
    banner: { kind: "none" },
    form: prefillForm(view),
    busy: false,
  };
}

export function withBanner(state: AppState, banner: Banner): AppState {
  return { ...state, banner, busy: false };
}

/** Checking "censored" prefills the configured runout threshold; unchecking
 * clears it again so a real failure time can be typed. */
export function toggleCensored(
  form: OutcomeForm,
  censored: boolean,
  censorCycles: number,
): OutcomeForm {
  return {
    ...form,
    censored,
    cycles: censored ? String(censorCycles) : "",
  };
}

export interface FormCheck {
  ok: boolean;
  errors: string[];
  /** Off-grid stress is allowed but flagged. */
  warnings: string[];
  q: number;
  cycles: number;
}

export function checkForm(form: OutcomeForm, grid: number[]): FormCheck {
  const errors: string[] = [];
  const warnings: string[] = [];
  const q = Number(form.q);
  const cycles = Number(form.cycles);
  if (!form.q.trim() || !Number.isFinite(q) || q <= 0 || q >= 1) {
    errors.push("stress level must be a number in (0, 1)");
  }
  if (!form.cycles.trim() || !Number.isFinite(cycles) || cycles <= 0) {
    errors.push("cycles must be a positive number");
  }
  if (errors.length === 0 && !grid.some((g) => Math.abs(g - q) < 1e-9)) {
    warnings.push(
      `stress ${q} is not on the candidate grid; recording it anyway`,
    );
  }
  return { ok: errors.length === 0, errors, warnings, q, cycles };
}

export function toggleSort(state: AppState, key: SortKey): AppState {
  const sortAsc = state.sortKey === key ? !state.sortAsc : true;
  return { ...state, sortKey: key, sortAsc };
}

export interface NumberedRow extends ResultRow {
  round: number;
}

export function sortedResults(
  results: ResultRow[],
  key: SortKey,
  asc: boolean,
): NumberedRow[] {
  const rows = results.map((r, i) => ({ ...r, round: i + 1 }));
  const sign = asc ? 1 : -1;
  rows.sort((a, b) => {
    const va = key === "censored" ? Number(a.censored) : a[key];
    const vb = key === "censored" ? Number(b.censored) : b[key];
    return va === vb ? a.round - b.round : sign * (va < vb ? -1 : 1);
  });
  return rows;
}
