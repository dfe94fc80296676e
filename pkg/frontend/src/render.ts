/** Pure HTML renderers: identical state in, identical markup out. The
 * browser shell (app.ts) owns event wiring; nothing here touches the DOM
 * or computes statistics. */

import type { AppState, CampaignView, ObjectivePoint } from "./types.js";
import { checkForm, sortedResults } from "./state.js";

export function esc(s: unknown): string {
  return String(s)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(x: number): string {
  if (!Number.isFinite(x)) return String(x);
  const ax = Math.abs(x);
  if (ax !== 0 && (ax < 1e-3 || ax >= 1e6)) return x.toExponential(3);
  return String(Math.round(x * 1e6) / 1e6);
}

/** Polyline through (x, y) pairs scaled into a fixed-size SVG viewport. */
function polyline(pts: [number, number][], w: number, h: number): string {
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]).filter((y) => Number.isFinite(y));
  const x0 = Math.min(...xs);
  const x1 = Math.max(...xs);
  const y0 = Math.min(...ys);
  const y1 = Math.max(...ys);
  const sx = (x: number) => (x1 === x0 ? w / 2 : ((x - x0) / (x1 - x0)) * (w - 8) + 4);
  const sy = (y: number) =>
    y1 === y0 ? h / 2 : h - (((y - y0) / (y1 - y0)) * (h - 8) + 4);
  const coord = (p: [number, number]) =>
    `${sx(p[0]).toFixed(1)},${(Number.isFinite(p[1]) ? sy(p[1]) : 4).toFixed(1)}`;
  const line = pts
    .filter((p) => Number.isFinite(p[1]))
    .map(coord)
    .join(" ");
  const dots = pts
    .map(
      (p) =>
        `<circle class="pt" cx="${sx(p[0]).toFixed(1)}" cy="${(Number.isFinite(p[1]) ? sy(p[1]) : 4).toFixed(1)}" r="2.5"></circle>`,
    )
    .join("");
  return `<polyline points="${line}" fill="none"></polyline>${dots}`;
}

export function renderObjectiveCurve(view: CampaignView): string {
  if (!view.proposal) return "";
  const pts = view.proposal.trace.map(
    ([q, v]) => [q, v] as [number, number],
  );
  const marks = view.proposal.trace
    .map(
      ([q, v]) =>
        `<li>q=${fmt(q)}: ${fmt(v)}${q === view.proposal!.q ? " &#9664; recommended" : ""}</li>`,
    )
    .join("");
  return `<section class="objective-curve">
    <h3>Objective across candidate stress levels</h3>
    <svg viewBox="0 0 320 120" role="img" aria-label="objective curve">${polyline(pts, 320, 120)}</svg>
    <ul class="trace">${marks}</ul>
  </section>`;
}

export function renderSparkline(history: ObjectivePoint[]): string {
  if (history.length === 0) return "";
  const pts = history.map(
    (p, i) => [i, p.objective] as [number, number],
  );
  return `<section class="avar-history">
    <h3>Objective history (${history.length} rounds)</h3>
    <svg class="sparkline" viewBox="0 0 240 60" role="img" aria-label="objective history sparkline">${polyline(pts, 240, 60)}</svg>
  </section>`;
}

function renderPosterior(view: CampaignView): string {
  if (!view.posterior) return "";
  const rows = Object.entries(view.posterior.summary)
    .map(
      ([name, [mean, lo, hi]]) =>
        `<tr><td>${esc(name)}</td><td>${fmt(mean)}</td><td>${fmt(lo)}</td><td>${fmt(hi)}</td></tr>`,
    )
    .join("");
  return `<section class="posterior">
    <h3>Posterior marginals</h3>
    <table><thead><tr><th>parameter</th><th>mean</th><th>2.5%</th><th>97.5%</th></tr></thead>
    <tbody>${rows}</tbody></table>
  </section>`;
}

function sortMarker(state: AppState, key: string): string {
  if (state.sortKey !== key) return "";
  return state.sortAsc ? " &#9650;" : " &#9660;";
}

function renderHistory(state: AppState, view: CampaignView): string {
  const rows = sortedResults(view.results, state.sortKey, state.sortAsc)
    .map(
      (r) =>
        `<tr><td>${r.round}</td><td>${fmt(r.q)}</td><td>${fmt(r.cycles)}</td><td>${r.censored ? "censored" : "failed"}</td></tr>`,
    )
    .join("");
  const th = (key: string, label: string) =>
    `<th><button type="button" data-sort="${key}">${label}${sortMarker(state, key)}</button></th>`;
  return `<section class="history">
    <h3>Recorded outcomes</h3>
    <table>
      <thead><tr>${th("round", "round")}${th("q", "stress")}${th("cycles", "cycles")}${th("censored", "status")}</tr></thead>
      <tbody>${rows.length ? rows : '<tr><td colspan="4">no outcomes recorded</td></tr>'}</tbody>
    </table>
  </section>`;
}

function renderBanner(state: AppState): string {
  const b = state.banner;
  if (b.kind === "conflict") {
    return `<div class="banner conflict" role="alert">
      This campaign changed on the server (now at version ${b.currentVersion}).
      Your submission was not recorded.
      <button type="button" data-action="refresh">Refresh</button>
    </div>`;
  }
  if (b.kind === "error") {
    return `<div class="banner error" role="alert">${esc(b.message)}
      <button type="button" data-action="retry">Retry</button>
    </div>`;
  }
  return "";
}

function renderRecommendation(view: CampaignView): string {
  if (!view.proposal) {
    return `<section class="recommendation empty">
      <p class="placeholder">No proposals yet — ask for the first recommendation.</p>
      <button type="button" data-action="propose">Propose next stress level</button>
    </section>`;
  }
  const p = view.proposal;
  return `<section class="recommendation">
    <h2>Recommended next stress: <strong class="qstar">${fmt(p.q)}</strong></h2>
    <p>minimizes the design objective (${fmt(p.objective_min)}) at campaign version ${p.version}</p>
  </section>`;
}

function renderForm(state: AppState, view: CampaignView): string {
  const check = checkForm(state.form, view.config.grid);
  const warn =
    state.form.q.trim() && state.form.cycles.trim()
      ? check.warnings
          .map((w) => `<p class="warning">${esc(w)}</p>`)
          .join("")
      : "";
  return `<section class="outcome-form">
    <h3>Record outcome</h3>
    <form data-action="submit-outcome">
      <label>stress level q
        <input name="q" type="number" step="0.01" value="${esc(state.form.q)}">
      </label>
      <label>cycles
        <input name="cycles" type="number" step="any" value="${esc(state.form.cycles)}">
      </label>
      <label class="censored">
        <input name="censored" type="checkbox" ${state.form.censored ? "checked" : ""}>
        censored at runout (${fmt(view.config.censor_cycles)} cycles)
      </label>
      ${warn}
      <button type="submit" ${state.busy ? "disabled" : ""}>Record &amp; propose next</button>
    </form>
  </section>`;
}

export function renderCampaign(state: AppState): string {
  const view = state.view;
  if (!view) {
    return `${renderBanner(state)}<p class="placeholder">Loading campaign…</p>`;
  }
  return `
  <header>
    <h1>Campaign ${esc(view.id)}</h1>
    <p class="meta">version ${view.version} · grid [${view.config.grid.map(fmt).join(", ")}] · runout ${fmt(view.config.censor_cycles)} cycles</p>
  </header>
  ${renderBanner(state)}
  ${renderRecommendation(view)}
  ${renderObjectiveCurve(view)}
  ${view.proposal ? renderForm(state, view) : ""}
  ${renderSparkline(view.objective_history)}
  ${renderPosterior(view)}
  ${renderHistory(state, view)}`;
}
