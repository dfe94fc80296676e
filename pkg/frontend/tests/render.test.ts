import { describe, expect, it } from "vitest";

import { renderCampaign } from "../src/render.js";
import { initialState, toggleCensored, withView } from "../src/state.js";
import { emptyView, richView } from "./fixtures.js";

function stateWith(view = richView()) {
  return withView(initialState(), view);
}

describe("renderCampaign", () => {
  it("shows a placeholder when the campaign has no proposals yet", () => {
    const html = renderCampaign(stateWith(emptyView()));
    expect(html).toContain("No proposals yet");
    expect(html).toContain('data-action="propose"');
    expect(html).not.toContain("Recommended next stress");
  });

  it("renders the recommendation prominently with the proposed stress", () => {
    const html = renderCampaign(stateWith());
    expect(html).toMatch(/<h2>Recommended next stress: <strong[^>]*>0\.75</);
  });

  it("draws the objective curve over every candidate grid point", () => {
    const html = renderCampaign(stateWith());
    const section = html
      .split("Objective across candidate stress levels")[1]
      .split("</section>")[0];
    const dots = (section.match(/class="pt"/g) ?? []).length;
    expect(dots).toBe(richView().proposal!.trace.length);
    expect(section).toContain("recommended");
  });

  it("renders a sparkline with one point per recorded round", () => {
    const view = richView();
    const html = renderCampaign(stateWith(view));
    const spark = html.split("Objective history")[1];
    const dots = (spark.match(/class="pt"/g) ?? []).length;
    expect(dots).toBe(12);
    expect(html).toContain("Objective history (12 rounds)");
  });

  it("renders the posterior marginals straight from the payload", () => {
    const html = renderCampaign(stateWith());
    expect(html).toContain("<td>nu</td><td>0.7</td><td>0.4</td><td>1.1</td>");
  });

  it("renders a conflict banner prompting a refresh", () => {
    const state = {
      ...stateWith(),
      banner: { kind: "conflict" as const, currentVersion: 9 },
    };
    const html = renderCampaign(state);
    expect(html).toContain("now at version 9");
    expect(html).toContain('data-action="refresh"');
    expect(html).toContain("was not recorded");
  });

  it("renders an inline error state with retry", () => {
    const state = {
      ...stateWith(),
      banner: { kind: "error" as const, message: "boom <script>" },
    };
    const html = renderCampaign(state);
    expect(html).toContain("boom &lt;script&gt;");
    expect(html).toContain('data-action="retry"');
  });

  it("warns when the entered stress is off the candidate grid", () => {
    const base = stateWith();
    const state = {
      ...base,
      form: { q: "0.62", cycles: "100000", censored: false },
    };
    const html = renderCampaign(state);
    expect(html).toContain("not on the candidate grid");
  });

  it("prefills the runout threshold when censored is checked", () => {
    const base = stateWith();
    const form = toggleCensored(base.form, true, base.view!.config.censor_cycles);
    const html = renderCampaign({ ...base, form });
    expect(html).toContain('name="cycles"');
    expect(html).toContain('value="2000000"');
    expect(html).toContain("checked");
  });

  it("is a pure view: identical payload gives identical markup", () => {
    const a = renderCampaign(stateWith(richView()));
    const b = renderCampaign(stateWith(richView()));
    expect(a).toBe(b);
  });
});
