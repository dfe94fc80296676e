import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { CampaignConsole } from "../src/app.js";
import type { CampaignView, ResultRow } from "../src/types.js";
import { GRID, jsonResponse } from "./fixtures.js";

/** In-memory stand-in for the campaign service: versioned results with
 * compare-and-swap, and a recommendation that reacts to the data (an
 * extreme early failure pulls the proposal to the lowest stress). */
class FakeServer {
  version = 0;
  results: ResultRow[] = [];
  proposal: { q: number; version: number } | null = null;
  objectiveHistory: { version: number; objective: number }[] = [];

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    if (url === "/campaigns/camp" && method === "GET") {
      return jsonResponse(200, this.view());
    }
    if (url === "/campaigns/camp/propose" && method === "POST") {
      const extreme = this.results.some((r) => !r.censored && r.cycles < 1000);
      const q = extreme ? GRID[0] : GRID[GRID.length - 1];
      this.proposal = { q, version: this.version };
      this.objectiveHistory.push({
        version: this.version,
        objective: 5 / (1 + this.results.length),
      });
      return jsonResponse(200, { ...this.proposal, trace: [], objective_min: 0 });
    }
    if (url === "/campaigns/camp/results" && method === "POST") {
      const headers = init?.headers as Record<string, string>;
      const expected = Number(headers["X-Expected-Version"]);
      if (expected !== this.version) {
        return jsonResponse(409, {
          error: "version conflict",
          current_version: this.version,
        });
      }
      const body = JSON.parse(init?.body as string);
      this.results.push(body);
      this.version += 1;
      return jsonResponse(200, { id: "camp", version: this.version });
    }
    return jsonResponse(404, { detail: "not found" });
  };

  private view(): CampaignView {
    return {
      id: "camp",
      version: this.version,
      config: { sigma_ult: 1339.67, censor_cycles: 2e6, grid: [...GRID] },
      priors: {},
      seed: 1,
      results: [...this.results],
      proposal: this.proposal && {
        ...this.proposal,
        trace: GRID.map((q) => [q, 1] as [number, number]),
        objective_min: 1,
      },
      posterior: null,
      objective_history: [...this.objectiveHistory],
    };
  }
}

function makeConsole(server: FakeServer) {
  const frames: string[] = [];
  const console_ = new CampaignConsole(
    new ApiClient(server.fetch),
    "camp",
    (html) => frames.push(html),
  );
  return { console_, frames };
}

describe("campaign round trip", () => {
  it("create → propose → record extreme outcome → recommendation changes", async () => {
    const server = new FakeServer();
    const { console_, frames } = makeConsole(server);

    await console_.refresh();
    expect(frames.at(-1)).toContain("No proposals yet");

    await console_.propose();
    expect(console_.state.view?.proposal?.q).toBe(0.75);
    expect(console_.state.form.q).toBe("0.75"); // prefilled from proposal

    // an extreme early failure at the recommended stress
    console_.setField("cycles", "120");
    await console_.submitOutcome();

    // submission recorded, next proposal requested, view re-rendered
    expect(server.results).toEqual([{ q: 0.75, cycles: 120, censored: false }]);
    expect(console_.state.view?.version).toBe(1);
    expect(console_.state.view?.proposal?.q).toBe(0.35); // moved to low stress
    expect(frames.at(-1)).toMatch(/Recommended next stress: <strong[^>]*>0\.35</);
    expect(console_.state.banner.kind).toBe("none");
  });

  it("stale-version submission surfaces a conflict without corrupting state", async () => {
    const server = new FakeServer();
    const { console_ } = makeConsole(server);
    await console_.refresh();
    await console_.propose();

    // another writer advances the campaign behind our back
    await server.fetch("/campaigns/camp/results", {
      method: "POST",
      headers: { "X-Expected-Version": "0" },
      body: JSON.stringify({ q: 0.55, cycles: 5e5, censored: false }),
    });
    expect(server.version).toBe(1);

    console_.setField("cycles", "250000");
    await console_.submitOutcome(); // still holds version 0

    expect(console_.state.banner).toEqual({ kind: "conflict", currentVersion: 1 });
    // nothing was appended and the local view still shows the old state
    expect(server.results).toHaveLength(1);
    expect(console_.state.view?.version).toBe(0);

    // the banner's refresh action resolves the conflict cleanly
    await console_.refresh();
    expect(console_.state.banner.kind).toBe("none");
    expect(console_.state.view?.version).toBe(1);
    expect(console_.state.view?.results).toHaveLength(1);
  });

  it("censored outcomes round-trip with the prefilled runout threshold", async () => {
    const server = new FakeServer();
    const { console_ } = makeConsole(server);
    await console_.refresh();
    await console_.propose();

    console_.setCensored(true);
    expect(console_.state.form.cycles).toBe("2000000");
    await console_.submitOutcome();
    expect(server.results[0]).toEqual({ q: 0.75, cycles: 2e6, censored: true });
  });

  it("invalid input surfaces an inline error without an API call", async () => {
    const server = new FakeServer();
    const { console_ } = makeConsole(server);
    await console_.refresh();
    await console_.propose();

    console_.setField("cycles", "-5");
    await console_.submitOutcome();
    expect(console_.state.banner.kind).toBe("error");
    expect(server.results).toHaveLength(0);
  });
});
