import type { CampaignView } from "../src/types.js";

export const GRID = [0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75];

export function emptyView(): CampaignView {
  return {
    id: "camp",
    version: 0,
    config: { sigma_ult: 1339.67, censor_cycles: 2e6, grid: [...GRID] },
    priors: {},
    seed: 1,
    results: [],
    proposal: null,
    posterior: null,
    objective_history: [],
  };
}

export function richView(overrides: Partial<CampaignView> = {}): CampaignView {
  const trace: [number, number][] = GRID.map((q, i) => [q, 2.0 - 0.1 * i]);
  return {
    ...emptyView(),
    version: 5,
    results: [
      { q: 0.75, cycles: 52341.2, censored: false },
      { q: 0.35, cycles: 2e6, censored: true },
      { q: 0.55, cycles: 412000, censored: false },
    ],
    proposal: { q: 0.75, version: 5, trace, objective_min: 1.2 },
    posterior: {
      summary: { A: [0.015, 0.002, 0.05], B: [0.32, 0.1, 0.6], nu: [0.7, 0.4, 1.1] },
      version: 4,
    },
    objective_history: Array.from({ length: 12 }, (_, i) => ({
      version: 2 * i + 1,
      objective: 5 - 0.3 * i,
    })),
    ...overrides,
  };
}

/** Minimal Response stand-in for the mocked fetch. */
export function jsonResponse(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: String(status),
    json: async () => body,
  } as unknown as Response;
}
