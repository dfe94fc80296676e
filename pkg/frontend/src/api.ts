/** Thin typed client for the campaign HTTP API. All statistics live on the
 * server; this module only moves JSON and maps error statuses to typed
 * errors the UI can react to. */

import type { CampaignView, Proposal } from "./types.js";

export class ConflictError extends Error {
  constructor(public currentVersion: number) {
    super(`campaign changed on the server (now at version ${currentVersion})`);
    this.name = "ConflictError";
  }
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function errorDetail(res: Response): Promise<string> {
  try {
    const body = await res.json();
    return typeof body.detail === "string"
      ? body.detail
      : JSON.stringify(body.detail ?? body);
  } catch {
    return res.statusText || `HTTP ${res.status}`;
  }
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike,
    private base = "",
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (res.status === 409) {
      const body = await res.json();
      throw new ConflictError(Number(body.current_version ?? -1));
    }
    if (!res.ok) {
      throw new ApiError(res.status, await errorDetail(res));
    }
    return (await res.json()) as T;
  }

  getCampaign(id: string): Promise<CampaignView> {
    return this.request(`/campaigns/${encodeURIComponent(id)}`);
  }

  createCampaign(id: string, seed: number): Promise<{ id: string; version: number }> {
    return this.request("/campaigns", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id, seed }),
    });
  }

  propose(id: string): Promise<Proposal> {
    return this.request(`/campaigns/${encodeURIComponent(id)}/propose`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({}),
    });
  }

  /** Every mutating result submission carries the expected-version header;
   * the server refuses (409) if someone else moved the campaign first. */
  submitResult(
    id: string,
    outcome: { q: number; cycles: number; censored: boolean },
    expectedVersion: number,
  ): Promise<{ id: string; version: number }> {
    return this.request(`/campaigns/${encodeURIComponent(id)}/results`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "X-Expected-Version": String(expectedVersion),
      },
      body: JSON.stringify(outcome),
    });
  }
}
