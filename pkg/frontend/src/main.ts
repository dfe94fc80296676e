/** Browser entry point: mounts the console on #app and wires DOM events
 * (delegated, since the markup is re-rendered wholesale on each change). */

import { ApiClient } from "./api.js";
import { CampaignConsole } from "./app.js";
import type { SortKey } from "./types.js";

export function mount(root: HTMLElement, campaignId: string): CampaignConsole {
  const api = new ApiClient((input, init) => fetch(input, init));
  const console_ = new CampaignConsole(api, campaignId, (html) => {
    root.innerHTML = html;
  });

  root.addEventListener("click", (ev) => {
    const el = ev.target as HTMLElement;
    const action = el.dataset.action;
    const sort = el.dataset.sort;
    if (action === "refresh" || action === "retry") void console_.refresh();
    else if (action === "propose") void console_.propose();
    else if (sort) console_.sortBy(sort as SortKey);
  });

  root.addEventListener("input", (ev) => {
    const el = ev.target as HTMLInputElement;
    if (el.name === "q" || el.name === "cycles") {
      console_.setField(el.name, el.value);
    } else if (el.name === "censored") {
      console_.setCensored(el.checked);
    }
  });

  root.addEventListener("submit", (ev) => {
    const el = ev.target as HTMLElement;
    if (el.matches('[data-action="submit-outcome"]')) {
      ev.preventDefault();
      void console_.submitOutcome();
    }
  });

  void console_.refresh();
  return console_;
}

declare global {
  interface Window {
    relikitMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.relikitMount = mount;
  const root = document.getElementById("app");
  if (root) {
    const id =
      new URLSearchParams(window.location.search).get("campaign") ?? "default";
    mount(root, id);
  }
}
