"""Durable test-campaign records: append-only JSON-lines event logs.

Each campaign lives in one ``<id>.jsonl`` file under the store root.
Every line is one event (``created``, ``proposed``, ``recorded`` or
``posterior-refreshed``) carrying a strictly increasing ``version``.
State is reconstructed purely by replaying the log; floats are written
with shortest round-trip precision so a replay is bit-identical to the
live state. Writes are guarded by compare-and-swap on the expected
version, so concurrent stale writers get a conflict instead of silently
clobbering newer results.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import asdict, replace

import numpy as np

from .altsbd import (DEFAULT_P, DEFAULT_PROFILE, AltCampaignState, AltPriors,
                     AltTestDatum, MaterialTestConfig, UseProfile,
                     propose_next)
from .distcore import StdKind

EVENT_KINDS = ("created", "proposed", "recorded", "posterior-refreshed")

_ID_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class VersionConflict(Exception):
    """Raised when a write carries a stale expected version."""

    def __init__(self, expected: int, current: int):
        super().__init__(f"expected version {expected}, log is at {current}")
        self.expected = expected
        self.current = current


def _dump(event: dict) -> str:
    return json.dumps(event, sort_keys=True) + "\n"


class Campaign:
    """In-memory view of one campaign log."""

    def __init__(self, campaign_id: str, events: list):
        self.id = campaign_id
        self.events = events
        self.state = _replay(events)

    @property
    def version(self) -> int:
        return self.events[-1]["version"]

    @property
    def seed(self) -> int:
        return self.events[0].get("seed")

    def last_proposal(self):
        for ev in reversed(self.events):
            if ev["event"] == "proposed":
                return ev
        return None

    def posterior_summary(self):
        for ev in reversed(self.events):
            if ev["event"] == "posterior-refreshed":
                return ev
        return None

    def objective_history(self):
        """(version, minimum objective) per proposal, oldest first."""
        return [(ev["version"], ev["objective_min"]) for ev in self.events
                if ev["event"] == "proposed"]

    def to_view(self) -> dict:
        """Everything a read-only client needs, with no recomputation."""
        prop = self.last_proposal()
        post = self.posterior_summary()
        return {
            "id": self.id,
            "version": self.version,
            "config": self.events[0]["config"],
            "priors": self.events[0]["priors"],
            "seed": self.seed,
            "results": [{"q": d.q, "cycles": d.cycles,
                         "censored": bool(d.censored)}
                        for d in self.state.data],
            "proposal": None if prop is None else {
                "q": prop["q"],
                "version": prop["version"],
                "trace": prop["trace"],
                "objective_min": prop["objective_min"],
            },
            "posterior": None if post is None else {
                "summary": post["summary"],
                "version": post["version"],
            },
            "objective_history": [
                {"version": v, "objective": o}
                for v, o in self.objective_history()],
        }


def _replay(events: list) -> AltCampaignState:
    if not events or events[0]["event"] != "created":
        raise ValueError("log must start with a created event")
    head = events[0]
    state = AltCampaignState(MaterialTestConfig(**head["config"]),
                             AltPriors(**head["priors"]))
    last_v = head["version"]
    if last_v != 0:
        raise ValueError("created event must carry version 0")
    for ev in events[1:]:
        if ev["event"] not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {ev['event']!r}")
        if ev["version"] <= last_v:
            raise ValueError(
                f"non-increasing version {ev['version']} after {last_v}")
        last_v = ev["version"]
        if ev["event"] == "proposed":
            rnd = len(state.proposal_log) + 1
            state = replace(state, proposal_log=state.proposal_log
                            + ((rnd, ev["q"], ev["objective_min"]),))
        elif ev["event"] == "recorded":
            datum = AltTestDatum(ev["q"], ev["cycles"], int(ev["censored"]))
            state = replace(state, data=state.data + (datum,),
                            version=state.version + 1)
    return state


class CampaignStore:
    """File-backed store of campaign logs under one root directory."""

    def __init__(self, root: str):
        self.root = os.path.abspath(root)
        os.makedirs(self.root, exist_ok=True)

    def _path(self, campaign_id: str) -> str:
        if not _ID_RE.match(campaign_id):
            raise ValueError(f"invalid campaign id {campaign_id!r}")
        return os.path.join(self.root, f"{campaign_id}.jsonl")

    def list_ids(self) -> list:
        return sorted(f[:-6] for f in os.listdir(self.root)
                      if f.endswith(".jsonl"))

    def exists(self, campaign_id: str) -> bool:
        return os.path.exists(self._path(campaign_id))

    def load(self, campaign_id: str) -> Campaign:
        path = self._path(campaign_id)
        if not os.path.exists(path):
            raise KeyError(campaign_id)
        events = []
        with open(path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    events.append(json.loads(line))
        return Campaign(campaign_id, events)

    def _append(self, campaign_id: str, event: dict, expected: int):
        """Append one event iff the log head is still ``expected``."""
        camp = self.load(campaign_id)
        if camp.version != expected:
            raise VersionConflict(expected, camp.version)
        event = dict(event)
        event["version"] = expected + 1
        with open(self._path(campaign_id), "a", encoding="utf-8") as f:
            f.write(_dump(event))
        return event["version"]

    def create(self, campaign_id: str,
               config: MaterialTestConfig = None,
               priors: AltPriors = None, seed: int = 0) -> Campaign:
        path = self._path(campaign_id)
        if os.path.exists(path):
            raise ValueError(f"campaign {campaign_id!r} already exists")
        head = {"event": "created", "version": 0,
                "config": asdict(config or MaterialTestConfig(1339.67)),
                "priors": asdict(priors or AltPriors()),
                "seed": int(seed)}
        with open(path, "w", encoding="utf-8") as f:
            f.write(_dump(head))
        return self.load(campaign_id)

    def propose(self, campaign_id: str, profile: UseProfile = DEFAULT_PROFILE,
                p: float = DEFAULT_P, n_draws: int = 500, n_eval: int = 100,
                kind: StdKind = StdKind.NORMAL) -> dict:
        """Refresh the posterior, pick the next stress level, log both.

        The sampler seed derives from (campaign seed, log version), so
        proposing from the same log state is reproducible.
        """
        camp = self.load(campaign_id)
        expected = camp.version
        rng = np.random.default_rng([camp.seed, expected])
        state, q_star, trace = propose_next(camp.state, profile, p, rng,
                                            n_draws, n_eval, kind)
        post = state.posterior
        summary = {}
        for j, name in enumerate(("A", "B", "nu")):
            col = post[:, j]
            summary[name] = [float(np.mean(col)),
                             float(np.quantile(col, 0.025)),
                             float(np.quantile(col, 0.975))]
        v = self._append(campaign_id, {
            "event": "posterior-refreshed", "n_draws": int(len(post)),
            "summary": summary}, expected)
        objective_min = min(v2 for _, v2 in trace)
        v = self._append(campaign_id, {
            "event": "proposed", "q": float(q_star),
            "objective_min": float(objective_min),
            "trace": [[float(q), float(o)] for q, o in trace]}, v)
        return {"q": float(q_star), "version": v,
                "trace": [[float(q), float(o)] for q, o in trace],
                "objective_min": float(objective_min)}

    def record(self, campaign_id: str, q: float, cycles: float,
               censored: bool, expected_version: int) -> int:
        AltTestDatum(q, cycles, int(censored))  # validate before writing
        return self._append(campaign_id, {
            "event": "recorded", "q": float(q), "cycles": float(cycles),
            "censored": int(bool(censored))}, expected_version)
