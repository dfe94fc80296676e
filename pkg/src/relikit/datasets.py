"""CSV dataset schemas, validation, and JSON model serialization.

Every file carries a mandatory header row (RFC-4180). Event/censoring
status is stored as a ``failed`` boolean in all schemas; conversion to
each model's internal coding happens here, at the I/O boundary.

Schemas
-------
lifetime:    units.csv    unit_id,event_time,failed
             userate.csv  unit_id,week,use_rate
degradation: deg_measurements.csv  unit_id,day,y
             deg_covariates.csv    unit_id,day,uv,temp,rh
recurrent:   events.csv   unit_id,time,type        (component|subsystem)
             usage.csv    unit_id,time,cumulative_usage
                          (the last usage row of a unit marks its
                           observation end tau)
alt:         alt.csv      q,cycles,failed
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .altsbd import AltTestDatum
from .degradation import DegradationUnitRecord
from .lifetime import LifetimeUnitRecord, UseRateSeries
from .mtrp import EventHistory, UsagePath

SCHEMA_VERSION = "1"

KINDS = ("lifetime", "degradation", "recurrent", "alt")


@dataclass
class DatasetManifest:
    kind: str
    files: dict
    schema_version: str = SCHEMA_VERSION
    seed: int = None
    note: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown dataset kind {self.kind!r}")

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(asdict(self), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "DatasetManifest":
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
        m = cls(**raw)
        if m.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"{path}: schema version {m.schema_version!r} != "
                f"{SCHEMA_VERSION!r}")
        base = os.path.dirname(os.path.abspath(path))
        for key, rel in m.files.items():
            full = rel if os.path.isabs(rel) else os.path.join(base, rel)
            if not os.path.exists(full):
                raise FileNotFoundError(f"{path}: missing file {rel}")
            m.files[key] = full
        return m


# ---------------------------------------------------------------------------
# field parsing with location-aware errors


def _err(path, line, col, msg):
    return ValueError(f"{path}:{line}: column {col!r}: {msg}")


def _parse_float(row, col, path, line):
    try:
        return float(row[col])
    except (KeyError, TypeError):
        raise _err(path, line, col, "missing value")
    except ValueError:
        raise _err(path, line, col, f"not a number: {row[col]!r}")


def _parse_bool(row, col, path, line):
    v = str(row.get(col, "")).strip().lower()
    if v in ("1", "true"):
        return True
    if v in ("0", "false"):
        return False
    raise _err(path, line, col, f"expected boolean 0/1/true/false, got {v!r}")


def _read_rows(path, required):
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: no records")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}:1: missing columns {missing}")
        rows = [(i + 2, row) for i, row in enumerate(reader)]
    if not rows:
        raise ValueError(f"{path}: no records")
    return rows


def _fmt(x) -> str:
    """Shortest round-trip decimal for floats (replay determinism)."""
    return repr(float(x))


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# lifetime


def load_lifetime(units_path, userate_path, baseline_rate=1.0):
    """(records, use_rates): LifetimeUnitRecord list plus per-unit
    UseRateSeries keyed by unit_id."""
    unit_rows = _read_rows(units_path, ["unit_id", "event_time", "failed"])
    rate_rows = _read_rows(userate_path, ["unit_id", "week", "use_rate"])

    series = {}
    for line, row in rate_rows:
        uid = row["unit_id"]
        wk = _parse_float(row, "week", userate_path, line)
        ur = _parse_float(row, "use_rate", userate_path, line)
        series.setdefault(uid, []).append((wk, ur))

    use_rates = {}
    for uid, pts in series.items():
        pts.sort()
        t = np.array([p[0] for p in pts])
        v = np.array([p[1] for p in pts])
        use_rates[uid] = UseRateSeries(t, v, baseline_rate)

    records = []
    for line, row in unit_rows:
        uid = row["unit_id"]
        et = _parse_float(row, "event_time", units_path, line)
        failed = _parse_bool(row, "failed", units_path, line)
        if uid not in use_rates:
            raise _err(units_path, line, "unit_id",
                       f"no use-rate series for unit {uid!r}")
        records.append(LifetimeUnitRecord(uid, et, failed, use_rates[uid]))
    return records, use_rates


def save_lifetime(records, units_path, userate_path):
    _write_csv(units_path, ["unit_id", "event_time", "failed"],
               [[r.unit_id, _fmt(r.event_time), str(r.failed).lower()]
                for r in records])
    rows = []
    for r in records:
        s = r.covariates
        for t, v in zip(s.times, s.values):
            rows.append([r.unit_id, _fmt(t), _fmt(v)])
    _write_csv(userate_path, ["unit_id", "week", "use_rate"], rows)


# ---------------------------------------------------------------------------
# degradation


def load_degradation(meas_path, cov_path):
    meas_rows = _read_rows(meas_path, ["unit_id", "day", "y"])
    cov_rows = _read_rows(cov_path, ["unit_id", "day", "uv", "temp", "rh"])

    covs = {}
    for line, row in cov_rows:
        uid = row["unit_id"]
        day = _parse_float(row, "day", cov_path, line)
        vals = [_parse_float(row, c, cov_path, line)
                for c in ("uv", "temp", "rh")]
        covs.setdefault(uid, []).append((day, vals))

    meas = {}
    for line, row in meas_rows:
        uid = row["unit_id"]
        day = _parse_float(row, "day", meas_path, line)
        y = _parse_float(row, "y", meas_path, line)
        if uid not in covs:
            raise _err(meas_path, line, "unit_id",
                       f"no covariate rows for unit {uid!r}")
        meas.setdefault(uid, []).append((day, y))

    records = []
    for uid in sorted(covs):
        rows = sorted(covs[uid])
        epochs = np.array([r[0] for r in rows])
        cmat = np.array([r[1] for r in rows])
        mrows = sorted(meas.get(uid, []))
        if not mrows:
            raise ValueError(f"{meas_path}: no measurements for unit {uid!r}")
        mt = np.array([m[0] for m in mrows])
        y = np.array([m[1] for m in mrows])
        records.append(DegradationUnitRecord(uid, epochs, cmat, mt, y))
    return records


def save_degradation(records, meas_path, cov_path):
    mrows, crows = [], []
    for r in records:
        for t, y in zip(r.meas_times, r.y):
            mrows.append([r.unit_id, _fmt(t), _fmt(y)])
        for t, row in zip(r.epochs, r.covariates):
            crows.append([r.unit_id, _fmt(t)] + [_fmt(v) for v in row])
    _write_csv(meas_path, ["unit_id", "day", "y"], mrows)
    _write_csv(cov_path, ["unit_id", "day", "uv", "temp", "rh"], crows)


# ---------------------------------------------------------------------------
# recurrent events


def load_recurrent(events_path, usage_path):
    ev_rows = _read_rows(events_path, ["unit_id", "time", "type"])
    us_rows = _read_rows(usage_path, ["unit_id", "time", "cumulative_usage"])

    usage = {}
    for line, row in us_rows:
        uid = row["unit_id"]
        t = _parse_float(row, "time", usage_path, line)
        u = _parse_float(row, "cumulative_usage", usage_path, line)
        usage.setdefault(uid, []).append((t, u))

    events = {}
    for line, row in ev_rows:
        uid = row["unit_id"]
        t = _parse_float(row, "time", events_path, line)
        kind = str(row.get("type", "")).strip().lower()
        if kind not in ("component", "subsystem"):
            raise _err(events_path, line, "type",
                       f"expected component|subsystem, got {kind!r}")
        if uid not in usage:
            raise _err(events_path, line, "unit_id",
                       f"no usage rows for unit {uid!r}")
        events.setdefault(uid, []).append((t, 1 if kind == "component" else 0))

    histories = []
    for uid in sorted(usage):
        pts = sorted(usage[uid])
        tau = pts[-1][0]
        t = np.array([p[0] for p in pts])
        v = np.array([p[1] for p in pts])
        path = UsagePath(t, v)
        evs = sorted(events.get(uid, []))
        times = np.array([e[0] for e in evs])
        types = np.array([e[1] for e in evs], dtype=int)
        histories.append(EventHistory(uid, tau, times, types, path))
    return histories


def save_recurrent(histories, events_path, usage_path):
    erows, urows = [], []
    for h in histories:
        for t, d in zip(h.times, h.types):
            erows.append([h.unit_id, _fmt(t),
                          "component" if d == 1 else "subsystem"])
        for t, v in zip(h.usage.times, h.usage.values):
            urows.append([h.unit_id, _fmt(t), _fmt(v)])
        if h.usage.times[-1] != h.tau:
            urows.append([h.unit_id, _fmt(h.tau),
                          _fmt(h.usage.values[-1])])
    _write_csv(events_path, ["unit_id", "time", "type"], erows)
    _write_csv(usage_path, ["unit_id", "time", "cumulative_usage"], urows)


# ---------------------------------------------------------------------------
# alt


def load_alt(path):
    rows = _read_rows(path, ["q", "cycles", "failed"])
    out = []
    for line, row in rows:
        q = _parse_float(row, "q", path, line)
        t = _parse_float(row, "cycles", path, line)
        failed = _parse_bool(row, "failed", path, line)
        try:
            out.append(AltTestDatum(q, t, 0 if failed else 1))
        except ValueError as e:
            raise _err(path, line, "q", str(e))
    return out


def save_alt(data, path):
    _write_csv(path, ["q", "cycles", "failed"],
               [[_fmt(d.q), _fmt(d.cycles), str(d.censored == 0).lower()]
                for d in data])


# ---------------------------------------------------------------------------
# dispatch + model JSON


def load_dataset(manifest: DatasetManifest, baseline_rate: float = 1.0):
    """Typed records for the manifest's target module."""
    if manifest.kind == "lifetime":
        return load_lifetime(manifest.files["units"],
                             manifest.files["userate"], baseline_rate)
    if manifest.kind == "degradation":
        return load_degradation(manifest.files["measurements"],
                                manifest.files["covariates"])
    if manifest.kind == "recurrent":
        return load_recurrent(manifest.files["events"],
                              manifest.files["usage"])
    return load_alt(manifest.files["data"])


def model_to_json(kind: str, payload: dict) -> str:
    """Canonical fitted-model document (sorted keys, round-trip floats)."""
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        raise TypeError(f"not serializable: {type(o)}")
    doc = {"kind": kind, "schema_version": SCHEMA_VERSION, "model": payload}
    return json.dumps(doc, indent=2, sort_keys=True, default=default) + "\n"


def model_from_json(text: str) -> tuple:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("unsupported model schema version")
    return doc["kind"], doc["model"]
