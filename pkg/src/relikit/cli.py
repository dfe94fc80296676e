"""Command-line interface: simulate, fit, predict, plan, serve."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import asdict

import click
import numpy as np

from . import datasets, generators
from .altsbd import (AltParams, AltPriors, MaterialTestConfig, UseProfile,
                     fit_alt_ml, log_quantile)
from .campaign_store import CampaignStore, VersionConflict
from .datasets import DatasetManifest, model_from_json, model_to_json
from .degradation import (FailureSpec, PathParams, design_matrix,
                          failure_time_of_path, fit_degradation)
from .distcore import StdKind
from .lifetime import (CovariateLmeParams, LifetimeParams, fit_covariate,
                       fit_lifetime, fleet_prediction)
from .lme import RandomEffectParams
from .mtrp import MtrpPriors, PosteriorDraws, fit_mtrp_bayes, predict_counts
from .splines import BasisKind, ChannelSpec, SplineEffectSpec

DEFAULT_DATA = os.environ.get("RELIKIT_DATA", os.path.expanduser("~/.relikit"))


def _load_config(path):
    if path is None:
        return {}
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _emit(doc: str, out, as_json: bool):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(doc)
        if not as_json:
            click.echo(out)
    else:
        click.echo(doc, nl=False)


def _spec_to_dict(spec: SplineEffectSpec):
    return [{"kind": ch.kind.value, "knots": list(ch.knots),
             "degree": ch.degree, "sign": ch.sign} for ch in spec.channels]


def _spec_from_dict(channels) -> SplineEffectSpec:
    return SplineEffectSpec(tuple(
        ChannelSpec(BasisKind(ch["kind"]), tuple(ch["knots"]),
                    int(ch["degree"]), float(ch["sign"]))
        for ch in channels))


@click.group()
def main():
    """Reliability analytics toolkit."""


# ---------------------------------------------------------------------------
# simulate


@main.command()
@click.argument("kind", type=click.Choice(datasets.KINDS))
@click.option("--out", required=True, type=click.Path(), help="output directory")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--units", "-n", "n_units", default=None, type=int,
              help="override the default fleet/sample size")
@click.option("--json", "as_json", is_flag=True, help="print the manifest")
def simulate(kind, out, seed, n_units, as_json):
    """Generate a synthetic dataset; deterministic per seed."""
    kw = {"n": n_units} if n_units is not None else {}
    manifest = generators.generate(kind, out, seed, **kw)
    if as_json:
        click.echo(json.dumps(asdict(manifest), sort_keys=True))
    else:
        click.echo(os.path.join(out, "manifest.json"))


# ---------------------------------------------------------------------------
# fit


def _fit_lifetime(manifest, cfg):
    records, _ = datasets.load_dataset(manifest,
                                       cfg.get("baseline_rate", 1.0))
    params, cov, ll = fit_lifetime(records, StdKind.SEV)

    def usable(s):
        return len(s.times) >= 2 and np.ptp(np.log(s.times)) > 0

    series = [r.covariates for r in records if r.failed
              and usable(r.covariates)]
    if len(series) < 2:
        series = [r.covariates for r in records
                  if usable(r.covariates)][:200]
    covp, cov_x, _ = fit_covariate(series)
    return {"params": asdict(params), "cov": cov.tolist(),
            "covariate": asdict(covp), "cov_x": cov_x.tolist(),
            "loglik": ll, "n_units": len(records),
            "n_failed": int(sum(r.failed for r in records))}


def _fit_degradation(manifest, cfg):
    records = datasets.load_dataset(manifest)
    if "spec" in cfg:
        spec = _spec_from_dict(cfg["spec"])
    else:
        spec = generators.DEGRADATION_SPEC
    params, report = fit_degradation(records, spec)
    return {"beta0": params.beta0, "coefs": params.coefs.tolist(),
            "re": asdict(params.re), "spec": _spec_to_dict(spec),
            "loglik": report.loglik, "converged": report.converged,
            "iterations": report.iterations}


def _fit_recurrent(manifest, cfg, seed):
    histories = datasets.load_dataset(manifest)
    iters = int(cfg.get("iterations", 1500))
    draws = fit_mtrp_bayes(histories, MtrpPriors(),
                           chains=int(cfg.get("chains", 2)),
                           iterations=iters,
                           rng=np.random.default_rng(seed),
                           estimate_w=bool(cfg.get("estimate_w", True)))
    keep = min(len(draws.samples), 1000)
    idx = np.linspace(0, len(draws.samples) - 1, keep).astype(int)
    return {"samples": draws.samples[idx].tolist(), "names": draws.names,
            "chain_ids": draws.chain_ids[idx].tolist(),
            "acceptance": draws.acceptance,
            "summary": draws.summary()}


def _fit_alt(manifest, cfg):
    data = datasets.load_dataset(manifest)
    config = MaterialTestConfig(**cfg["material"]) if "material" in cfg \
        else generators.ALT_CONFIG
    params = fit_alt_ml(data, config)
    return {"params": asdict(params), "material": asdict(config),
            "n_obs": len(data),
            "n_censored": int(sum(d.censored for d in data))}


@main.command()
@click.argument("kind", type=click.Choice(datasets.KINDS))
@click.option("--manifest", "manifest_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def fit(kind, manifest_path, config_path, seed, out, as_json):
    """Fit the model for KIND; writes a model JSON document."""
    manifest = DatasetManifest.load(manifest_path)
    if manifest.kind != kind:
        raise click.ClickException(
            f"manifest is for kind {manifest.kind!r}, not {kind!r}")
    cfg = _load_config(config_path)
    if kind == "lifetime":
        payload = _fit_lifetime(manifest, cfg)
    elif kind == "degradation":
        payload = _fit_degradation(manifest, cfg)
    elif kind == "recurrent":
        payload = _fit_recurrent(manifest, cfg, seed)
    else:
        payload = _fit_alt(manifest, cfg)
    _emit(model_to_json(kind, payload), out, as_json)


# ---------------------------------------------------------------------------
# predict


def _predict_lifetime(manifest, model, cfg, seed):
    records, _ = datasets.load_dataset(manifest,
                                       cfg.get("baseline_rate", 1.0))
    at_risk = [r for r in records if not r.failed]
    limit = cfg.get("risk_set_limit")
    if limit:
        at_risk = at_risk[:int(limit)]
    thetaT = LifetimeParams(**model["params"])
    thetaX = CovariateLmeParams(**model["covariate"])
    horizons = cfg.get("horizons", [13.0, 26.0, 52.0])
    pred = fleet_prediction(at_risk, thetaT, np.array(model["cov"]), thetaX,
                            np.array(model["cov_x"]), horizons,
                            float(cfg.get("alpha", 0.10)),
                            int(cfg.get("mc_paths", 30)),
                            int(cfg.get("bootstrap", 20)),
                            np.random.default_rng(seed))
    return {"risk_set_size": pred.risk_set_size,
            "horizons": pred.horizons.tolist(),
            "point": pred.point.tolist(),
            "pi_lower": pred.pi_lower.tolist(),
            "pi_upper": pred.pi_upper.tolist()}


def _predict_degradation(manifest, model, cfg):
    records = datasets.load_dataset(manifest)
    spec = _spec_from_dict(model["spec"])
    params = PathParams(model["beta0"], np.array(model["coefs"]),
                        RandomEffectParams(**model["re"]))
    fspec = FailureSpec(float(cfg.get("threshold", -0.4)),
                        float(cfg.get("horizon", 365.0)))
    out = []
    for r in records:
        X = design_matrix(r, spec)
        path = X @ np.concatenate([[params.beta0], params.coefs])
        td = failure_time_of_path(r.meas_times, path, fspec)
        out.append({"unit_id": r.unit_id,
                    "crossing_day": None if td is None else float(td)})
    return {"threshold": fspec.threshold, "units": out}


def _predict_recurrent(manifest, model, cfg, seed):
    histories = datasets.load_dataset(manifest)
    draws = PosteriorDraws(np.array(model["samples"]), model["names"],
                           np.array(model["chain_ids"]),
                           model["acceptance"])
    t_star = float(cfg.get("horizon", 12.0))
    pred = predict_counts(draws, histories, t_star,
                          np.random.default_rng(seed),
                          M=int(cfg.get("mc_paths", 200)))
    return {"horizon": t_star, "point": pred.point,
            "interval": [pred.interval[0], pred.interval[1]]}


def _predict_alt(model, cfg):
    params = AltParams(**model["params"])
    config = MaterialTestConfig(**model["material"])
    p = float(cfg.get("p", 0.05))
    levels = cfg.get("use_levels", [0.1, 0.2, 0.3])
    quants = {str(u): float(np.exp(log_quantile(p, float(u), params, config)))
              for u in levels}
    return {"p": p, "cycles_quantile": quants}


@main.command()
@click.argument("kind", type=click.Choice(datasets.KINDS))
@click.option("--manifest", "manifest_path", default=None,
              type=click.Path(exists=True))
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--out", default=None, type=click.Path())
@click.option("--json", "as_json", is_flag=True)
def predict(kind, manifest_path, model_path, config_path, seed, out, as_json):
    """Model-based prediction for KIND; deterministic per seed."""
    with open(model_path, encoding="utf-8") as f:
        model_kind, model = model_from_json(f.read())
    if model_kind != kind:
        raise click.ClickException(
            f"model is for kind {model_kind!r}, not {kind!r}")
    cfg = _load_config(config_path)
    if kind == "alt":
        payload = _predict_alt(model, cfg)
    else:
        if manifest_path is None:
            raise click.ClickException("--manifest is required for this kind")
        manifest = DatasetManifest.load(manifest_path)
        if kind == "lifetime":
            payload = _predict_lifetime(manifest, model, cfg, seed)
        elif kind == "degradation":
            payload = _predict_degradation(manifest, model, cfg)
        else:
            payload = _predict_recurrent(manifest, model, cfg, seed)
    _emit(model_to_json(kind, payload), out, as_json)


# ---------------------------------------------------------------------------
# plan (sequential campaign)


@main.group()
@click.option("--data", "data_dir", default=DEFAULT_DATA, show_default=True,
              help="campaign store directory (env RELIKIT_DATA)")
@click.pass_context
def plan(ctx, data_dir):
    """Sequential test-campaign planning."""
    ctx.obj = CampaignStore(data_dir)


@plan.command()
@click.argument("campaign_id")
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.pass_obj
def create(store, campaign_id, seed, config_path):
    """Create a campaign log."""
    cfg = _load_config(config_path)
    config = MaterialTestConfig(**cfg["material"]) if "material" in cfg \
        else generators.ALT_CONFIG
    priors = AltPriors(**cfg["priors"]) if "priors" in cfg else AltPriors()
    camp = store.create(campaign_id, config, priors, seed)
    click.echo(json.dumps({"id": camp.id, "version": camp.version},
                          sort_keys=True))


@plan.command()
@click.argument("campaign_id")
@click.option("--n-draws", default=500, type=int, show_default=True)
@click.option("--n-eval", default=100, type=int, show_default=True)
@click.option("--p", default=0.05, type=float, show_default=True)
@click.option("--use-level", default=0.1, type=float, show_default=True)
@click.pass_obj
def propose(store, campaign_id, n_draws, n_eval, p, use_level):
    """Propose the next stress level."""
    try:
        prop = store.propose(campaign_id, UseProfile((use_level,), (1.0,)),
                             p, n_draws, n_eval)
    except KeyError:
        raise click.ClickException(f"no campaign {campaign_id!r}")
    click.echo(json.dumps(prop, sort_keys=True))


@plan.command()
@click.argument("campaign_id")
@click.option("--q", required=True, type=float, help="stress ratio tested")
@click.option("--cycles", required=True, type=float)
@click.option("--censored", is_flag=True, help="runout at the cycle limit")
@click.option("--expected-version", required=True, type=int)
@click.pass_obj
def record(store, campaign_id, q, cycles, censored, expected_version):
    """Record one test outcome (compare-and-swap on version)."""
    try:
        v = store.record(campaign_id, q, cycles, censored, expected_version)
    except KeyError:
        raise click.ClickException(f"no campaign {campaign_id!r}")
    except VersionConflict as e:
        click.echo(json.dumps({"error": "version conflict",
                               "current_version": e.current}, sort_keys=True))
        sys.exit(1)
    click.echo(json.dumps({"version": v}, sort_keys=True))


@plan.command()
@click.argument("campaign_id")
@click.pass_obj
def status(store, campaign_id):
    """Print the full campaign view."""
    try:
        camp = store.load(campaign_id)
    except KeyError:
        raise click.ClickException(f"no campaign {campaign_id!r}")
    click.echo(json.dumps(camp.to_view(), sort_keys=True))


# ---------------------------------------------------------------------------
# serve


@main.command()
@click.option("--port", default=None, type=int,
              help="listen port (env RELIKIT_PORT, default 8000)")
@click.option("--data", "data_dir", default=None,
              help="campaign store directory (env RELIKIT_DATA)")
def serve(port, data_dir):
    """Run the HTTP campaign service."""
    import uvicorn

    from .service import create_app
    port = port or int(os.environ.get("RELIKIT_PORT", "8000"))
    data_dir = data_dir or DEFAULT_DATA
    uvicorn.run(create_app(data_dir), host="127.0.0.1", port=port)


if __name__ == "__main__":
    main()
