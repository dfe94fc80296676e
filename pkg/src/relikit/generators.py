"""Synthetic dataset generators at realistic fleet/lab scales.

Each generator draws from a documented ground truth, writes the CSV
files for its schema plus a ``manifest.json``, and is byte-identical for
equal seeds. The truth constants are module-level so downstream checks
can compare fitted estimates against them.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .altsbd import AltParams, AltTestDatum, MaterialTestConfig, mu_model
from .covproc import CovariateProcessParams, simulate_covariate_process
from .degradation import (DegradationUnitRecord, FailureSpec, PathParams,
                          simulate_damage_path)
from .distcore import StdKind, std_cdf, std_quantile
from .lifetime import CovariateLmeParams, LifetimeParams, simulate_lifetime_fleet
from .lme import RandomEffectParams
from .mtrp import MtrpParams, RenewalSpec, UsagePath, simulate_mtrp
from .splines import BasisKind, ChannelSpec, SplineEffectSpec
from . import datasets
from .datasets import DatasetManifest

# ---------------------------------------------------------------------------
# ground truths


# fleet lifetime: ~4% failures over a 104-week observation window
LIFETIME_TRUTH = LifetimeParams(mu0=7.0, sigma0=0.7, beta=0.8)
LIFETIME_USE_TRUTH = CovariateLmeParams(eta=0.30, sigma1=0.12, sigma2=0.05,
                                        rho=0.2, sigma_eps=0.08)
LIFETIME_WINDOW = 104.0

# outdoor weathering covariates: daily (uv dosage, temperature, humidity)
WEATHER_TRUTH = CovariateProcessParams(
    mu=np.array([0.55, 18.0, 60.0]),
    kappa=np.array([0.25, 8.0, 8.0]),
    eta=np.array([80.0, 100.0, 30.0]),
    nu=np.array([0.15, 0.10]),
    varsigma=np.array([80.0, 100.0]),
    Q1=0.35 * np.eye(3),
    Q2=0.10 * np.eye(3),
    Sigma_e=np.diag([0.05, 2.0, 4.0]) ** 2,
)

# degradation path: damage decreases toward the failure threshold, with
# coefficients scaled so crossings concentrate in the 50-150 day range
DEGRADATION_SPEC = SplineEffectSpec((
    ChannelSpec(BasisKind.ISPLINE, (0.0, 0.6, 1.2), degree=2, sign=-1.0),
    ChannelSpec(BasisKind.ISPLINE, (-5.0, 18.0, 40.0), degree=2, sign=-1.0),
    ChannelSpec(BasisKind.CSPLINE, (20.0, 100.0), degree=2, sign=1.0),
))
DEGRADATION_TRUTH = PathParams(
    beta0=0.0,
    coefs=np.array([0.0014, 0.0009, 0.0007, 0.0005,
                    0.0007, 0.0005, 0.0003, 0.0002,
                    0.00003, 0.00002, 0.00001]),
    re=RandomEffectParams(0.010, 0.0002, 0.2, 0.005),
)
DEGRADATION_FAILURE = FailureSpec(threshold=-0.4, horizon=365.0)
DEGRADATION_START_WINDOW = (0.0, 180.0)

# fleet recurrent events: ~1.1 component and ~0.2 subsystem events per
# unit over 110 months of observation
RECURRENT_TRUTH = MtrpParams(
    renewal_c=RenewalSpec(1.8),
    renewal_s=RenewalSpec(1.0),
    beta_b=1.1,
    eta_b=270.0,
    gamma=0.35,
    sigma_r=0.3,
)
RECURRENT_TAU = 110.0
RECURRENT_SUBSYSTEM_RATE = 0.22 / 110.0  # exogenous replacements per month

# cyclic fatigue test: historical data at three standardized stress levels
ALT_TRUTH = AltParams(0.0157, 0.3188, 0.7259)
ALT_CONFIG = MaterialTestConfig(sigma_ult=1339.67)
ALT_LEVELS = (0.46, 0.52, 0.72)


def _manifest(kind, files, seed, note, out_dir):
    m = DatasetManifest(kind=kind, files=files, seed=seed, note=note)
    m.save(os.path.join(out_dir, "manifest.json"))
    return DatasetManifest.load(os.path.join(out_dir, "manifest.json"))


def generate_lifetime(out_dir: str, seed: int, n: int = 1800,
                      window: float = LIFETIME_WINDOW) -> DatasetManifest:
    """Staggered-entry fleet with weekly use rates; ~2-6% failures."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    records = simulate_lifetime_fleet(n, window, LIFETIME_TRUTH,
                                      LIFETIME_USE_TRUTH, rng, StdKind.SEV)
    datasets.save_lifetime(records, os.path.join(out_dir, "units.csv"),
                           os.path.join(out_dir, "userate.csv"))
    return _manifest("lifetime",
                     {"units": "units.csv", "userate": "userate.csv"},
                     seed, f"{n} units over {window:g} weeks", out_dir)


def generate_degradation(out_dir: str, seed: int, n: int = 36,
                         n_days: int = 180,
                         meas_every: int = 6) -> DatasetManifest:
    """Outdoor weathering study: daily covariates, periodic measurements."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    truth = DEGRADATION_TRUTH
    sw = truth.re.sigma_w()
    L = np.linalg.cholesky(sw + 1e-14 * np.eye(2))
    records = []
    for i in range(n):
        start = rng.uniform(*DEGRADATION_START_WINDOW)
        cov = simulate_covariate_process(WEATHER_TRUTH, n_days, rng,
                                         start_day=start)
        cov[:, 0] = np.maximum(cov[:, 0], 0.0)
        w = L @ rng.standard_normal(2)
        path = simulate_damage_path(truth, DEGRADATION_SPEC, cov, w)
        epochs = np.arange(1.0, n_days + 1.0)
        meas_idx = np.arange(meas_every - 1, n_days, meas_every)
        mt = epochs[meas_idx]
        y = (path[meas_idx]
             + truth.re.sigma_eps * rng.standard_normal(len(meas_idx)))
        records.append(DegradationUnitRecord(f"s{i:02d}", epochs, cov, mt, y))
    datasets.save_degradation(records,
                              os.path.join(out_dir, "deg_measurements.csv"),
                              os.path.join(out_dir, "deg_covariates.csv"))
    return _manifest("degradation",
                     {"measurements": "deg_measurements.csv",
                      "covariates": "deg_covariates.csv"},
                     seed, f"{n} specimens, {n_days} days", out_dir)


def generate_recurrent(out_dir: str, seed: int, n: int = 203,
                       tau: float = RECURRENT_TAU) -> DatasetManifest:
    """Vehicle fleet with monthly cumulative usage and two event types."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    truth = RECURRENT_TRUTH
    histories = []
    for i in range(n):
        rate = math.exp(rng.normal(0.0, 0.4))  # monthly usage multiplier
        months = np.arange(0.0, math.floor(tau) + 1.0)
        usage = UsagePath(months, rate * (months + 1.0))
        w = rng.normal(0.0, truth.sigma_r)
        k = rng.poisson(RECURRENT_SUBSYSTEM_RATE * tau)
        sub = np.sort(rng.uniform(0.0, tau, k)).tolist()
        h = simulate_mtrp(truth, tau, usage, rng, w=w, unit_id=f"v{i:03d}",
                          subsystem_times=sub)
        histories.append(h)
    datasets.save_recurrent(histories, os.path.join(out_dir, "events.csv"),
                            os.path.join(out_dir, "usage.csv"))
    return _manifest("recurrent",
                     {"events": "events.csv", "usage": "usage.csv"},
                     seed, f"{n} systems over {tau:g} months", out_dir)


def generate_alt(out_dir: str, seed: int, n: int = 14,
                 n_censored: int = 3) -> DatasetManifest:
    """Historical fatigue test: fixed failure/runout counts by design.

    Lifetimes at the higher stress levels are drawn conditional on
    failing before the runout threshold; the runouts sit at the lowest
    level, mirroring how such campaigns are reported.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    cfg = ALT_CONFIG
    n_failed = n - n_censored
    if n_failed < 1:
        raise ValueError("need at least one failure")
    data = []
    levels = [ALT_LEVELS[k % len(ALT_LEVELS)] for k in range(n_failed)]
    zeta_cap = math.log(cfg.censor_cycles)
    for q in sorted(levels):
        m = mu_model(q, ALT_TRUTH.A, ALT_TRUTH.B, cfg)
        z_cap = (zeta_cap - m) / ALT_TRUTH.nu
        p_fail = std_cdf(z_cap, StdKind.NORMAL)
        u = rng.uniform(0.0, p_fail)  # truncated below the runout
        t = math.exp(m + ALT_TRUTH.nu * std_quantile(u, StdKind.NORMAL))
        data.append(AltTestDatum(q, t, 0))
    for _ in range(n_censored):
        data.append(AltTestDatum(min(ALT_LEVELS), cfg.censor_cycles, 1))
    datasets.save_alt(data, os.path.join(out_dir, "alt.csv"))
    return _manifest("alt", {"data": "alt.csv"}, seed,
                     f"{n_failed} failures + {n_censored} runouts", out_dir)


GENERATORS = {
    "lifetime": generate_lifetime,
    "degradation": generate_degradation,
    "recurrent": generate_recurrent,
    "alt": generate_alt,
}


def generate(kind: str, out_dir: str, seed: int, **kw) -> DatasetManifest:
    if kind not in GENERATORS:
        raise ValueError(f"unknown dataset kind {kind!r}")
    return GENERATORS[kind](out_dir, seed, **kw)
