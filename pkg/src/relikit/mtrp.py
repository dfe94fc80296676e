"""Multi-level trend-renewal process (two-level repairable systems):
intensity evaluation, likelihood, simulation, Bayesian estimation, and
component-event count prediction.

Component events occur with intensity
    lambda_c(t) = h_c[G(t)] * lambda_s(t),
where G(t) is the transformed gap since the last replacement event of any
type on the subsystem-adjusted cumulative scale, and
    lambda_s(t) = h_s{Lam(t) - Lam(last subsystem event)} * lambda(t),
    lambda(t)   = lambda_b(t) exp(gamma * log X(t) + w).
The baseline trend lambda_b is power-law; h_c, h_s are the hazards of
mean-one Weibull renewal distributions (scale fixed by shape for
identifiability); w is a unit-level N(0, sigma_r^2) effect.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "RenewalSpec", "UsagePath", "EventHistory", "MtrpParams", "MtrpPriors",
    "PosteriorDraws", "intensity_eval", "mtrp_loglik", "simulate_mtrp",
    "fit_mtrp_bayes", "predict_counts", "gelman_rubin", "CountPrediction",
]


# ---------------------------------------------------------------------------
# renewal distributions (mean-one Weibull)


@dataclass(frozen=True)
class RenewalSpec:
    """Weibull renewal distribution normalized to mean one.

    The scale is 1/Gamma(1 + 1/shape) so the transformed gaps have unit
    mean regardless of shape; shape 1 is the exponential / Poisson case.
    """

    shape: float

    def __post_init__(self):
        if not (self.shape > 0 and np.isfinite(self.shape)):
            raise ValueError("renewal shape must be positive and finite")

    @property
    def scale(self) -> float:
        return math.exp(-gammaln(1.0 + 1.0 / self.shape))

    def cum_hazard(self, x):
        return (np.maximum(x, 0.0) / self.scale) ** self.shape

    def inv_cum_hazard(self, v):
        return self.scale * np.maximum(v, 0.0) ** (1.0 / self.shape)

    def log_hazard(self, x):
        k, c = self.shape, self.scale
        x = np.maximum(x, 1e-300)
        return math.log(k / c) + (k - 1.0) * np.log(x / c)

    def log_pdf(self, x):
        return self.log_hazard(x) - self.cum_hazard(x)

    def log_sf(self, x):
        return -self.cum_hazard(x)

    def sample(self, rng: np.random.Generator, size=None):
        return self.inv_cum_hazard(rng.exponential(size=size))

    def sample_conditional(self, elapsed: float, rng: np.random.Generator):
        """Draw a gap conditional on exceeding ``elapsed``."""
        return self.inv_cum_hazard(self.cum_hazard(elapsed) +
                                   rng.exponential())


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class UsagePath:
    """Piecewise-constant cumulative-usage covariate X(t).

    ``times`` are segment start points beginning at 0; ``values`` the
    (positive, nondecreasing) usage level on [times[k], times[k+1]).
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if len(t) != len(v) or len(t) == 0:
            raise ValueError("times and values must be equal nonzero length")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("times must start at 0 and strictly increase")
        if np.any(v <= 0):
            raise ValueError("usage must be positive where log is applied")
        if np.any(np.diff(v) < 0):
            raise ValueError("cumulative usage must be nondecreasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def value_at(self, t):
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float),
                              side="right") - 1
        return self.values[np.maximum(idx, 0)]

    def extended(self, horizon: float, rule: str = "lvcf") -> "UsagePath":
        """Usage path extrapolated out to ``horizon``."""
        if rule == "lvcf":
            return self
        if rule == "linear" and len(self.times) >= 2:
            slope = ((self.values[-1] - self.values[0]) /
                     max(self.times[-1] - self.times[0], 1e-12))
            extra_t = self.times[-1] + np.arange(1.0, max(
                horizon - self.times[-1], 0.0) + 1.0)
            extra_v = self.values[-1] + slope * (extra_t - self.times[-1])
            return UsagePath(np.concatenate([self.times, extra_t]),
                             np.concatenate([self.values,
                                             np.maximum(extra_v, 1e-12)]))
        return self


@dataclass(frozen=True)
class EventHistory:
    """Observed replacement events of one system over (0, tau]."""

    unit_id: str
    tau: float
    times: np.ndarray      # ordered event times in (0, tau)
    types: np.ndarray      # 1 = component event, 0 = subsystem event
    usage: UsagePath

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        d = np.asarray(self.types, dtype=int)
        if len(t) != len(d):
            raise ValueError("times and types length mismatch")
        if len(t) and (t[0] <= 0 or np.any(np.diff(t) <= 0) or t[-1] >= self.tau):
            raise ValueError("event times must satisfy 0 < t1 < ... < tau")
        if not np.all(np.isin(d, (0, 1))):
            raise ValueError("types must be binary")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "types", d)

    @property
    def n_component(self) -> int:
        return int(np.sum(self.types == 1))

    @property
    def n_subsystem(self) -> int:
        return int(np.sum(self.types == 0))


@dataclass
class MtrpParams:
    """HMTRP parameters; ``w`` holds per-unit effects aligned with the
    history list order (empty for population-level evaluation)."""

    renewal_c: RenewalSpec
    renewal_s: RenewalSpec
    beta_b: float
    eta_b: float
    gamma: float
    sigma_r: float = 0.0
    w: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if not (self.beta_b > 0 and self.eta_b > 0):
            raise ValueError("baseline trend parameters must be positive")
        if self.sigma_r < 0:
            raise ValueError("sigma_r must be >= 0")
        self.w = np.asarray(self.w, dtype=float)

    def unit_w(self, i: int) -> float:
        return float(self.w[i]) if i < len(self.w) else 0.0


# ---------------------------------------------------------------------------
# cumulative intensity machinery


class _UnitIntensity:
    """Analytic lambda/Lambda/inverse for one unit at given parameters.

    With a piecewise-constant usage path the cumulative intensity is a sum
    of closed-form power-law increments, so evaluation and inversion need
    no numeric integration.
    """

    def __init__(self, usage: UsagePath, horizon: float, beta_b: float,
                 eta_b: float, gamma: float, w: float):
        self.beta = beta_b
        self.eta = eta_b
        # segment boundaries covering (0, horizon]
        t = usage.times[usage.times < horizon]
        v = usage.values[:len(t)]
        self.bounds = np.concatenate([t, [horizon]])
        self.rho = np.exp(gamma * np.log(v) + w)
        cb = (self.bounds / eta_b) ** beta_b
        self.cum = np.concatenate([[0.0], np.cumsum(self.rho * np.diff(cb))])
        self._cb = cb

    def lam(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.bounds, t, side="right") - 1,
                      0, len(self.rho) - 1)
        base = (self.beta / self.eta) * (np.maximum(t, 1e-300) / self.eta) \
            ** (self.beta - 1.0)
        return self.rho[idx] * base

    def Lam(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.bounds, t, side="right") - 1,
                      0, len(self.rho) - 1)
        frac = (t / self.eta) ** self.beta - self._cb[idx]
        return self.cum[idx] + self.rho[idx] * frac

    def Lam_inv(self, v: float) -> float:
        """Calendar time with cumulative intensity v (inf if beyond span)."""
        if v >= self.cum[-1]:
            return math.inf
        k = int(np.searchsorted(self.cum, v, side="right") - 1)
        k = min(max(k, 0), len(self.rho) - 1)
        cb = self._cb[k] + (v - self.cum[k]) / self.rho[k]
        return self.eta * cb ** (1.0 / self.beta)


def _segment_structure(history: EventHistory):
    """Interval endpoints (0, t_1, ..., t_N, tau) and the last subsystem
    event time applicable within each interval."""
    pts = np.concatenate([[0.0], history.times, [history.tau]])
    last_s = np.zeros(len(pts) - 1)
    cur = 0.0
    for j, (t, d) in enumerate(zip(history.times, history.types)):
        if d == 0:
            cur = t
        if j + 1 < len(last_s):
            last_s[j + 1] = cur
    return pts, last_s


# ---------------------------------------------------------------------------
# intensity and likelihood


def intensity_eval(t: float, history: EventHistory, params: MtrpParams,
                   w: float = 0.0):
    """(lambda, lambda_s, lambda_c) at time t given the history up to t-."""
    if not (0.0 < t <= history.tau):
        raise ValueError("t must lie in (0, tau]")
    if history.usage.value_at(t) <= 0:
        raise ValueError("usage must be positive at t")
    ui = _UnitIntensity(history.usage, max(history.tau, t), params.beta_b,
                        params.eta_b, params.gamma, w)
    before = history.times < t
    sub_times = history.times[before & (history.types == 0)]
    last_s = float(sub_times[-1]) if len(sub_times) else 0.0
    all_times = history.times[before]
    last_any = float(all_times[-1]) if len(all_times) else 0.0

    lam = float(ui.lam(t))
    gap_s = float(ui.Lam(t) - ui.Lam(last_s))
    lam_s = math.exp(params.renewal_s.log_hazard(gap_s)) * lam

    # transformed gap on the subsystem-adjusted scale since the last
    # replacement event of any type
    Hs = params.renewal_s.cum_hazard
    pts, seg_last_s = _segment_structure(history)
    k = int(np.searchsorted(pts, t, side="left")) - 1
    k = min(max(k, 0), len(seg_last_s) - 1)
    a, ls = max(last_any, 0.0), seg_last_s[k]
    gap_c = float(Hs(ui.Lam(t) - ui.Lam(ls)) - Hs(ui.Lam(a) - ui.Lam(ls)))
    lam_c = math.exp(params.renewal_c.log_hazard(gap_c)) * lam_s
    return lam, lam_s, lam_c


def _unit_loglik(history: EventHistory, params: MtrpParams, w: float) -> float:
    ui = _UnitIntensity(history.usage, history.tau, params.beta_b,
                        params.eta_b, params.gamma, w)
    pts, last_s = _segment_structure(history)
    Lam_pts = ui.Lam(pts)
    Lam_ls = ui.Lam(last_s)
    Hs = params.renewal_s.cum_hazard
    # transformed gaps on the subsystem-adjusted scale per interval
    G = Hs(Lam_pts[1:] - Lam_ls) - Hs(Lam_pts[:-1] - Lam_ls)
    comp = np.concatenate([history.types == 1, [False]])
    ll = float(np.sum(params.renewal_c.log_sf(G[~comp[:len(G)]])))
    if np.any(comp[:len(G)]):
        idx = np.where(comp[:len(G)])[0]
        te = pts[idx + 1]
        gap_e = Lam_pts[idx + 1] - Lam_ls[idx]
        log_lam_s = (params.renewal_s.log_hazard(gap_e) +
                     np.log(ui.lam(te)))
        ll += float(np.sum(params.renewal_c.log_pdf(G[idx]) + log_lam_s))
    return ll


def mtrp_loglik(params: MtrpParams, histories) -> float:
    """Log-likelihood of the event histories; -inf for invalid parameters.

    Component-event intervals contribute a renewal density times the
    subsystem-adjusted intensity; intervals ended by subsystem events or
    by the observation horizon contribute survivor terms.
    """
    histories = list(histories)
    total = 0.0
    for i, h in enumerate(histories):
        total += _unit_loglik(h, params, params.unit_w(i))
    if not np.isfinite(total):
        return -math.inf
    return total


# ---------------------------------------------------------------------------
# simulation


def _simulate_component_times(params: MtrpParams, ui: _UnitIntensity,
                              t0: float, tau: float, sub_times,
                              rng: np.random.Generator,
                              g0_comp: float = 0.0, last_s0: float = 0.0):
    """Sequential component-event generation given subsystem times.

    The component clock lives on the subsystem-adjusted cumulative scale
    and resets at every replacement event; the first pending gap may be
    conditioned on an already elapsed amount ``g0_comp``.
    """
    Hs = params.renewal_s.cum_hazard
    Hs_inv = params.renewal_s.inv_cum_hazard
    sub_times = [t for t in sub_times if t0 < t < tau]
    out_t, out_d = [], []
    t_prev, last_s = t0, last_s0
    sub_iter = iter(sub_times + [math.inf])
    t_s_next = next(sub_iter)
    G = params.renewal_c.sample_conditional(g0_comp, rng) - g0_comp \
        if g0_comp > 0 else params.renewal_c.sample(rng)
    guard = 0
    while t_prev < tau:
        guard += 1
        if guard > 100_000:
            raise RuntimeError("simulation failed to terminate")
        # invert Lam_s(t) - Lam_s(t_prev) = G within the current
        # inter-subsystem-event stretch
        base = Hs(ui.Lam(t_prev) - ui.Lam(last_s))
        x = Hs_inv(base + G)
        v = ui.Lam(last_s) + x
        t_c = ui.Lam_inv(v)
        bound = min(t_s_next, tau)
        if t_c <= bound:
            out_t.append(t_c)
            out_d.append(1)
            t_prev = t_c
            G = params.renewal_c.sample(rng)
        elif bound == tau:
            break
        else:
            # subsystem event arrives first; the component gap is
            # right-censored and the clock resets
            out_t.append(t_s_next)
            out_d.append(0)
            t_prev = t_s_next
            last_s = t_s_next
            t_s_next = next(sub_iter)
            G = params.renewal_c.sample(rng)
    return out_t, out_d


def simulate_mtrp(params: MtrpParams, tau: float, usage: UsagePath,
                  rng: np.random.Generator, w: float = None,
                  unit_id: str = "sim", subsystem_times=None) -> EventHistory:
    """Forward-simulate one system over (0, tau].

    Subsystem events follow a trend-renewal process with renewal
    ``renewal_s`` on the cumulative-intensity scale unless an explicit
    list is supplied; component events are generated conditionally on
    them. Deterministic per rng state.
    """
    if w is None:
        w = float(rng.normal(0.0, params.sigma_r)) if params.sigma_r > 0 else 0.0
    if tau <= 0:
        return EventHistory(unit_id, max(tau, 0.0), np.zeros(0),
                            np.zeros(0, dtype=int), usage)
    ui = _UnitIntensity(usage, tau, params.beta_b, params.eta_b,
                        params.gamma, w)
    if ui.cum[-1] <= 0:
        return EventHistory(unit_id, tau, np.zeros(0), np.zeros(0, dtype=int),
                            usage)
    if subsystem_times is None:
        subsystem_times = []
        v = 0.0
        while True:
            v += params.renewal_s.sample(rng)
            t = ui.Lam_inv(v)
            if t >= tau:
                break
            subsystem_times.append(t)
    else:
        subsystem_times = [float(t) for t in subsystem_times if 0 < t < tau]

    ct, cd = _simulate_component_times(params, ui, 0.0, tau,
                                       subsystem_times, rng)
    times = np.array(ct)
    types = np.array(cd, dtype=int)
    order = np.argsort(times)
    return EventHistory(unit_id, tau, times[order], types[order], usage)


# ---------------------------------------------------------------------------
# Bayesian estimation


@dataclass
class MtrpPriors:
    """Diffuse defaults: wide lognormal on positive parameters, normal on
    gamma, half-normal on sigma_r."""

    lognormal_sd: float = 5.0
    gamma_sd: float = 10.0
    sigma_r_scale: float = 2.0

    def log_prior(self, theta: np.ndarray) -> float:
        # theta = (log k_c, log k_s, log beta_b, log eta_b, gamma, log sigma_r)
        lp = -0.5 * np.sum((theta[:4] / self.lognormal_sd) ** 2)
        lp += -0.5 * (theta[4] / self.gamma_sd) ** 2
        sr = math.exp(theta[5])
        # half-normal on sigma_r with log-scale Jacobian
        lp += -0.5 * (sr / self.sigma_r_scale) ** 2 + theta[5]
        return lp


@dataclass
class PosteriorDraws:
    samples: np.ndarray        # (n_draws, 6 + n_units)
    names: list
    chain_ids: np.ndarray
    acceptance: dict

    def params_at(self, row: int) -> MtrpParams:
        v = self.samples[row]
        return MtrpParams(RenewalSpec(v[0]), RenewalSpec(v[1]), v[2], v[3],
                          v[4], v[5], v[6:])

    def summary(self, level: float = 0.95):
        lo = np.quantile(self.samples, (1 - level) / 2, axis=0)
        hi = np.quantile(self.samples, 1 - (1 - level) / 2, axis=0)
        med = np.median(self.samples, axis=0)
        return {n: (float(m), float(a), float(b))
                for n, m, a, b in zip(self.names, med, lo, hi)}


def gelman_rubin(draws_by_chain) -> np.ndarray:
    """Potential scale reduction factor per parameter column."""
    chains = [np.asarray(c, dtype=float) for c in draws_by_chain]
    m = len(chains)
    n = min(len(c) for c in chains)
    X = np.stack([c[-n:] for c in chains])           # (m, n, p)
    means = X.mean(axis=1)
    W = np.mean(X.var(axis=1, ddof=1), axis=0)
    B = n * means.var(axis=0, ddof=1) if m > 1 else np.zeros_like(W)
    var_hat = (n - 1) / n * W + B / n
    with np.errstate(divide="ignore", invalid="ignore"):
        R = np.sqrt(var_hat / np.where(W > 0, W, np.nan))
    return np.where(np.isfinite(R), R, 1.0)


def _theta_to_params(theta: np.ndarray, w: np.ndarray) -> MtrpParams:
    return MtrpParams(RenewalSpec(math.exp(theta[0])),
                      RenewalSpec(math.exp(theta[1])),
                      math.exp(theta[2]), math.exp(theta[3]),
                      theta[4], math.exp(theta[5]), w)


def fit_mtrp_bayes(histories, priors: MtrpPriors = None, chains: int = 2,
                   iterations: int = 3000, rng: np.random.Generator = None,
                   burn_in: int = None, estimate_w: bool = True):
    """Metropolis-within-Gibbs sampler for the heterogeneous model.

    Component-wise random-walk updates on (log shapes, log trend
    parameters, gamma, log sigma_r) and each unit effect w_i; proposal
    scales adapt toward ~30% acceptance during burn-in only.
    """
    histories = list(histories)
    if not histories:
        raise ValueError("need at least one history")
    if sum(h.n_component + h.n_subsystem for h in histories) == 0:
        raise ValueError("need at least one event to estimate the model")
    priors = priors or MtrpPriors()
    rng = rng or np.random.default_rng()
    burn_in = iterations // 2 if burn_in is None else burn_in
    n_units = len(histories)
    names = (["shape_c", "shape_s", "beta_b", "eta_b", "gamma", "sigma_r"] +
             [f"w[{h.unit_id}]" for h in histories])

    def unit_ll(theta, w_i, i):
        p = _theta_to_params(theta, np.zeros(0))
        try:
            return _unit_loglik(histories[i], p, w_i)
        except (ValueError, FloatingPointError, OverflowError):
            return -math.inf

    all_chains, all_ids, acc_out = [], [], {}
    for c in range(chains):
        crng = np.random.default_rng(rng.integers(2**63))
        theta = np.array([0.0, 0.0, 0.0,
                          math.log(np.mean([h.tau for h in histories])),
                          0.0, math.log(0.3)])
        w = np.zeros(n_units)
        ull = np.array([unit_ll(theta, w[i], i) for i in range(n_units)])
        step = np.full(6, 0.15)
        step_w = np.full(n_units, 0.3)
        acc = np.zeros(6)
        acc_w = np.zeros(n_units)
        n_try = np.zeros(6)
        kept = []
        for it in range(iterations):
            for k in range(6):
                if k == 5 and not estimate_w:
                    continue
                prop = theta.copy()
                prop[k] += step[k] * crng.standard_normal()
                if k == 5:
                    # sigma_r enters only through the w prior
                    sr0, sr1 = math.exp(theta[5]), math.exp(prop[5])
                    d = (priors.log_prior(prop) - priors.log_prior(theta) +
                         np.sum(-0.5 * (w / sr1) ** 2 - math.log(sr1)) -
                         np.sum(-0.5 * (w / sr0) ** 2 - math.log(sr0)))
                    new_ull = ull
                else:
                    new_ull = np.array([unit_ll(prop, w[i], i)
                                        for i in range(n_units)])
                    d = (np.sum(new_ull) - np.sum(ull) +
                         priors.log_prior(prop) - priors.log_prior(theta))
                n_try[k] += 1
                if math.log(crng.uniform()) < d:
                    theta, ull = prop, new_ull
                    acc[k] += 1
                if it < burn_in and n_try[k] % 50 == 0:
                    rate = acc[k] / n_try[k]
                    step[k] *= math.exp(0.5 * (rate - 0.3))
            if estimate_w:
                sr = math.exp(theta[5])
                for i in range(n_units):
                    wp = w[i] + step_w[i] * crng.standard_normal()
                    llp = unit_ll(theta, wp, i)
                    d = (llp - ull[i] - 0.5 * (wp**2 - w[i]**2) / sr**2)
                    if math.log(crng.uniform()) < d:
                        w[i], ull[i] = wp, llp
                        acc_w[i] += 1
                    if it < burn_in and (it + 1) % 50 == 0:
                        rate = acc_w[i] / (it + 1)
                        step_w[i] *= math.exp(0.5 * (rate - 0.3))
            if it >= burn_in:
                row = np.concatenate([np.exp(theta[:4]), [theta[4]],
                                      [math.exp(theta[5])], w])
                kept.append(row)
        kept = np.array(kept)
        all_chains.append(kept)
        all_ids.append(np.full(len(kept), c))
        acc_out[c] = {"global": (acc / np.maximum(n_try, 1)).tolist(),
                      "w_mean": float(np.mean(acc_w) / iterations)
                      if estimate_w else 0.0}
    samples = np.vstack(all_chains)
    draws = PosteriorDraws(samples, names, np.concatenate(all_ids), acc_out)
    draws.by_chain = all_chains
    return draws


# ---------------------------------------------------------------------------
# prediction


@dataclass
class CountPrediction:
    point: float
    interval: tuple
    totals: np.ndarray
    grid: np.ndarray = None
    curves: np.ndarray = None      # (draws, len(grid)) cumulative counts

    def curve_band(self, level: float = 0.95):
        a = (1 - level) / 2
        return (np.quantile(self.curves, a, axis=0),
                np.quantile(self.curves, 1 - a, axis=0))


def _future_component_count(params: MtrpParams, h: EventHistory, w: float,
                            t_star: float, rng, rule: str, grid=None):
    """Simulate component events in (tau, tau + t_star] conditional on the
    observed history (elapsed renewal gaps carried forward)."""
    tau2 = h.tau + t_star
    usage = h.usage.extended(tau2, rule)
    ui = _UnitIntensity(usage, tau2, params.beta_b, params.eta_b,
                        params.gamma, w)
    sub = h.times[h.types == 0]
    last_s = float(sub[-1]) if len(sub) else 0.0
    last_any = float(h.times[-1]) if len(h.times) else 0.0
    Hs = params.renewal_s.cum_hazard

    # future subsystem events: conditional renewal on the Lam scale
    sub_future = []
    elapsed = float(ui.Lam(h.tau) - ui.Lam(last_s))
    v = ui.Lam(last_s) + params.renewal_s.sample_conditional(elapsed, rng)
    cur_s = last_s
    while True:
        t = ui.Lam_inv(v)
        if t >= tau2:
            break
        sub_future.append(t)
        cur_s = t
        v = ui.Lam(cur_s) + params.renewal_s.sample(rng)

    g0 = float(Hs(ui.Lam(h.tau) - ui.Lam(last_s)) -
               Hs(ui.Lam(last_any) - ui.Lam(last_s)))
    ct, cd = _simulate_component_times(params, ui, h.tau, tau2, sub_future,
                                       rng, g0_comp=max(g0, 0.0),
                                       last_s0=last_s)
    comp_times = np.array([t for t, d in zip(ct, cd) if d == 1])
    if grid is None:
        return len(comp_times), None
    return len(comp_times), np.searchsorted(np.sort(comp_times - h.tau),
                                            grid, side="right")


def predict_counts(draws: PosteriorDraws, histories, t_star: float,
                   rng: np.random.Generator, M: int = 200,
                   usage_rule: str = "lvcf", grid=None) -> CountPrediction:
    """Posterior-predictive fleet component-event count over the next
    ``t_star`` time units; optional cumulative curves on ``grid``."""
    histories = list(histories)
    if t_star <= 0:
        z = np.zeros(M)
        return CountPrediction(0.0, (0.0, 0.0), z)
    n_draw = len(draws.samples)
    pick = rng.integers(0, n_draw, size=M)
    totals = np.zeros(M)
    curves = np.zeros((M, len(grid))) if grid is not None else None
    for m, row in enumerate(pick):
        p = draws.params_at(int(row))
        for i, h in enumerate(histories):
            w = p.unit_w(i)
            if len(p.w) == 0 and p.sigma_r > 0:
                w = float(rng.normal(0.0, p.sigma_r))
            cnt, curve = _future_component_count(p, h, w, t_star, rng,
                                                 usage_rule, grid)
            totals[m] += cnt
            if curves is not None:
                curves[m] += curve
    point = float(np.mean(totals))
    interval = (float(np.quantile(totals, 0.025)),
                float(np.quantile(totals, 0.975)))
    return CountPrediction(point, interval, totals,
                           None if grid is None else np.asarray(grid, float),
                           curves)
