"""Cumulative-exposure failure-time model with dynamic use-rate covariates.

A unit fails when its cumulative exposure u(t) = int_0^t exp[beta x(s)] ds
reaches a random threshold U with log-location-scale baseline cdf
F0(u) = Phi((log u - mu0)/sigma0). The covariate x(t) = log(R(t)/R0) is a
weekly-observed use-rate process modeled by a linear mixed-effects model
with design [1, log t].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import poibin
from .distcore import StdKind, std_cdf, std_logpdf, std_quantile, std_sf
from .lme import RandomEffectParams, fit_lme, numeric_hessian


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class UseRateSeries:
    """Weekly use-rate covariate observations for one unit.

    The value recorded at epoch times[j] applies over the interval
    (times[j-1], times[j]] (the first value extends back to 0, the last
    value carries forward beyond the final epoch).
    """

    times: np.ndarray
    values: np.ndarray
    baseline_rate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if len(self.times) == 0:
            raise ValueError("use-rate series must have at least one observation")
        if len(self.times) != len(self.values):
            raise ValueError("times and values length mismatch")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("covariate values must be finite")
        if not (self.baseline_rate > 0):
            raise ValueError("baseline_rate must be > 0")

    def value_at(self, t: float) -> float:
        """Step-function value of the covariate path at time t."""
        idx = int(np.searchsorted(self.times, t, side="left"))
        return float(self.values[min(idx, len(self.values) - 1)])


@dataclass(frozen=True)
class LifetimeUnitRecord:
    unit_id: str
    event_time: float
    failed: bool
    covariates: UseRateSeries

    def __post_init__(self):
        if not (self.event_time > 0):
            raise ValueError("event_time must be > 0")
        if self.covariates.times[-1] > self.event_time + 1e-9:
            raise ValueError("covariate epochs must not exceed the event time")


@dataclass(frozen=True)
class LifetimeParams:
    mu0: float
    sigma0: float
    beta: float

    def __post_init__(self):
        if not (self.sigma0 > 0):
            raise ValueError("sigma0 must be > 0")


@dataclass(frozen=True)
class CovariateLmeParams:
    eta: float
    sigma1: float
    sigma2: float
    rho: float
    sigma_eps: float

    def re(self) -> RandomEffectParams:
        return RandomEffectParams(self.sigma1, self.sigma2, self.rho,
                                  self.sigma_eps)

    def as_array(self) -> np.ndarray:
        return np.array([self.eta, self.sigma1, self.sigma2, self.rho,
                         self.sigma_eps])


@dataclass
class RemainingLifeEstimate:
    horizon: float
    rho_hat: float
    ci: tuple
    pi: tuple
    M: int
    B: int
    open_upper: bool = False


@dataclass
class FleetPrediction:
    risk_set_size: int
    horizons: np.ndarray
    point: np.ndarray
    pi_lower: np.ndarray
    pi_upper: np.ndarray
    count_cdf: np.ndarray = field(default=None)


# ---------------------------------------------------------------------------
# exposure and cdf


def _segments(series: UseRateSeries, t: float):
    """Step segments (durations, values) covering [0, t]."""
    if t <= 0:
        return np.array([]), np.array([])
    edges = np.concatenate([[0.0], series.times])
    durs, vals = [], []
    for j in range(len(series.values)):
        lo, hi = edges[j], edges[j + 1]
        if lo >= t:
            break
        durs.append(min(hi, t) - lo)
        vals.append(series.values[j])
    if t > edges[-1]:
        durs.append(t - edges[-1])
        vals.append(series.values[-1])
    return np.array(durs), np.array(vals)


def exposure(t: float, beta: float, covariates: UseRateSeries) -> float:
    """Cumulative exposure u(t) under piecewise-constant covariates."""
    if t < 0:
        raise ValueError("t must be >= 0")
    durs, vals = _segments(covariates, t)
    if len(durs) == 0:
        return 0.0
    return float(np.sum(np.exp(beta * vals) * durs))


def lifetime_cdf(t: float, params: LifetimeParams,
                 covariates: UseRateSeries, kind: StdKind) -> float:
    """F(t) = Phi((log u(t) - mu0)/sigma0); 0 at t = 0 by continuity."""
    u = exposure(t, params.beta, covariates)
    if u <= 0:
        return 0.0
    z = (math.log(u) - params.mu0) / params.sigma0
    return float(std_cdf(z, kind))


# ---------------------------------------------------------------------------
# fitting


def _padded_exposure_arrays(data):
    """Pad per-unit step segments into (n, K) duration/value matrices."""
    segs = [_segments(r.covariates, r.event_time) for r in data]
    K = max(len(d) for d, _ in segs)
    n = len(segs)
    durs = np.zeros((n, K))
    vals = np.zeros((n, K))
    for i, (d, v) in enumerate(segs):
        durs[i, :len(d)] = d
        vals[i, :len(v)] = v
    return durs, vals


def lifetime_loglik(params: LifetimeParams, data, kind: StdKind) -> float:
    """Log of the failure-time likelihood (density for failures, survivor
    for censored units), exposure evaluated by the step sum."""
    total = 0.0
    for rec in data:
        u = exposure(rec.event_time, params.beta, rec.covariates)
        z = (math.log(u) - params.mu0) / params.sigma0
        if rec.failed:
            x_t = rec.covariates.value_at(rec.event_time)
            total += (params.beta * x_t - math.log(params.sigma0)
                      - math.log(u) + std_logpdf(z, kind))
        else:
            total += math.log(std_sf(z, kind))
    return total


def fit_lifetime(data, kind: StdKind = StdKind.SEV, fix_beta: float = None):
    """ML fit of (mu0, sigma0, beta); covariance from the numeric Hessian.

    ``fix_beta`` pins the exposure coefficient (useful for the plain
    Weibull/lognormal reduction). Raises ValueError when no failures are
    present.
    """
    data = list(data)
    n_fail = sum(r.failed for r in data)
    if n_fail == 0:
        raise ValueError("no failures: the lifetime model is not estimable")

    durs, vals = _padded_exposure_arrays(data)
    failed = np.array([r.failed for r in data], dtype=bool)
    x_at_event = np.array([r.covariates.value_at(r.event_time) for r in data])

    def neg(v):
        mu0, logs0, beta = v
        if fix_beta is not None:
            beta = fix_beta
        s0 = math.exp(logs0)
        if abs(beta) > 50 or abs(logs0) > 20:
            return 1e12
        u = np.sum(np.exp(beta * vals) * durs, axis=1)
        z = (np.log(u) - mu0) / s0
        ll = np.where(
            failed,
            beta * x_at_event - logs0 - np.log(u) + std_logpdf(z, kind),
            np.log(np.maximum(std_sf(z, kind), 1e-300)),
        )
        out = -np.sum(ll)
        return out if np.isfinite(out) else 1e12

    # start at a beta=0 log-time moment fit
    log_t = np.log([r.event_time for r in data])
    x0 = np.array([np.mean(log_t) + 1.0, math.log(max(np.std(log_t), 0.3)), 0.0])
    res = optimize.minimize(neg, x0, method="Nelder-Mead",
                            options={"maxiter": 5000, "fatol": 1e-10,
                                     "xatol": 1e-9})
    res = optimize.minimize(neg, res.x, method="Nelder-Mead",
                            options={"maxiter": 5000, "fatol": 1e-12,
                                     "xatol": 1e-10})
    if not np.isfinite(res.fun):
        raise RuntimeError(f"lifetime fit did not converge: last iterate {res.x}")
    mu0, logs0, beta = res.x
    if fix_beta is not None:
        beta = fix_beta
    params = LifetimeParams(mu0, math.exp(logs0), beta)

    def neg_natural(v):
        return neg(np.array([v[0], math.log(max(v[1], 1e-12)), v[2]]))

    H = numeric_hessian(neg_natural, np.array([params.mu0, params.sigma0,
                                               params.beta]))
    cov = np.linalg.pinv(H)
    return params, cov, -res.fun


def fit_covariate(series_list, n_starts: int = 5):
    """ML fit of the use-rate LME: X(t) = eta + [1, log t] w + eps."""
    for s in series_list:
        if len(s.times) < 2:
            raise ValueError("each unit needs >= 2 covariate observations")
        if np.ptp(np.log(s.times)) <= 0:
            raise ValueError("singular design: all observation times equal")
    y_list = [s.values for s in series_list]
    X_list = [np.ones((len(s.times), 1)) for s in series_list]
    Z_list = [np.column_stack([np.ones(len(s.times)), np.log(s.times)])
              for s in series_list]
    beta, re, ll = fit_lme(y_list, X_list, Z_list, n_starts=n_starts)
    params = CovariateLmeParams(float(beta[0]), re.sigma1, re.sigma2, re.rho,
                                re.sigma_eps)

    def neg_natural(v):
        eta, s1, s2, rho, se = v
        try:
            re_v = RandomEffectParams(max(s1, 1e-10), max(s2, 1e-10),
                                      np.clip(rho, -0.999, 0.999),
                                      max(se, 1e-10))
        except ValueError:
            return 1e12
        from .lme import marginal_loglik
        out = -marginal_loglik(y_list, X_list, Z_list, np.array([eta]), re_v)
        return out if np.isfinite(out) else 1e12

    H = numeric_hessian(neg_natural, params.as_array())
    cov = np.linalg.pinv(H)
    return params, cov, ll


# ---------------------------------------------------------------------------
# conditional covariate simulation


def _lme_cov(params: CovariateLmeParams, times_a, times_b, same: bool):
    Za = np.column_stack([np.ones(len(times_a)), np.log(times_a)])
    Zb = np.column_stack([np.ones(len(times_b)), np.log(times_b)])
    C = Za @ params.re().sigma_w() @ Zb.T
    if same:
        C = C + params.sigma_eps**2 * np.eye(len(times_a))
    return C


def conditional_future_distribution(params: CovariateLmeParams,
                                    observed: UseRateSeries, future_times):
    """Gaussian conditional (mean, cov) of future covariate values given
    the observed series under the joint LME-implied normal."""
    future_times = np.asarray(future_times, dtype=float)
    if np.any(future_times <= observed.times[-1]):
        raise ValueError("future epochs must exceed the last observed epoch")
    t_o = observed.times
    C_oo = _lme_cov(params, t_o, t_o, same=True)
    C_ff = _lme_cov(params, future_times, future_times, same=True)
    C_fo = _lme_cov(params, future_times, t_o, same=False)
    resid = observed.values - params.eta
    sol = np.linalg.solve(C_oo, resid)
    mean = params.eta + C_fo @ sol
    cov = C_ff - C_fo @ np.linalg.solve(C_oo, C_fo.T)
    cov = 0.5 * (cov + cov.T)
    # guard against tiny negative eigenvalues from roundoff
    w = np.linalg.eigvalsh(cov)
    if w[0] < -1e-8 * max(abs(w[-1]), 1.0):
        raise ValueError("conditional covariance not positive semidefinite")
    if w[0] < 0:
        cov = cov + (1e-12 - w[0]) * np.eye(len(future_times))
    return mean, cov


def simulate_covariate_conditional(params: CovariateLmeParams,
                                   observed: UseRateSeries, future_times,
                                   rng: np.random.Generator, size: int = 1):
    """Draws (size, len(future_times)) from the conditional Gaussian."""
    mean, cov = conditional_future_distribution(params, observed, future_times)
    jitter = 1e-12 * max(float(np.max(np.diag(cov))), 1e-300)
    L = np.linalg.cholesky(cov + jitter * np.eye(len(mean)))
    z = rng.standard_normal((size, len(mean)))
    return mean + z @ L.T


# ---------------------------------------------------------------------------
# remaining-life prediction


def _rho_curve(unit: LifetimeUnitRecord, thetaT: LifetimeParams,
               thetaX: CovariateLmeParams, max_s: float, M: int,
               rng: np.random.Generator, kind: StdKind):
    """Monte-Carlo DRL curve rho_i(s) on a weekly grid s = 1..max_s.

    Returns (s_grid, rho_values, u_paths, u_t) where u_paths holds the
    simulated cumulative exposures at t_i + s per draw (used by the PI
    calibration).
    """
    t_i = unit.event_time
    n_steps = max(int(math.ceil(max_s)), 1)
    future = t_i + np.arange(1, n_steps + 1)
    x_fut = simulate_covariate_conditional(thetaX, unit.covariates, future,
                                           rng, size=M)
    u_t = exposure(t_i, thetaT.beta, unit.covariates)
    incr = np.exp(thetaT.beta * x_fut)  # weekly exposure increments
    u_paths = u_t + np.cumsum(incr, axis=1)  # (M, n_steps)
    s_grid = np.arange(1, n_steps + 1, dtype=float)
    F_t = std_cdf((math.log(u_t) - thetaT.mu0) / thetaT.sigma0, kind) if u_t > 0 else 0.0
    F_s = std_cdf((np.log(u_paths) - thetaT.mu0) / thetaT.sigma0, kind)
    rho = (F_s.mean(axis=0) - F_t) / max(1.0 - F_t, 1e-300)
    return s_grid, np.clip(rho, 0.0, 1.0), u_paths, u_t


def drl_estimate(unit: LifetimeUnitRecord, s: float, thetaT: LifetimeParams,
                 thetaX: CovariateLmeParams, M: int,
                 rng: np.random.Generator,
                 kind: StdKind = StdKind.SEV) -> float:
    """Probability the surviving unit fails within the next s weeks."""
    if unit.failed:
        raise ValueError("unit already failed; DRL undefined")
    if s <= 0:
        return 0.0
    if M < 1:
        raise ValueError("M must be >= 1")
    s_grid, rho, _, _ = _rho_curve(unit, thetaT, thetaX, s, M, rng, kind)
    return float(np.interp(s, np.concatenate([[0.0], s_grid]),
                           np.concatenate([[0.0], rho])))


def _draw_params(thetaT, covT, thetaX, covX, rng):
    """One parametric-bootstrap parameter draw, rejecting invalid values."""
    for _ in range(200):
        vT = rng.multivariate_normal([thetaT.mu0, thetaT.sigma0, thetaT.beta],
                                     covT)
        vX = rng.multivariate_normal(thetaX.as_array(), covX)
        if vT[1] <= 0 or vX[4] <= 0 or vX[1] < 0 or vX[2] < 0:
            continue
        if not (-0.999 < vX[3] < 0.999):
            continue
        return (LifetimeParams(vT[0], vT[1], vT[2]),
                CovariateLmeParams(vX[0], vX[1], vX[2], vX[3], vX[4]))
    raise ValueError("bootstrap covariance yields no valid parameter draws; "
                     "check positive definiteness")


def _order_stat_index(alpha: float, B: int) -> int:
    """Round-half-away-from-zero [alpha*B], clamped to [1, B]."""
    k = math.floor(alpha * B + 0.5)
    return min(max(k, 1), B)


def drl_ci(unit, s, thetaT, covT, thetaX, covX, B: int, alpha: float, M: int,
           rng: np.random.Generator, kind: StdKind = StdKind.SEV):
    """Parametric-bootstrap CI from B replicate DRL estimates."""
    if B < 2.0 / alpha:
        raise ValueError("B too small for the requested alpha")
    reps = np.empty(B)
    for b in range(B):
        pT, pX = _draw_params(thetaT, covT, thetaX, covX, rng)
        reps[b] = drl_estimate(unit, s, pT, pX, M, rng, kind)
    reps.sort()
    lo = reps[_order_stat_index(alpha, B) - 1]
    hi = reps[_order_stat_index(1.0 - alpha, B) - 1]
    return float(lo), float(hi)


def remaining_life_pi(unit, thetaT: LifetimeParams, thetaX: CovariateLmeParams,
                      alpha: float, M: int, rng: np.random.Generator,
                      kind: StdKind = StdKind.SEV, n_cal: int = 400,
                      horizon_factor: float = 20.0):
    """Calibrated PI of the remaining life, solving rho_i(S) = v_q.

    The calibration quantiles v come from a Monte Carlo of rho_i(S_i) with
    S_i simulated from the fitted unit-level model (covariate path drawn
    conditionally, threshold drawn from F0 truncated to survival).
    """
    max_s = horizon_factor * unit.event_time
    s_grid, rho, u_paths, u_t = _rho_curve(unit, thetaT, thetaX, max_s, M,
                                           rng, kind)
    full_s = np.concatenate([[0.0], s_grid])
    full_rho = np.concatenate([[0.0], rho])

    # simulate remaining lives S_i from the fitted model
    F_t = std_cdf((math.log(u_t) - thetaT.mu0) / thetaT.sigma0, kind) if u_t > 0 else 0.0
    idx = rng.integers(0, u_paths.shape[0], size=n_cal)
    v = rng.uniform(size=n_cal)
    p_target = F_t + v * (1.0 - F_t)
    u_target = np.exp(thetaT.mu0 + thetaT.sigma0
                      * std_quantile(np.clip(p_target, 1e-12, 1 - 1e-12), kind))
    S_sim = np.empty(n_cal)
    for k in range(n_cal):
        path = np.concatenate([[u_t], u_paths[idx[k]]])
        if u_target[k] >= path[-1]:
            S_sim[k] = full_s[-1]
        else:
            S_sim[k] = np.interp(u_target[k], path, full_s)
    rho_at_S = np.interp(S_sim, full_s, full_rho)
    v_lo = float(np.quantile(rho_at_S, alpha / 2.0))
    v_hi = float(np.quantile(rho_at_S, 1.0 - alpha / 2.0))

    open_upper = v_hi >= full_rho[-1]

    def invert(vq):
        if vq <= full_rho[0]:
            return 0.0
        if vq >= full_rho[-1]:
            return float(full_s[-1])
        # rho is nondecreasing; np.interp on the swapped axes inverts it
        mono = np.maximum.accumulate(full_rho)
        return float(np.interp(vq, mono, full_s))

    return invert(v_lo), invert(v_hi), open_upper


# ---------------------------------------------------------------------------
# fleet prediction


def fleet_count_cdf(rhos, n_k=None):
    """Exact Poisson-binomial cdf of the fleet failure count."""
    return poibin.cdf(rhos, n_k)


def fleet_prediction(at_risk_units, thetaT, covT, thetaX, covX, horizons,
                     alpha: float, M: int, B: int, rng: np.random.Generator,
                     kind: StdKind = StdKind.SEV) -> FleetPrediction:
    """Fleet failure-count prediction over a horizon grid.

    The point prediction sums per-unit DRLs; the interval mixes the exact
    Poisson-binomial count distribution over B parametric-bootstrap
    parameter draws and reads off predictive quantiles.
    """
    units = [u for u in at_risk_units if not u.failed]
    if not units:
        raise ValueError("empty risk set")
    horizons = np.asarray(horizons, dtype=float)
    max_s = float(np.max(horizons))

    def rho_matrix(pT, pX, M_use):
        rhos = np.empty((len(units), len(horizons)))
        for i, u in enumerate(units):
            if max_s <= 0:
                rhos[i] = 0.0
                continue
            s_grid, rho, _, _ = _rho_curve(u, pT, pX, max_s, M_use, rng, kind)
            rhos[i] = np.interp(horizons, np.concatenate([[0.0], s_grid]),
                                np.concatenate([[0.0], rho]))
        return rhos

    rhos = rho_matrix(thetaT, thetaX, M)
    point = rhos.sum(axis=0)

    n_star = len(units)
    mixed_cdf = np.zeros((len(horizons), n_star + 1))
    for b in range(B):
        pT, pX = _draw_params(thetaT, covT, thetaX, covX, rng)
        rb = rho_matrix(pT, pX, max(M // 4, 8))
        for h in range(len(horizons)):
            mixed_cdf[h] += poibin.cdf(rb[:, h])
    mixed_cdf /= B

    lo = np.array([np.searchsorted(mixed_cdf[h], alpha / 2.0 - 1e-15)
                   for h in range(len(horizons))], dtype=float)
    hi = np.array([np.searchsorted(mixed_cdf[h], 1.0 - alpha / 2.0 - 1e-15)
                   for h in range(len(horizons))], dtype=float)
    count_cdf = poibin.cdf(rhos[:, -1]) if max_s > 0 else None
    return FleetPrediction(n_star, horizons, point, lo, hi, count_cdf)


# ---------------------------------------------------------------------------
# simulation support


def simulate_lifetime_fleet(n: int, window: float, thetaT: LifetimeParams,
                            thetaX: CovariateLmeParams,
                            rng: np.random.Generator,
                            kind: StdKind = StdKind.SEV,
                            baseline_rate: float = 1.0):
    """Simulate a fleet observed over [0, window] weeks (weekly covariates)."""
    weeks = np.arange(1.0, math.floor(window) + 1.0)
    sw = thetaX.re().sigma_w()
    L = np.linalg.cholesky(sw + 1e-14 * np.eye(2))
    records = []
    for i in range(n):
        w = L @ rng.standard_normal(2)
        x = (thetaX.eta + w[0] + w[1] * np.log(weeks)
             + thetaX.sigma_eps * rng.standard_normal(len(weeks)))
        series = UseRateSeries(weeks, x, baseline_rate)
        u_grid = np.cumsum(np.exp(thetaT.beta * x))
        U = math.exp(thetaT.mu0 + thetaT.sigma0
                     * std_quantile(rng.uniform(1e-15, 1 - 1e-15), kind))
        if U >= u_grid[-1]:
            records.append(LifetimeUnitRecord(f"u{i}", window, False, series))
        else:
            t_fail = float(np.interp(U, np.concatenate([[0.0], u_grid]),
                                     np.concatenate([[0.0], weeks])))
            t_fail = max(t_fail, 1e-6)
            k = int(np.searchsorted(weeks, t_fail, side="right"))
            if k == 0:
                trunc = UseRateSeries([t_fail], [x[0]], baseline_rate)
            else:
                trunc = UseRateSeries(weeks[:k], x[:k], baseline_rate)
            records.append(LifetimeUnitRecord(f"u{i}", t_fail, True, trunc))
    return records
