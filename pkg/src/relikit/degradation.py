"""General path degradation model with shape-restricted spline covariate
effects, constrained mixed-model estimation, and Monte-Carlo failure-cdf
prediction.

The observed measurement is y_i(t) = D[t; x_i] + w0_i + w1_i t + eps,
where the population path accumulates per-epoch damage
D(t) = beta0 + sum_l sign_l * sum_{u_k <= t} f_l[x_l(u_k)] (u_k - u_{k-1})
and each f_l is a nonnegative combination of a shape-restricted basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .covproc import CovariateProcessParams, simulate_covariate_process
from .lme import (RandomEffectParams, fit_lme, marginal_loglik,
                  predict_random_effects)
from .splines import SplineEffectSpec


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class DegradationUnitRecord:
    """One specimen: daily covariate epochs, sparse measurements.

    The zero epoch u_{i0} = 0 is implied; ``epochs`` holds the strictly
    increasing positive measurement/covariate days and ``covariates`` one
    row per epoch. ``meas_times`` must be a subset of ``epochs``.
    """

    unit_id: str
    epochs: np.ndarray        # (K,) days in service
    covariates: np.ndarray    # (K, p)
    meas_times: np.ndarray    # (m,) subset of epochs
    y: np.ndarray             # (m,)
    start_day: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.epochs, dtype=float)
        c = np.asarray(self.covariates, dtype=float)
        mt = np.asarray(self.meas_times, dtype=float)
        yy = np.asarray(self.y, dtype=float)
        if np.any(np.diff(e) <= 0) or (len(e) and e[0] <= 0):
            raise ValueError("epochs must be strictly increasing and positive")
        if c.shape[0] != len(e):
            raise ValueError("one covariate row per epoch required")
        if len(mt) != len(yy):
            raise ValueError("meas_times and y length mismatch")
        if not np.all(np.isin(mt, e)):
            raise ValueError("measurement epochs must be a subset of covariate epochs")
        object.__setattr__(self, "epochs", e)
        object.__setattr__(self, "covariates", c)
        object.__setattr__(self, "meas_times", mt)
        object.__setattr__(self, "y", yy)


@dataclass
class PathParams:
    beta0: float
    coefs: np.ndarray                 # constrained spline block, >= 0
    re: RandomEffectParams            # (sigma0, sigma1, rho, sigma_eps)


@dataclass
class FailureSpec:
    threshold: float
    horizon: float = 365.0
    grid_step: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.threshold):
            raise ValueError("threshold must be finite")


@dataclass
class DegradationFitReport:
    iterations: int
    converged: bool
    objective_trace: list
    loglik: float
    blups: np.ndarray
    residuals: list


# ---------------------------------------------------------------------------
# damage assembly


def channel_cumulative(record: DegradationUnitRecord, spec: SplineEffectSpec):
    """Per-channel cumulative basis exposure W_l at every epoch.

    Returns a list of (K, a_l) arrays with the channel sign folded in.
    """
    gaps = np.diff(np.concatenate([[0.0], record.epochs]))
    out = []
    for l, ch in enumerate(spec.channels):
        B = ch.basis_matrix(record.covariates[:, l])
        out.append(ch.sign * np.cumsum(B * gaps[:, None], axis=0))
    return out


def design_matrix(record: DegradationUnitRecord, spec: SplineEffectSpec,
                  times=None) -> np.ndarray:
    """Rows [1, U_11(t), ..., U_p a_p(t)] at the given times (default: the
    unit's measurement times). Times must be unit epochs."""
    times = record.meas_times if times is None else np.asarray(times, dtype=float)
    idx = np.searchsorted(record.epochs, times)
    if np.any(idx >= len(record.epochs)) or np.any(record.epochs[idx] != times):
        raise ValueError("requested time is not a covariate epoch")
    W = channel_cumulative(record, spec)
    cols = [np.ones((len(times), 1))] + [w[idx] for w in W]
    return np.hstack(cols)


def cumulative_damage(t: float, record: DegradationUnitRecord,
                      beta0: float, coefs, spec: SplineEffectSpec) -> float:
    """Population damage D(t) at an epoch of the record."""
    X = design_matrix(record, spec, times=[t])
    return float(X[0] @ np.concatenate([[beta0], np.asarray(coefs, dtype=float)]))


# ---------------------------------------------------------------------------
# constrained fitting


def _chol_psd(V: np.ndarray) -> np.ndarray:
    """Cholesky factor tolerant of numerically semi-definite matrices
    (arises in the noiseless limit where all variance components -> 0)."""
    try:
        return np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        w, U = np.linalg.eigh(V)
        floor = 1e-12 * max(float(w[-1]), 1e-300)
        return np.linalg.cholesky((U * np.maximum(w, floor)) @ U.T)


def _re_to_x0(re: RandomEffectParams) -> np.ndarray:
    return np.array([math.log(max(re.sigma1, 1e-8)),
                     math.log(max(re.sigma2, 1e-8)),
                     math.atanh(np.clip(re.rho, -0.999, 0.999)),
                     math.log(max(re.sigma_eps, 1e-8))])


def fit_degradation(data, spec: SplineEffectSpec, max_iter: int = 200,
                    tol: float = 1e-6):
    """Constrained ML fit alternating generalized least squares under the
    nonnegativity cone with variance-component refits.

    Returns (PathParams, DegradationFitReport). The tracked objective is
    the negative marginal log-likelihood; each sweep is coordinate ascent
    so the trace is nonincreasing up to optimizer tolerance.
    """
    data = list(data)
    if len(data) < 2:
        raise ValueError("need at least 2 units")
    for r in data:
        if len(r.y) < 3:
            raise ValueError(f"unit {r.unit_id}: need >= 3 measurements")

    y_list = [r.y for r in data]
    X_list = [design_matrix(r, spec) for r in data]
    Z_list = [np.column_stack([np.ones(len(r.meas_times)), r.meas_times])
              for r in data]

    X_all = np.vstack(X_list)
    ranks = np.linalg.matrix_rank(X_all)
    if ranks < X_all.shape[1]:
        # identify the offending channel for the error message
        col = spec.n_coef + 1
        offset = 1
        bad = []
        for l, ch in enumerate(spec.channels):
            sub = np.hstack([X_all[:, :1], X_all[:, offset:offset + ch.n_basis]])
            if np.linalg.matrix_rank(sub) < sub.shape[1]:
                bad.append(l)
            offset += ch.n_basis
        raise ValueError(f"rank-deficient design (channels {bad or 'joint'})")

    # step 1: unconstrained LME initialization
    beta, re, _ = fit_lme(y_list, X_list, Z_list, n_starts=3)

    n_coef = X_all.shape[1]
    lb = np.full(n_coef, 0.0)
    lb[0] = -np.inf
    # keeps the whitening well-conditioned when all variance components are
    # near zero (noiseless limit); negligible against any real noise level
    ridge = 1e-12 * max(float(np.var(np.concatenate(y_list))), 1e-12)
    trace = []
    converged = False
    prev = None
    for it in range(max_iter):
        # step 2: marginal covariances
        sw = re.sigma_w()
        V_list = [Z @ sw @ Z.T + (re.sigma_eps**2 + ridge) * np.eye(len(y))
                  for y, Z in zip(y_list, Z_list)]
        # step 3: constrained GLS on the whitened system
        Wy, WX = [], []
        for y, X, V in zip(y_list, X_list, V_list):
            L = _chol_psd(V)
            Wy.append(np.linalg.solve(L, y))
            WX.append(np.linalg.solve(L, X))
        res = optimize.lsq_linear(np.vstack(WX), np.concatenate(Wy),
                                  bounds=(lb, np.full(n_coef, np.inf)),
                                  method="bvls")
        beta = res.x
        # step 4: variance components from residuals
        r_list = [y - X @ beta for y, X in zip(y_list, X_list)]
        E_list = [np.zeros((len(r), 0)) for r in r_list]
        _, re, _ = fit_lme(r_list, E_list, Z_list, n_starts=1,
                           x0=_re_to_x0(re))
        obj = -marginal_loglik(y_list, X_list, Z_list, beta, re)
        trace.append(obj)
        cur = np.concatenate([beta, [re.sigma1, re.sigma2, re.rho,
                                     re.sigma_eps]])
        if prev is not None:
            rel = np.max(np.abs(cur - prev) / np.maximum(np.abs(prev), 1e-8))
            if rel < tol:
                converged = True
                prev = cur
                break
        prev = cur

    params = PathParams(float(beta[0]), beta[1:].copy(), re)
    r_list = [y - X @ beta for y, X in zip(y_list, X_list)]
    E_list = [np.zeros((len(r), 0)) for r in r_list]
    blups = predict_random_effects(r_list, E_list, Z_list, np.zeros(0), re)
    residuals = [r - Z @ w for r, Z, w in zip(r_list, Z_list, blups)]
    report = DegradationFitReport(len(trace), converged, trace, -trace[-1],
                                  blups, residuals)
    return params, report


# ---------------------------------------------------------------------------
# adjusted bootstrap


@dataclass
class DegradationBootstrap:
    coef_draws: np.ndarray          # (B, 1 + n_coef)
    intervals: np.ndarray           # (1 + n_coef, 2) bias-corrected percentile
    inflation_w: float
    inflation_e: float
    warning: str = ""


def bootstrap_degradation(data, spec: SplineEffectSpec, B: int,
                          rng: np.random.Generator, alpha: float = 0.05,
                          max_iter: int = 40) -> DegradationBootstrap:
    """Adjusted residual/random-effect bootstrap of the constrained fit.

    Predicted random effects and residuals are rescaled so their empirical
    second moments match the fitted variance components before resampling
    (the shrinkage of BLUPs would otherwise understate variability).
    """
    data = list(data)
    params, report = fit_degradation(data, spec)
    warning = "B < 100: intervals may be unstable" if B < 100 else ""

    X_list = [design_matrix(r, spec) for r in data]
    Z_list = [np.column_stack([np.ones(len(r.meas_times)), r.meas_times])
              for r in data]
    beta_hat = np.concatenate([[params.beta0], params.coefs])

    w_hat = report.blups
    resid = np.concatenate(report.residuals)
    # variance-inflation adjustment
    emp_w = w_hat.T @ w_hat / max(len(w_hat), 1)
    target_w = params.re.sigma_w()
    try:
        Lt = np.linalg.cholesky(target_w + 1e-14 * np.eye(2))
        Le = np.linalg.cholesky(emp_w + 1e-14 * np.eye(2))
        Tmat = Lt @ np.linalg.inv(Le)
        infl_w = float(np.linalg.norm(Tmat) / math.sqrt(2))
        w_adj = w_hat @ Tmat.T
    except np.linalg.LinAlgError:
        w_adj = w_hat
        infl_w = 1.0
    sd_e = np.std(resid) if np.std(resid) > 0 else 1.0
    infl_e = params.re.sigma_eps / sd_e
    resid_adj = resid * infl_e

    draws = np.empty((B, len(beta_hat)))
    for b in range(B):
        boot = []
        for i, r in enumerate(data):
            w = w_adj[rng.integers(0, len(w_adj))]
            e = resid_adj[rng.integers(0, len(resid_adj), size=len(r.y))]
            y_star = X_list[i] @ beta_hat + Z_list[i] @ w + e
            boot.append(DegradationUnitRecord(r.unit_id, r.epochs,
                                              r.covariates, r.meas_times,
                                              y_star, r.start_day))
        p_b, _ = fit_degradation(boot, spec, max_iter=max_iter)
        draws[b] = np.concatenate([[p_b.beta0], p_b.coefs])

    from scipy.stats import norm
    intervals = np.empty((len(beta_hat), 2))
    for j in range(len(beta_hat)):
        prop = np.mean(draws[:, j] < beta_hat[j])
        prop = min(max(prop, 1.0 / (B + 1)), B / (B + 1.0))
        z0 = norm.ppf(prop)
        lo_p = norm.cdf(2 * z0 + norm.ppf(alpha / 2))
        hi_p = norm.cdf(2 * z0 + norm.ppf(1 - alpha / 2))
        intervals[j] = np.quantile(draws[:, j], [lo_p, hi_p])
    return DegradationBootstrap(draws, intervals, infl_w, infl_e, warning)


# ---------------------------------------------------------------------------
# failure prediction


def failure_time_of_path(t_grid, path, spec: FailureSpec):
    """First crossing of the threshold, linearly interpolated within the
    bracketing grid interval; None when censored within the horizon."""
    t_grid = np.asarray(t_grid, dtype=float)
    path = np.asarray(path, dtype=float)
    thr = spec.threshold
    below = path <= thr if path[0] > thr else path >= thr
    if not np.any(below):
        return None
    k = int(np.argmax(below))
    if k == 0:
        return float(t_grid[0])
    t0, t1 = t_grid[k - 1], t_grid[k]
    y0, y1 = path[k - 1], path[k]
    if y1 == y0:
        return float(t1)
    frac = (thr - y0) / (y1 - y0)
    return float(t0 + frac * (t1 - t0))


def simulate_damage_path(params: PathParams, spec: SplineEffectSpec,
                         covariates: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Daily path D(t) + w0 + w1 t over t = 1..len(covariates)."""
    K = covariates.shape[0]
    t = np.arange(1, K + 1, dtype=float)
    total = np.full(K, params.beta0)
    offset = 0
    for l, ch in enumerate(spec.channels):
        B = ch.basis_matrix(covariates[:, l])
        a = ch.n_basis
        rate = B @ params.coefs[offset:offset + a]
        total += ch.sign * np.cumsum(rate)  # daily gaps of 1
        offset += a
    return total + w[0] + w[1] * t


def failure_cdf_mc(params: PathParams, spec: SplineEffectSpec,
                   cov_params: CovariateProcessParams, fspec: FailureSpec,
                   start_window, M: int, rng: np.random.Generator,
                   coef_draws=None, n_boot_mc: int = None):
    """Monte-Carlo failure-time cdf for units with random calendar start.

    Returns (t_grid, F_hat, (lo, hi) or None). Each replicate draws a
    covariate path, a start day uniform on start_window, and random
    effects; the crossing time of the threshold is recorded.
    """
    warning = M < 50
    horizon = int(fspec.horizon)
    t_grid = np.arange(1, horizon + 1, dtype=float)

    def one_run(p: PathParams, m: int, rng_run):
        times = np.empty(m)
        sw = p.re.sigma_w()
        L = np.linalg.cholesky(sw + 1e-14 * np.eye(2))
        for i in range(m):
            s0 = rng_run.integers(int(start_window[0]), int(start_window[1]) + 1)
            cov = simulate_covariate_process(cov_params, horizon, rng_run,
                                             start_day=float(s0))
            w = L @ rng_run.standard_normal(2)
            path = simulate_damage_path(p, spec, cov, w)
            td = failure_time_of_path(t_grid, path, fspec)
            times[i] = math.inf if td is None else td
        return np.array([np.mean(times <= t) for t in t_grid])

    F_hat = one_run(params, M, rng)
    band = None
    if coef_draws is not None and len(coef_draws):
        m_b = n_boot_mc or max(M // 4, 25)
        Fs = []
        for cd in coef_draws:
            p_b = PathParams(float(cd[0]), np.asarray(cd[1:]), params.re)
            Fs.append(one_run(p_b, m_b, rng))
        Fs = np.array(Fs)
        band = (np.quantile(Fs, 0.025, axis=0), np.quantile(Fs, 0.975, axis=0))
    return t_grid, F_hat, band, warning
