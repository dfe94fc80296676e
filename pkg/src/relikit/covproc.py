"""Seasonal + VAR(2) model of the 3-channel daily covariate process
(UV dosage, temperature, relative humidity).

Each channel has a constant trend plus a 365-day sinusoid in the mean;
channels 1-2 additionally modulate their error scale seasonally. The
standardized errors follow a lag-2 vector autoregression fitted by
multivariate least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

OMEGA = 2.0 * math.pi / 365.0
N_CHANNELS = 3
VARIANCE_SEASONAL_CHANNELS = (0, 1)  # RH (index 2) has no variance seasonality


@dataclass
class CovariateProcessParams:
    mu: np.ndarray        # (3,) channel means
    kappa: np.ndarray     # (3,) seasonal amplitudes
    eta: np.ndarray       # (3,) seasonal phases (days)
    nu: np.ndarray        # (2,) variance-seasonality amplitudes (channels 1-2)
    varsigma: np.ndarray  # (2,) variance-seasonality phases
    Q1: np.ndarray        # (3,3) VAR lag-1 coefficients
    Q2: np.ndarray        # (3,3) VAR lag-2 coefficients
    Sigma_e: np.ndarray   # (3,3) innovation covariance

    def companion(self) -> np.ndarray:
        top = np.hstack([self.Q1, self.Q2])
        bottom = np.hstack([np.eye(3), np.zeros((3, 3))])
        return np.vstack([top, bottom])

    def is_stationary(self) -> bool:
        return np.max(np.abs(np.linalg.eigvals(self.companion()))) < 1.0

    def seasonal_mean(self, j: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.mu[j] + self.kappa[j] * np.sin(OMEGA * (t - self.eta[j]))

    def error_scale(self, j: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if j in VARIANCE_SEASONAL_CHANNELS:
            return 1.0 + self.nu[j] * (1.0 + np.sin(OMEGA * (t - self.varsigma[j])))
        return np.ones_like(t)


def _fit_channel_seasonal(x: np.ndarray, t: np.ndarray, with_var_season: bool):
    """Gaussian ML for one channel ignoring autocorrelation."""
    # moment start: regress on sin/cos
    S, C = np.sin(OMEGA * t), np.cos(OMEGA * t)
    A = np.column_stack([np.ones_like(t), S, C])
    coef, *_ = np.linalg.lstsq(A, x, rcond=None)
    mu0, a, b = coef
    kappa0 = math.hypot(a, b)
    # kappa*sin(w(t-eta)) = kappa*cos(w eta) sin - kappa*sin(w eta) cos
    eta0 = math.atan2(-b, a) / OMEGA
    resid0 = x - A @ coef
    sd0 = max(np.std(resid0), 1e-6)

    def neg(v):
        if with_var_season:
            mu, kappa, eta, nu, vs, logsd = v
            if nu < 0 or nu > 5:
                return 1e12
            scale = 1.0 + nu * (1.0 + np.sin(OMEGA * (t - vs)))
        else:
            mu, kappa, eta, logsd = v
            scale = np.ones_like(t)
        sd = math.exp(logsd)
        m = mu + kappa * np.sin(OMEGA * (t - eta))
        s = scale * sd
        out = np.sum(np.log(s) + 0.5 * ((x - m) / s) ** 2)
        return out if np.isfinite(out) else 1e12

    if with_var_season:
        x0 = np.array([mu0, kappa0, eta0, 0.2, eta0, math.log(sd0)])
    else:
        x0 = np.array([mu0, kappa0, eta0, math.log(sd0)])
    res = optimize.minimize(neg, x0, method="Nelder-Mead",
                            options={"maxiter": 6000, "fatol": 1e-10,
                                     "xatol": 1e-8})
    v = res.x
    if with_var_season:
        return dict(mu=v[0], kappa=v[1], eta=v[2] % 365.0, nu=v[3],
                    varsigma=v[4] % 365.0)
    return dict(mu=v[0], kappa=v[1], eta=v[2] % 365.0)


def var_ls_fit(eps: np.ndarray, lags: int = 2):
    """Multivariate least-squares VAR fit on a (T, k) series."""
    T, k = eps.shape
    Y = eps[lags:]
    X = np.hstack([eps[lags - l - 1:T - l - 1] for l in range(lags)])
    B, *_ = np.linalg.lstsq(X, Y, rcond=None)
    resid = Y - X @ B
    Sigma = resid.T @ resid / (len(Y) - k * lags)
    Qs = [B[l * k:(l + 1) * k].T for l in range(lags)]
    return Qs, Sigma


def fit_covariate_process(series: np.ndarray, t=None) -> CovariateProcessParams:
    """Two-step fit: per-channel seasonal ML, then VAR(2) on residuals.

    ``series`` is (T, 3) daily; at least 730 days are required for the
    seasonal terms to be identifiable.
    """
    X = np.asarray(series, dtype=float)
    if X.ndim != 2 or X.shape[1] != N_CHANNELS:
        raise ValueError("series must be (T, 3)")
    T = X.shape[0]
    if T < 730:
        raise ValueError("need at least 730 days of daily data")
    t = np.arange(T, dtype=float) if t is None else np.asarray(t, dtype=float)

    mu = np.zeros(3)
    kappa = np.zeros(3)
    eta = np.zeros(3)
    nu = np.zeros(2)
    varsigma = np.zeros(2)
    eps = np.empty_like(X)
    for j in range(3):
        with_vs = j in VARIANCE_SEASONAL_CHANNELS
        fit = _fit_channel_seasonal(X[:, j], t, with_vs)
        mu[j], kappa[j], eta[j] = fit["mu"], fit["kappa"], fit["eta"]
        scale = np.ones(T)
        if with_vs:
            nu[j], varsigma[j] = fit["nu"], fit["varsigma"]
            scale = 1.0 + nu[j] * (1.0 + np.sin(OMEGA * (t - varsigma[j])))
        eps[:, j] = (X[:, j] - (mu[j] + kappa[j] * np.sin(OMEGA * (t - eta[j])))) / scale

    (Q1, Q2), Sigma_e = var_ls_fit(eps, lags=2)
    return CovariateProcessParams(mu, kappa, eta, nu, varsigma, Q1, Q2, Sigma_e)


def simulate_covariate_process(params: CovariateProcessParams, days: int,
                               rng: np.random.Generator,
                               start_day: float = 0.0,
                               burn_in: int = 100) -> np.ndarray:
    """Simulate (days, 3) daily covariates; burn-in discarded."""
    if not params.is_stationary():
        raise ValueError("VAR(2) parameters are not stationary")
    total = days + burn_in
    eps = np.zeros((total + 2, 3))
    # innovation draws; Sigma_e may be exactly zero in the deterministic limit
    w = np.linalg.eigvalsh(params.Sigma_e)
    if w[-1] > 0:
        L = np.linalg.cholesky(params.Sigma_e + 1e-12 * w[-1] * np.eye(3))
        innov = rng.standard_normal((total + 2, 3)) @ L.T
    else:
        innov = np.zeros((total + 2, 3))
    for i in range(2, total + 2):
        eps[i] = params.Q1 @ eps[i - 1] + params.Q2 @ eps[i - 2] + innov[i]
    eps = eps[2 + burn_in:]
    t = start_day + np.arange(days, dtype=float)
    out = np.empty((days, 3))
    for j in range(3):
        out[:, j] = params.seasonal_mean(j, t) + params.error_scale(j, t) * eps[:, j]
    return out


def yule_walker_autocov(params: CovariateProcessParams, max_lag: int = 2):
    """Stationary autocovariances Gamma(0..max_lag) of the VAR(2) error,
    from the companion-form Lyapunov fixed point."""
    F = params.companion()
    Q = np.zeros((6, 6))
    Q[:3, :3] = params.Sigma_e
    S = Q.copy()
    for _ in range(100_000):
        S_new = F @ S @ F.T + Q
        if np.max(np.abs(S_new - S)) < 1e-14:
            S = S_new
            break
        S = S_new
    out = [S[:3, :3], S[:3, 3:]]
    for h in range(2, max_lag + 1):
        out.append(params.Q1 @ out[h - 1] + params.Q2 @ out[h - 2])
    return out[:max_lag + 1]
