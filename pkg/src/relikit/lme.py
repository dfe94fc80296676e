"""Marginal-likelihood machinery for random-intercept/slope Gaussian models.

Each unit i contributes y_i ~ N(X_i beta, V_i) with
V_i = Z_i Sigma_w Z_i' + sigma_eps^2 I. The bivariate random-effects
integral is evaluated in closed form as this Gaussian marginal; numeric
quadrature of the integrand is kept only as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize


@dataclass(frozen=True)
class RandomEffectParams:
    """Bivariate random-effect covariance (sd/sd/corr) plus residual sd."""

    sigma1: float
    sigma2: float
    rho: float
    sigma_eps: float

    def __post_init__(self):
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("random-effect standard deviations must be >= 0")
        if not (-1.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (-1, 1)")
        if not (self.sigma_eps > 0):
            raise ValueError("sigma_eps must be > 0")

    def sigma_w(self) -> np.ndarray:
        off = self.rho * self.sigma1 * self.sigma2
        return np.array([[self.sigma1**2, off], [off, self.sigma2**2]])


def marginal_loglik(y_list, X_list, Z_list, beta, re: RandomEffectParams) -> float:
    """Sum of per-unit Gaussian marginal log-densities."""
    sw = re.sigma_w()
    total = 0.0
    for y, X, Z in zip(y_list, X_list, Z_list):
        r = y - X @ beta
        V = Z @ sw @ Z.T + re.sigma_eps**2 * np.eye(len(y))
        sign, logdet = np.linalg.slogdet(V)
        if sign <= 0:
            return -np.inf
        total += -0.5 * (len(y) * math.log(2 * math.pi) + logdet
                         + r @ np.linalg.solve(V, r))
    return total


def _gls_beta(y_list, X_list, V_list):
    p = X_list[0].shape[1]
    if p == 0:
        return np.zeros(0)
    A = np.zeros((p, p))
    b = np.zeros(p)
    for y, X, V in zip(y_list, X_list, V_list):
        VX = np.linalg.solve(V, X)
        A += X.T @ VX
        b += VX.T @ y
    return np.linalg.solve(A, b)


def _unpack(v):
    s1, s2, se = np.exp(v[0]), np.exp(v[1]), np.exp(v[3])
    rho = math.tanh(float(np.clip(v[2], -15.0, 15.0)))
    return RandomEffectParams(s1, s2, rho, se)


def fit_lme(y_list, X_list, Z_list, n_starts: int = 5, seed: int = 0,
            x0=None):
    """ML fit of (beta, variance components) by profiling beta out via GLS.

    Returns (beta, RandomEffectParams, loglik). Optimization runs on
    (log s1, log s2, atanh rho, log s_eps) with multi-start Nelder-Mead.
    """
    y_list = [np.asarray(y, dtype=float) for y in y_list]
    X_list = [np.asarray(X, dtype=float) for X in X_list]
    Z_list = [np.asarray(Z, dtype=float) for Z in Z_list]
    y_all = np.concatenate(y_list)
    raw_sd = float(np.std(y_all))
    # variance components far above the data scale are a flat, degenerate
    # direction of the likelihood (arises with near-noiseless data); cap them
    cap = 1e3 * raw_sd + 1e-300
    scale = min(max(raw_sd, 1e-3), cap / 10.0)

    def neg(v):
        if np.any(np.abs(v) > 30):
            return 1e12
        re = _unpack(v)
        if max(re.sigma1, re.sigma2, re.sigma_eps) > cap:
            return 1e12
        sw = re.sigma_w()
        V_list = [Z @ sw @ Z.T + re.sigma_eps**2 * np.eye(len(y))
                  for y, Z in zip(y_list, Z_list)]
        try:
            beta = _gls_beta(y_list, X_list, V_list)
        except np.linalg.LinAlgError:
            return 1e12
        ll = marginal_loglik(y_list, X_list, Z_list, beta, re)
        return 1e12 if not np.isfinite(ll) else -ll

    rng = np.random.default_rng(seed)
    base = (np.asarray(x0, dtype=float) if x0 is not None else
            np.array([math.log(scale), math.log(scale), 0.0, math.log(scale)]))
    log_cap = math.log(cap / 10.0)
    base = base.copy()
    base[[0, 1, 3]] = np.minimum(base[[0, 1, 3]], log_cap)
    best = None
    for k in range(n_starts):
        start = base if k == 0 else base + rng.normal(scale=1.0, size=4)
        res = optimize.minimize(neg, start, method="Nelder-Mead",
                                options={"maxiter": 4000, "fatol": 1e-10,
                                         "xatol": 1e-8})
        if best is None or res.fun < best.fun:
            best = res
    re = _unpack(best.x)
    sw = re.sigma_w()
    V_list = [Z @ sw @ Z.T + re.sigma_eps**2 * np.eye(len(y))
              for y, Z in zip(y_list, Z_list)]
    beta = _gls_beta(y_list, X_list, V_list)
    return beta, re, -best.fun


def predict_random_effects(y_list, X_list, Z_list, beta,
                           re: RandomEffectParams) -> np.ndarray:
    """Empirical BLUPs w_hat_i = Sigma_w Z_i' V_i^{-1} (y_i - X_i beta)."""
    sw = re.sigma_w()
    out = []
    for y, X, Z in zip(y_list, X_list, Z_list):
        V = Z @ sw @ Z.T + re.sigma_eps**2 * np.eye(len(y))
        out.append(sw @ Z.T @ np.linalg.solve(V, y - X @ beta))
    return np.array(out)


def numeric_hessian(fun, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian used for observed-information covariances."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    H = np.zeros((n, n))
    steps = h * np.maximum(1.0, np.abs(x))
    for i in range(n):
        for j in range(i, n):
            ei = np.zeros(n); ei[i] = steps[i]
            ej = np.zeros(n); ej[j] = steps[j]
            fpp = fun(x + ei + ej)
            fpm = fun(x + ei - ej)
            fmp = fun(x - ei + ej)
            fmm = fun(x - ei - ej)
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4 * steps[i] * steps[j])
    return H
