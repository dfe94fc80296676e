"""Sequential Bayesian design engine for accelerated fatigue tests of
composite materials.

A log-location-scale lifetime (lognormal or Weibull) with a nonlinear
stress-life location
    mu(x) = (1/B) log{ (B/A) h^B (s_u/x - 1)(s_u/x)^(g-1) [1-psi(R)]^(-g) + 1 }
drives a design loop: posterior MCMC over (A, B, nu), a weighted
asymptotic-variance objective for the log-quantile at the use profile,
and a next-stress proposal minimizing the posterior-averaged objective
over a candidate grid. A local c-optimal comparator allocates the same
budget at fixed planning values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln

from .distcore import StdKind, std_cdf, std_hazard, std_quantile

__all__ = [
    "MaterialTestConfig", "AltParams", "AltTestDatum", "UseProfile",
    "AltPriors", "AltCampaignState", "mu_model", "mu_partials",
    "log_quantile", "alt_loglik", "fit_alt_ml", "fim", "weighted_avar",
    "posterior_sample", "sbd_objective", "propose_next", "record_result",
    "local_c_optimal", "run_campaign_sim",
]


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class MaterialTestConfig:
    sigma_ult: float
    R: float = 0.1
    freq: float = 2.0
    alpha_angle: float = 0.0
    censor_cycles: float = 2e6
    q_bounds: tuple = (0.35, 0.75)
    grid: tuple = tuple(np.round(np.arange(0.35, 0.7501, 0.05), 4))

    def __post_init__(self):
        if self.sigma_ult <= 0 or self.censor_cycles <= 0:
            raise ValueError("sigma_ult and censor_cycles must be positive")
        qL, qU = self.q_bounds
        if not (0.0 < qL < qU < 1.0):
            raise ValueError("q bounds must satisfy 0 < q_L < q_U < 1")
        if any(q < qL - 1e-12 or q > qU + 1e-12 for q in self.grid):
            raise ValueError("candidate grid must lie within q bounds")

    def psi(self) -> float:
        return 1.0 / self.R if self.R >= 1.0 else self.R

    def gamma_alpha(self) -> float:
        return 1.6 - self.psi() * abs(math.sin(self.alpha_angle))


@dataclass(frozen=True)
class AltParams:
    A: float
    B: float
    nu: float

    def __post_init__(self):
        if not (self.A > 0):
            raise ValueError("A must be > 0")
        if self.B == 0:
            raise ValueError("B must be nonzero")
        if not (self.nu > 0):
            raise ValueError("nu must be > 0")


@dataclass(frozen=True)
class AltTestDatum:
    """One test unit; ``censored`` is 1 for a right-censored unit and 0
    for an observed failure."""

    q: float
    cycles: float
    censored: int

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError("q must lie in (0, 1)")
        if self.cycles <= 0:
            raise ValueError("cycles must be positive")
        if self.censored not in (0, 1):
            raise ValueError("censored flag must be 0 or 1")


@dataclass(frozen=True)
class UseProfile:
    levels: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.levels) != len(w) or len(w) == 0:
            raise ValueError("levels and weights must match and be nonempty")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be positive and sum to one")


# default use profile: a single moderate use stress below the test range
DEFAULT_PROFILE = UseProfile((0.30,), (1.0,))
DEFAULT_P = 0.05


@dataclass(frozen=True)
class AltPriors:
    """Normal priors on A and B; inverse-gamma on nu^2."""

    mu_A: float = 0.08
    var_A: float = 0.0008
    mu_B: float = 1.0
    var_B: float = 0.0833
    kappa_ig: float = 4.5
    gamma_ig: float = 3.0

    def __post_init__(self):
        if min(self.var_A, self.var_B, self.kappa_ig, self.gamma_ig) <= 0:
            raise ValueError("prior variances and IG parameters must be > 0")

    def log_density(self, params: AltParams) -> float:
        lp = -0.5 * (params.A - self.mu_A) ** 2 / self.var_A
        lp += -0.5 * (params.B - self.mu_B) ** 2 / self.var_B
        v2 = params.nu ** 2
        lp += (self.kappa_ig * math.log(self.gamma_ig)
               - gammaln(self.kappa_ig)
               - (self.kappa_ig + 1.0) * math.log(v2) - self.gamma_ig / v2)
        return lp


# ---------------------------------------------------------------------------
# stress-life model


def _bracket(q: float, A: float, B: float, config: MaterialTestConfig) -> float:
    """The K term inside mu's logarithm; 0 at q >= 1 by continuity."""
    if q <= 0:
        raise ValueError("q must be positive")
    if q >= 1.0:
        return 0.0
    g = config.gamma_alpha()
    inv = 1.0 / q                       # sigma_ult / x
    return ((B / A) * config.freq ** B * (inv - 1.0) * inv ** (g - 1.0)
            * (1.0 - config.psi()) ** (-g))


def mu_model(q: float, A: float, B: float, config: MaterialTestConfig) -> float:
    """Location of log cycles-to-failure at standardized stress q."""
    K = _bracket(q, A, B, config)
    return math.log1p(K) / B


def mu_partials(q: float, A: float, B: float,
                config: MaterialTestConfig) -> tuple:
    """Analytic (d mu/dA, d mu/dB)."""
    K = _bracket(q, A, B, config)
    dA = -K / (A * B * (K + 1.0))
    dB = (-math.log1p(K) / B ** 2
          + K * (1.0 / B + math.log(config.freq)) / (B * (K + 1.0)))
    return dA, dB


def log_quantile(p: float, u: float, params: AltParams,
                 config: MaterialTestConfig,
                 kind: StdKind = StdKind.NORMAL) -> float:
    """Log of the p-th lifetime quantile at use stress u."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must lie in (0, 1)")
    return (mu_model(u, params.A, params.B, config)
            + std_quantile(p, kind) * params.nu)


def alt_loglik(params: AltParams, data, config: MaterialTestConfig,
               kind: StdKind = StdKind.NORMAL) -> float:
    """Censored log-likelihood of the fatigue data."""
    data = list(data)
    if not data:
        raise ValueError("data must be nonempty")
    from .distcore import std_logpdf, std_sf
    q = np.array([d.q for d in data])
    t = np.array([d.cycles for d in data])
    cen = np.array([bool(d.censored) for d in data])
    g = config.gamma_alpha()
    inv = 1.0 / q
    K = ((params.B / params.A) * config.freq ** params.B * (inv - 1.0)
         * inv ** (g - 1.0) * (1.0 - config.psi()) ** (-g))
    mu = np.log1p(K) / params.B
    z = (np.log(t) - mu) / params.nu
    total = 0.0
    if np.any(cen):
        s = std_sf(z[cen], kind)
        total += float(np.sum(np.where(s > 0, np.log(np.maximum(s, 1e-320)),
                                       -745.0)))
    if np.any(~cen):
        total += float(np.sum(std_logpdf(z[~cen], kind) - np.log(t[~cen])
                              - math.log(params.nu)))
    return total


def fit_alt_ml(data, config: MaterialTestConfig,
               kind: StdKind = StdKind.NORMAL,
               x0: AltParams = None) -> AltParams:
    """Maximum-likelihood fit of (A, B, nu) on the log-parameter scale."""
    from scipy import optimize
    data = list(data)
    if not data:
        raise ValueError("data must be nonempty")
    start = x0 or AltParams(0.05, 0.5, 0.5)
    v0 = np.log([start.A, start.B, start.nu])

    def neg(v):
        if np.any(np.abs(v) > 25):
            return 1e12
        try:
            ll = alt_loglik(AltParams(*np.exp(v)), data, config, kind)
        except (ValueError, OverflowError):
            return 1e12
        return -ll if np.isfinite(ll) else 1e12

    best = None
    for shift in (0.0, 1.0, -1.0):
        res = optimize.minimize(neg, v0 + shift, method="Nelder-Mead",
                                options={"maxiter": 4000, "fatol": 1e-12,
                                         "xatol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    return AltParams(*np.exp(best.x))


# ---------------------------------------------------------------------------
# Fisher information and asymptotic variance

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


def _info_mu_nu(zeta: float, nu: float, kind: StdKind) -> np.ndarray:
    """Per-unit expected information for (mu, nu) under Type-I censoring
    at standardized log time ``zeta``, by Gauss-Legendre quadrature of
    the score outer product over the failure region."""
    from .distcore import std_pdf, std_sf
    lo = -14.0
    hi = min(float(zeta), 14.0)   # integrand is numerically zero beyond
    I = np.zeros((2, 2))
    if hi > lo:
        z = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
        wq = 0.5 * (hi - lo) * _GL_WEIGHTS
        if kind == StdKind.NORMAL:
            dlog = -z                      # d log pdf / dz
        else:
            dlog = 1.0 - np.exp(z)
        s_mu = -dlog / nu
        s_nu = -z * dlog / nu - 1.0 / nu
        f = std_pdf(z, kind)
        I[0, 0] = np.sum(wq * s_mu * s_mu * f)
        I[0, 1] = I[1, 0] = np.sum(wq * s_mu * s_nu * f)
        I[1, 1] = np.sum(wq * s_nu * s_nu * f)
    S = float(std_sf(zeta, kind))
    if S > 0:
        h = float(std_hazard(zeta, kind))
        sc = np.array([h / nu, zeta * h / nu])
        I += S * np.outer(sc, sc)
    return I


def fim(params: AltParams, design, config: MaterialTestConfig,
        kind: StdKind = StdKind.NORMAL) -> np.ndarray:
    """Expected information for (A, B, nu) of a design (list of q levels),
    additive over design points."""
    design = np.atleast_1d(np.asarray(design, dtype=float))
    if len(design) == 0:
        raise ValueError("design must be nonempty")
    total = np.zeros((3, 3))
    log_tc = math.log(config.censor_cycles)
    for q in np.unique(design):
        n_q = int(np.sum(design == q))
        mu = mu_model(q, params.A, params.B, config)
        zeta = (log_tc - mu) / params.nu
        I2 = _info_mu_nu(zeta, params.nu, kind)
        dA, dB = mu_partials(q, params.A, params.B, config)
        G = np.array([[dA, dB, 0.0], [0.0, 0.0, 1.0]])
        total += n_q * (G.T @ I2 @ G)
    return total


def _safe_inverse(I: np.ndarray):
    """Inverse with a ridge guard for near-singular information."""
    flagged = False
    cond = np.linalg.cond(I)
    if not np.isfinite(cond) or cond > 1e12:
        I = I + 1e-10 * np.trace(I) * np.eye(3)
        flagged = True
    try:
        return np.linalg.inv(I), flagged
    except np.linalg.LinAlgError:
        return None, True


def weighted_avar(params: AltParams, design, profile: UseProfile,
                  p: float, config: MaterialTestConfig,
                  kind: StdKind = StdKind.NORMAL) -> float:
    """Use-profile-weighted asymptotic variance of the estimated
    log p-quantile; +inf when the information is singular."""
    I = fim(params, design, config, kind)
    Sigma, flagged = _safe_inverse(I)
    if Sigma is None:
        return math.inf
    zp = std_quantile(p, kind)
    total = 0.0
    for u, w in zip(profile.levels, profile.weights):
        dA, dB = mu_partials(u, params.A, params.B, config)
        c = np.array([dA, dB, zp])
        total += w * float(c @ Sigma @ c)
    return total


# ---------------------------------------------------------------------------
# posterior sampling


def posterior_sample(priors: AltPriors, data, config: MaterialTestConfig,
                     n_draws: int, rng: np.random.Generator,
                     kind: StdKind = StdKind.NORMAL,
                     burn_in: int = 2000) -> np.ndarray:
    """Random-walk Metropolis draws of (A, B, nu); target is
    prior x likelihood (prior alone when no data)."""
    data = list(data)

    def log_target(v):
        A, B, lnu = v
        if A <= 0 or B <= 0:
            return -math.inf
        params = AltParams(A, B, math.exp(lnu))
        lp = priors.log_density(params) + 2.0 * lnu   # Jacobian d nu^2/d lnu
        if data:
            try:
                lp += alt_loglik(params, data, config, kind)
            except (ValueError, OverflowError):
                return -math.inf
        return lp

    x = np.array([priors.mu_A, priors.mu_B,
                  0.5 * math.log(priors.gamma_ig / (priors.kappa_ig + 1.0))])
    cur = log_target(x)
    step = np.array([math.sqrt(priors.var_A), math.sqrt(priors.var_B), 0.3])
    draws = np.empty((n_draws, 3))
    acc = 0
    n_tot = burn_in + n_draws
    for it in range(n_tot):
        prop = x + step * rng.standard_normal(3)
        lt = log_target(prop)
        if math.log(rng.uniform()) < lt - cur:
            x, cur = prop, lt
            acc += 1
        if it < burn_in and (it + 1) % 100 == 0:
            rate = acc / (it + 1)
            step *= math.exp(0.5 * (rate - 0.3))
        if it >= burn_in:
            draws[it - burn_in] = [x[0], x[1], math.exp(x[2])]
    if acc == 0:
        raise RuntimeError("Metropolis sampler accepted no proposals")
    return draws


# ---------------------------------------------------------------------------
# sequential design


@dataclass(frozen=True)
class AltCampaignState:
    config: MaterialTestConfig
    priors: AltPriors
    data: tuple = ()
    proposal_log: tuple = ()            # (round, q_star, objective)
    version: int = 0
    posterior: np.ndarray = None
    posterior_version: int = -1

    @property
    def fresh(self) -> bool:
        return (self.posterior is not None
                and self.posterior_version == self.version)


def sbd_objective(q_new: float, draws: np.ndarray, design,
                  profile: UseProfile, p: float,
                  config: MaterialTestConfig,
                  kind: StdKind = StdKind.NORMAL) -> float:
    """Posterior-averaged weighted avar of the design augmented by q_new."""
    draws = np.atleast_2d(draws)
    if len(draws) == 0:
        raise ValueError("draws must be nonempty")
    design = list(np.atleast_1d(design)) + [q_new]
    zp = std_quantile(p, kind)
    total = 0.0
    for A, B, nu in draws:
        params = AltParams(A, B, nu)
        I = fim(params, design, config, kind)
        Sigma, _ = _safe_inverse(I)
        if Sigma is None:
            return math.inf
        for u, w in zip(profile.levels, profile.weights):
            dA, dB = mu_partials(u, A, B, config)
            c = np.array([dA, dB, zp])
            total += w * float(c @ Sigma @ c)
    return total / len(draws)


def _ensure_posterior(state: AltCampaignState, rng: np.random.Generator,
                      n_draws: int, kind: StdKind) -> AltCampaignState:
    if state.fresh:
        return state
    draws = posterior_sample(state.priors, state.data, state.config,
                             n_draws, rng, kind)
    return replace(state, posterior=draws, posterior_version=state.version)


def propose_next(state: AltCampaignState, profile: UseProfile = DEFAULT_PROFILE,
                 p: float = DEFAULT_P, rng: np.random.Generator = None,
                 n_draws: int = 500, n_eval: int = 100,
                 kind: StdKind = StdKind.NORMAL):
    """Next stress level minimizing the posterior-averaged objective over
    the candidate grid; ties break toward the lowest stress.

    Returns (new_state, q_star, [(q, objective)]).
    """
    grid = sorted(state.config.grid)
    if not grid:
        raise ValueError("candidate grid is empty")
    rng = rng or np.random.default_rng()
    state = _ensure_posterior(state, rng, n_draws, kind)
    sub = state.posterior[:: max(len(state.posterior) // n_eval, 1)]
    design = [d.q for d in state.data]
    trace = [(q, sbd_objective(q, sub, design, profile, p, state.config,
                               kind)) for q in grid]
    vals = np.array([v for _, v in trace])
    q_star = grid[int(np.argmin(vals))]   # first minimum = lowest q on ties
    rnd = len(state.proposal_log) + 1
    new_log = state.proposal_log + ((rnd, q_star, float(vals.min())),)
    return replace(state, proposal_log=new_log), q_star, trace


def record_result(state: AltCampaignState, q: float, cycles: float,
                  censored: int) -> AltCampaignState:
    """Append one outcome; bumps the data version and invalidates the
    posterior cache. Raises on malformed data, leaving state unchanged."""
    datum = AltTestDatum(q, cycles, censored)
    proposed = {entry[1] for entry in state.proposal_log}
    if state.proposal_log and not any(abs(q - pq) < 1e-9 for pq in proposed):
        import warnings
        warnings.warn(f"recorded stress {q} was never proposed")
    return replace(state, data=state.data + (datum,),
                   version=state.version + 1)


def local_c_optimal(planning: AltParams, grid, n_units: int,
                    profile: UseProfile = DEFAULT_PROFILE, p: float = DEFAULT_P,
                    config: MaterialTestConfig = None,
                    kind: StdKind = StdKind.NORMAL,
                    base_design=()) -> dict:
    """Greedy sequential allocation at fixed planning values: repeatedly
    add the candidate minimizing the weighted avar of the augmented
    design. Returns {q: count}."""
    if n_units < 1:
        raise ValueError("n_units must be >= 1")
    grid = sorted(grid)
    design = list(base_design)
    alloc = {q: 0 for q in grid}
    for _ in range(n_units):
        best_q, best_v = None, math.inf
        for q in grid:
            v = weighted_avar(planning, design + [q], profile, p, config,
                              kind)
            if v < best_v - 1e-15:
                best_q, best_v = q, v
        design.append(best_q)
        alloc[best_q] += 1
    return {q: c for q, c in alloc.items() if c > 0}


def exhaustive_c_optimal(planning: AltParams, grid, n_units: int,
                         profile: UseProfile = DEFAULT_PROFILE,
                         p: float = DEFAULT_P,
                         config: MaterialTestConfig = None,
                         kind: StdKind = StdKind.NORMAL,
                         base_design=()) -> dict:
    """Exact enumeration over allocations (for small budgets/grids); used
    to audit the greedy allocation."""
    from itertools import combinations_with_replacement
    grid = sorted(grid)
    best, best_v = None, math.inf
    for combo in combinations_with_replacement(grid, n_units):
        v = weighted_avar(planning, list(base_design) + list(combo),
                          profile, p, config, kind)
        if v < best_v - 1e-15:
            best, best_v = combo, v
    alloc = {}
    for q in best:
        alloc[q] = alloc.get(q, 0) + 1
    return alloc


# ---------------------------------------------------------------------------
# campaign simulation


@dataclass
class CampaignTrace:
    proposals: list                 # q* per round
    data: list                      # AltTestDatum accrued (new points only)
    avar_path: list                 # objective value at the chosen point
    state: AltCampaignState = None


def run_campaign_sim(truth: AltParams, priors: AltPriors,
                     config: MaterialTestConfig, n_new: int,
                     rng: np.random.Generator,
                     historical=(), profile: UseProfile = DEFAULT_PROFILE,
                     p: float = DEFAULT_P, kind: StdKind = StdKind.NORMAL,
                     n_draws: int = 500, n_eval: int = 100) -> CampaignTrace:
    """Full sequential loop: propose, generate an outcome from the truth
    (censored at the configured limit), record, repeat."""
    state = AltCampaignState(config, priors, data=tuple(historical))
    trace = CampaignTrace([], [], [])
    for _ in range(n_new):
        state, q_star, _ = propose_next(state, profile, p, rng,
                                        n_draws=n_draws, n_eval=n_eval,
                                        kind=kind)
        mu = mu_model(q_star, truth.A, truth.B, config)
        z = rng.standard_normal() if kind == StdKind.NORMAL else \
            math.log(rng.exponential())
        t = math.exp(mu + truth.nu * z)
        censored = int(t >= config.censor_cycles)
        t = min(t, config.censor_cycles)
        state = record_result(state, q_star, t, censored)
        trace.proposals.append(q_star)
        trace.data.append(state.data[-1])
        trace.avar_path.append(state.proposal_log[-1][2])
    trace.state = state
    return trace
