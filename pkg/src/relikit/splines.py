"""Shape-restricted spline bases.

I-splines are integrals of unit-mass M-splines: each basis entry runs
monotonically from 0 at the left knot boundary to 1 at the right, so a
nonnegative coefficient vector yields a monotone effect. C-spline entries
are the negated integrals of the I-splines: concave, nonincreasing
functions starting at 0, so nonnegative coefficients yield a concave
decreasing effect.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline


class BasisKind(enum.Enum):
    ISPLINE = "ispline"
    CSPLINE = "cspline"


@dataclass(frozen=True)
class ChannelSpec:
    """Basis configuration for one covariate channel.

    ``sign`` multiplies the channel's damage contribution: -1 gives a
    decreasing cumulative-damage contribution from a monotone basis.
    """

    kind: BasisKind
    knots: tuple
    degree: int = 3
    sign: float = 1.0

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if len(k) < 2 or np.any(np.diff(k) < 0):
            raise ValueError("knots must be a nondecreasing vector of length >= 2")
        if k[0] == k[-1]:
            raise ValueError("knot span is degenerate")
        if self.degree < 1:
            raise ValueError("degree must be >= 1")
        object.__setattr__(self, "knots", tuple(float(v) for v in k))

    @property
    def n_basis(self) -> int:
        return len(self.knots) - 2 + self.degree + 1

    def basis_matrix(self, x) -> np.ndarray:
        return spline_basis(x, self)


@dataclass(frozen=True)
class SplineEffectSpec:
    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def n_coef(self) -> int:
        return sum(c.n_basis for c in self.channels)


def _augmented_knots(ch: ChannelSpec) -> np.ndarray:
    k = np.asarray(ch.knots)
    return np.concatenate([[k[0]] * ch.degree, k, [k[-1]] * ch.degree])


def mspline_basis(x, ch: ChannelSpec) -> np.ndarray:
    """M-spline design matrix: B-splines normalized to unit integral."""
    t = _augmented_knots(ch)
    x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), ch.knots[0],
                ch.knots[-1])
    d = ch.degree
    n = ch.n_basis
    out = np.empty((len(x), n))
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        spl = BSpline(t, c, d, extrapolate=False)
        support = t[j + d + 1] - t[j]
        vals = spl(x)
        out[:, j] = np.nan_to_num(vals) * (d + 1) / support
    return out


def ispline_basis(x, ch: ChannelSpec) -> np.ndarray:
    """I-spline design matrix: running integrals of the M-spline basis."""
    t = _augmented_knots(ch)
    x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), ch.knots[0],
                ch.knots[-1])
    d = ch.degree
    n = ch.n_basis
    out = np.empty((len(x), n))
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        anti = BSpline(t, c, d, extrapolate=False).antiderivative()
        support = t[j + d + 1] - t[j]
        total = (anti(t[-1]) - anti(t[0]))
        vals = (anti(x) - anti(t[0])) / total if total > 0 else anti(x) * 0.0
        out[:, j] = np.clip(np.nan_to_num(vals), 0.0, 1.0)
    return out


def cspline_basis(x, ch: ChannelSpec) -> np.ndarray:
    """C-spline design matrix: negated integrals of the I-splines (concave)."""
    t = _augmented_knots(ch)
    x = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), ch.knots[0],
                ch.knots[-1])
    d = ch.degree
    n = ch.n_basis
    out = np.empty((len(x), n))
    for j in range(n):
        c = np.zeros(n)
        c[j] = 1.0
        anti = BSpline(t, c, d, extrapolate=False).antiderivative()
        total = anti(t[-1]) - anti(t[0])
        anti2 = BSpline(t, c, d, extrapolate=False).antiderivative(2)
        vals = (anti2(x) - anti2(t[0])) / total if total > 0 else anti2(x) * 0.0
        out[:, j] = -np.nan_to_num(vals)
    return out


def spline_basis(x, ch: ChannelSpec) -> np.ndarray:
    """Design matrix of the channel's shape-restricted basis at x."""
    if ch.kind is BasisKind.ISPLINE:
        return ispline_basis(x, ch)
    return cspline_basis(x, ch)


def default_channel_spec(x_values, kind: BasisKind, n_interior: int = 3,
                         degree: int = 3, sign: float = 1.0) -> ChannelSpec:
    """Knots at empirical quantiles of the observed covariate values."""
    x = np.asarray(x_values, dtype=float)
    qs = np.linspace(0, 1, n_interior + 2)
    knots = np.quantile(x, qs)
    # collapse duplicate quantiles from ties
    knots = np.unique(knots)
    if len(knots) < 2:
        knots = np.array([knots[0], knots[0] + 1.0])
    return ChannelSpec(kind, tuple(knots), degree, sign)
