"""Log-location-scale distribution primitives.

The two standard kinds used throughout the toolkit are the smallest
extreme value (SEV) distribution, whose exponentiated form is the
Weibull, and the standard normal, whose exponentiated form is the
lognormal.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special


class StdKind(enum.Enum):
    SEV = "sev"
    NORMAL = "normal"


@dataclass(frozen=True)
class LocScaleParams:
    """Location/scale on the log-time scale; sigma must be positive."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be > 0, got {self.sigma}")


def _check_finite(z):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("z must be finite")
    return z


def std_cdf(z, kind: StdKind):
    """Standard cdf: Phi_sev(z) = 1 - exp(-exp(z)) or the normal Phi."""
    z = _check_finite(z)
    if kind is StdKind.SEV:
        out = -np.expm1(-np.exp(z))
    else:
        out = special.ndtr(z)
    return out if out.ndim else float(out)


def std_pdf(z, kind: StdKind):
    """Standard pdf: phi_sev(z) = exp(z - exp(z)) or the normal phi."""
    z = _check_finite(z)
    if kind is StdKind.SEV:
        out = np.exp(z - np.exp(z))
    else:
        out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return out if out.ndim else float(out)


def std_logpdf(z, kind: StdKind):
    z = _check_finite(z)
    if kind is StdKind.SEV:
        out = z - np.exp(z)
    else:
        out = -0.5 * z * z - 0.5 * math.log(2.0 * math.pi)
    return out if out.ndim else float(out)


def std_sf(z, kind: StdKind):
    """Survivor function 1 - cdf, computed without cancellation."""
    z = _check_finite(z)
    if kind is StdKind.SEV:
        out = np.exp(-np.exp(z))
    else:
        out = special.ndtr(-z)
    return out if out.ndim else float(out)


def std_quantile(p, kind: StdKind):
    """Inverse of std_cdf; p must lie strictly inside (0, 1)."""
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0) & (p < 1)):
        raise ValueError("p must be in (0, 1)")
    if kind is StdKind.SEV:
        out = np.log(-np.log1p(-p))
    else:
        out = special.ndtri(p)
    return out if out.ndim else float(out)


def std_hazard(z, kind: StdKind):
    """Hazard pdf/sf of the standard distribution."""
    z = _check_finite(z)
    if kind is StdKind.SEV:
        out = np.exp(z)
    else:
        out = np.exp(std_logpdf(z, kind) - np.log(std_sf(z, kind)))
    return out if out.ndim else float(out)


def sample_log_loc_scale(params: LocScaleParams, kind: StdKind,
                         rng: np.random.Generator, size=None):
    """Draw exp(mu + sigma * Z) with Z standard of the given kind.

    Deterministic for a given generator state; the caller owns the stream.
    """
    u = rng.uniform(size=size)
    z = std_quantile(u, kind)
    return np.exp(params.mu + params.sigma * z)
