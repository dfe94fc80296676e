"""Exact Poisson-binomial distribution of a fleet failure count.

Two independent routes are provided: a dynamic-programming convolution of
the probability generating function and a DFT of the characteristic
function. They must agree; the convolution is the default.
"""

from __future__ import annotations

import numpy as np


def _check_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1:
        raise ValueError("probabilities must be a 1-D sequence")
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def pmf_convolution(probs) -> np.ndarray:
    """PMF over counts 0..n by sequential convolution."""
    p = _check_probs(probs)
    pmf = np.array([1.0])
    for pi in p:
        nxt = np.zeros(len(pmf) + 1)
        nxt[:-1] = pmf * (1.0 - pi)
        nxt[1:] += pmf * pi
        pmf = nxt
    return pmf


def pmf_dft(probs) -> np.ndarray:
    """PMF via the discrete Fourier transform of the characteristic function."""
    p = _check_probs(probs)
    n = len(p)
    omega = 2.0 * np.pi / (n + 1)
    ks = np.arange(n + 1)
    # characteristic function at the (n+1) Fourier frequencies
    z = np.exp(1j * omega * ks)[:, None]  # (n+1, 1)
    chi = np.prod(1.0 - p[None, :] + p[None, :] * z, axis=1)
    pmf = np.fft.fft(chi).real / (n + 1)
    return np.clip(pmf, 0.0, 1.0)


def cdf(probs, n_k=None):
    """Exact Poisson-binomial cdf.

    Returns the full cdf vector over counts 0..n when ``n_k`` is None,
    otherwise the scalar F_N(n_k).
    """
    c = np.minimum(np.cumsum(pmf_convolution(probs)), 1.0)
    if n_k is None:
        return c
    n_k = int(n_k)
    if n_k < 0:
        return 0.0
    return float(c[min(n_k, len(c) - 1)])


def quantile(probs, q: float) -> int:
    """Smallest count n with F_N(n) >= q."""
    c = cdf(probs)
    return int(np.searchsorted(c, q - 1e-15))
