import itertools

import numpy as np
import pytest
from scipy import stats

from relikit import poibin


def enumerate_pmf(probs):
    """Brute-force oracle: sum over all 2^n outcome vectors."""
    n = len(probs)
    pmf = np.zeros(n + 1)
    for bits in itertools.product([0, 1], repeat=n):
        p = 1.0
        for b, pi in zip(bits, probs):
            p *= pi if b else (1 - pi)
        pmf[sum(bits)] += p
    return pmf


def test_half_half():
    assert poibin.cdf([0.5, 0.5], 0) == pytest.approx(0.25, abs=1e-14)
    assert poibin.cdf([0.5, 0.5], 1) == pytest.approx(0.75, abs=1e-14)
    assert poibin.cdf([0.5, 0.5], 2) == pytest.approx(1.0, abs=1e-14)


def test_enumeration_oracle_small():
    probs = [0.1, 0.2, 0.3]
    pmf = poibin.pmf_convolution(probs)
    assert pmf[0] == pytest.approx(0.9 * 0.8 * 0.7, abs=1e-14)
    assert np.allclose(pmf, enumerate_pmf(probs), atol=1e-14)


def test_enumeration_oracle_n12():
    rng = np.random.default_rng(3)
    probs = rng.uniform(0.01, 0.99, size=12)
    assert np.allclose(np.cumsum(poibin.pmf_convolution(probs)),
                       np.cumsum(enumerate_pmf(probs)), atol=1e-12)


def test_binomial_reduction():
    n, p = 20, 0.37
    c = poibin.cdf([p] * n)
    ref = stats.binom.cdf(np.arange(n + 1), n, p)
    assert np.max(np.abs(c - ref)) < 1e-12


def test_dft_and_convolution_agree():
    rng = np.random.default_rng(11)
    for n in [1, 5, 17, 50]:
        probs = rng.uniform(0, 1, size=n)
        a = poibin.pmf_convolution(probs)
        b = poibin.pmf_dft(probs)
        assert np.max(np.abs(a - b)) < 1e-10


def test_cdf_monotone_reaches_one():
    rng = np.random.default_rng(7)
    probs = rng.uniform(0, 1, size=30)
    c = poibin.cdf(probs)
    assert np.all(np.diff(c) >= -1e-15)
    assert c[-1] == pytest.approx(1.0, abs=1e-12)


def test_invalid_probs():
    with pytest.raises(ValueError):
        poibin.cdf([0.5, 1.2])
