import math

import numpy as np
import pytest
from scipy import optimize

from relikit.distcore import (LocScaleParams, StdKind, sample_log_loc_scale,
                              std_cdf, std_pdf, std_quantile, std_sf)

KINDS = [StdKind.SEV, StdKind.NORMAL]


def test_cdf_known_values():
    assert std_cdf(0.0, StdKind.SEV) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert std_cdf(0.0, StdKind.NORMAL) == pytest.approx(0.5, abs=1e-12)
    assert std_cdf(math.log(math.log(2)), StdKind.SEV) == pytest.approx(0.5, abs=1e-12)


def test_pdf_known_values():
    assert std_pdf(0.0, StdKind.SEV) == pytest.approx(math.exp(-1), abs=1e-12)
    assert std_pdf(0.0, StdKind.NORMAL) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_pdf_is_cdf_derivative(kind):
    h = 1e-6
    num = (std_cdf(0.7 + h, kind) - std_cdf(0.7 - h, kind)) / (2 * h)
    assert num == pytest.approx(std_pdf(0.7, kind), abs=1e-6)


def test_quantile_known_values():
    assert std_quantile(1 - math.exp(-1), StdKind.SEV) == pytest.approx(0.0, abs=1e-12)
    assert std_quantile(0.5, StdKind.NORMAL) == pytest.approx(0.0, abs=1e-12)
    # frozen from a brentq inversion of std_cdf
    oracle = optimize.brentq(lambda z: std_cdf(z, StdKind.NORMAL) - 0.975, -10, 10,
                             xtol=1e-13)
    assert oracle == pytest.approx(1.959964, abs=1e-6)
    assert std_quantile(0.975, StdKind.NORMAL) == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("kind", KINDS)
def test_cdf_quantile_roundtrip(kind):
    for p in np.linspace(0.001, 0.999, 101):
        assert abs(std_cdf(std_quantile(p, kind), kind) - p) < 1e-12


@pytest.mark.parametrize("kind", KINDS)
def test_cdf_monotone_pdf_nonnegative(kind):
    z = np.linspace(-8, 4, 500)
    cdf = std_cdf(z, kind)
    assert np.all(np.diff(cdf) >= 0)
    assert np.all(std_pdf(z, kind) >= 0)
    assert cdf[0] < 1e-3 and cdf[-1] > 1 - 1e-6 or kind is StdKind.NORMAL


@pytest.mark.parametrize("kind", KINDS)
def test_sf_complements_cdf(kind):
    z = np.linspace(-5, 3, 50)
    assert np.allclose(std_sf(z, kind) + std_cdf(z, kind), 1.0, atol=1e-12)


def test_domain_errors():
    with pytest.raises(ValueError):
        std_cdf(float("nan"), StdKind.SEV)
    with pytest.raises(ValueError):
        std_pdf(float("inf"), StdKind.NORMAL)
    with pytest.raises(ValueError):
        std_quantile(0.0, StdKind.SEV)
    with pytest.raises(ValueError):
        std_quantile(1.5, StdKind.NORMAL)
    with pytest.raises(ValueError):
        LocScaleParams(0.0, -1.0)


def test_sampling_determinism_and_sigma_zero_limit():
    params = LocScaleParams(1.3, 1e-12)
    d = sample_log_loc_scale(params, StdKind.SEV, np.random.default_rng(5))
    assert d == pytest.approx(math.exp(1.3), rel=1e-6)
    p2 = LocScaleParams(0.4, 0.8)
    a = sample_log_loc_scale(p2, StdKind.NORMAL, np.random.default_rng(9), size=10)
    b = sample_log_loc_scale(p2, StdKind.NORMAL, np.random.default_rng(9), size=10)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("kind", KINDS)
def test_sampling_matches_analytic_cdf(kind):
    params = LocScaleParams(0.7, 0.5)
    draws = sample_log_loc_scale(params, kind, np.random.default_rng(42),
                                 size=100_000)
    draws = np.sort(draws)
    z = (np.log(draws) - params.mu) / params.sigma
    analytic = std_cdf(z, kind)
    emp = np.arange(1, len(draws) + 1) / len(draws)
    ks = np.max(np.abs(analytic - emp))
    assert ks < 0.01
