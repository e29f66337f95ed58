"""Accuracy checks for the in-repo special functions.

Two oracle layers: published distribution-table quantiles (frozen below)
and scipy.special, which is a test-only dependency.
"""

import math

import pytest
from scipy import special as sp

from sara.special import (
    chi2_sf,
    f_sf,
    normal_cdf,
    normal_quantile,
    normal_sf,
    reg_incomplete_beta,
    reg_lower_gamma,
    reg_upper_gamma,
)

# Published chi-square critical values: sf(quantile, df) == alpha.
CHI2_TABLE = [
    # (df, quantile, alpha)
    (1, 3.841458820694124, 0.05),
    (2, 5.991464547107979, 0.05),
    (2, 9.21034037197618, 0.01),
    (5, 11.070497693516351, 0.05),
    (10, 18.307038053275146, 0.05),
    (30, 43.77297182574219, 0.05),
]

# Published F critical values: sf(quantile, d1, d2) == alpha.
F_TABLE = [
    (1, 10, 4.9646027437307145, 0.05),
    (2, 42, 3.219942293176122, 0.05),
    (5, 20, 2.7108898372096917, 0.05),
    (3, 9, 6.991917222233463, 0.01),
]


@pytest.mark.parametrize("df,q,alpha", CHI2_TABLE)
def test_chi2_sf_published_quantiles(df, q, alpha):
    assert chi2_sf(q, df) == pytest.approx(alpha, rel=1e-10)


@pytest.mark.parametrize("d1,d2,q,alpha", F_TABLE)
def test_f_sf_published_quantiles(d1, d2, q, alpha):
    assert f_sf(q, d1, d2) == pytest.approx(alpha, rel=1e-10)


def test_gamma_against_scipy_grid():
    for a in (0.5, 1.0, 2.5, 7.0, 21.0, 100.0):
        for x in (1e-6, 0.1, 0.9, 1.0, 2.7, 10.0, 50.0, 200.0):
            assert reg_lower_gamma(a, x) == pytest.approx(sp.gammainc(a, x), rel=1e-11, abs=1e-300)
            assert reg_upper_gamma(a, x) == pytest.approx(sp.gammaincc(a, x), rel=1e-11, abs=1e-300)


def test_beta_against_scipy_grid():
    for a in (0.5, 1.0, 3.0, 12.5, 40.0):
        for b in (0.5, 2.0, 8.0, 21.0):
            for x in (0.001, 0.2, 0.5, 0.8, 0.999):
                assert reg_incomplete_beta(a, b, x) == pytest.approx(
                    sp.betainc(a, b, x), rel=1e-11, abs=1e-300
                )


def test_gamma_beta_bounds_and_complements():
    assert reg_lower_gamma(3.0, 0.0) == 0.0
    assert reg_upper_gamma(3.0, 0.0) == 1.0
    assert reg_incomplete_beta(2.0, 3.0, 0.0) == 0.0
    assert reg_incomplete_beta(2.0, 3.0, 1.0) == 1.0
    for a, x in [(2.0, 1.0), (9.0, 12.0)]:
        assert reg_lower_gamma(a, x) + reg_upper_gamma(a, x) == pytest.approx(1.0, abs=1e-14)


def test_normal_cdf_sf():
    assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert normal_sf(1.959963984540054) == pytest.approx(0.025, rel=1e-12)
    assert normal_cdf(-1.6448536269514722) == pytest.approx(0.05, rel=1e-12)
    # far tail stays accurate through erfc
    assert normal_sf(8.0) == pytest.approx(6.220960574271786e-16, rel=1e-9)


def test_normal_quantile_round_trip():
    for p in (1e-10, 0.001, 0.025, 0.3, 0.5, 0.7, 0.975, 0.999, 1 - 1e-10):
        z = normal_quantile(p)
        assert normal_cdf(z) == pytest.approx(p, rel=1e-10, abs=1e-14)
    assert normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)


def test_invalid_inputs_raise():
    with pytest.raises(ValueError):
        reg_lower_gamma(-1.0, 1.0)
    with pytest.raises(ValueError):
        reg_incomplete_beta(1.0, 1.0, 1.5)
    with pytest.raises(ValueError):
        normal_quantile(0.0)
    assert chi2_sf(-1.0, 3) == 1.0
    assert f_sf(0.0, 2, 2) == 1.0
    assert f_sf(math.inf, 2, 2) == 0.0
