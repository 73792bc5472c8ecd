import numpy as np
import pytest
from scipy import stats

from elo_arena.normal import norm_cdf, norm_ppf, norm_sf


@pytest.mark.parametrize("x", np.linspace(-8, 8, 321))
def test_cdf_matches_scipy(x):
    assert abs(norm_cdf(x) - stats.norm.cdf(x)) < 1e-12
    assert abs(norm_sf(x) - stats.norm.sf(x)) < 1e-12


def test_ppf_matches_scipy_over_range():
    xs = np.linspace(-8, 8, 4001)
    for x in xs:
        p = stats.norm.cdf(x)
        if 0 < p < 1:
            assert abs(norm_ppf(p) - stats.norm.ppf(p)) < 1e-9


def test_ppf_round_trip():
    for p in (1e-12, 0.001, 0.025, 0.3, 0.5, 0.75, 0.975, 0.999999):
        assert norm_cdf(norm_ppf(p)) == pytest.approx(p, rel=1e-12)


def test_ppf_edges():
    assert norm_ppf(0.5) == 0.0
    assert norm_ppf(0.0) == -np.inf and norm_ppf(1.0) == np.inf
    with pytest.raises(ValueError):
        norm_ppf(1.5)
