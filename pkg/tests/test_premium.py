import numpy as np
import pytest

from roughpremium.curves import PiecewiseCurve
from roughpremium.premium import (
    ArbitrageWarning,
    VarSwapQuoteSet,
    bootstrap_forward_variance,
    extract_premium,
    extract_premium_from_samples,
    normalization_factor,
    premium_forward_map,
    premium_matrix,
)

H, NU, RHO = 0.1, 1.0, -0.7


def test_bootstrap_two_tenors():
    q = VarSwapQuoteSet([0.5, 1.0], [0.2, np.sqrt(0.05)])
    fv = bootstrap_forward_variance(q)
    np.testing.assert_allclose(fv.xi, [0.04, 0.06])
    np.testing.assert_allclose(fv.total_variance(), [0.02, 0.05])
    assert fv.arbitrage == ()
    assert fv.curve()(0.75) == pytest.approx(0.06)


def test_bootstrap_flags_negative_forward_variance():
    q = VarSwapQuoteSet([0.5, 1.0], [0.3, 0.1])
    with pytest.warns(ArbitrageWarning):
        fv = bootstrap_forward_variance(q)
    assert fv.arbitrage == (1.0,)
    assert fv.xi[1] < 0
    with pytest.raises(ValueError):
        extract_premium(fv, [0.04, 0.04], H, NU, RHO)


def test_quote_validation():
    with pytest.raises(ValueError):
        VarSwapQuoteSet([1.0, 0.5], [0.2, 0.2])
    with pytest.raises(ValueError):
        VarSwapQuoteSet([0.5, 0.5], [0.2, 0.2])
    with pytest.raises(ValueError):
        VarSwapQuoteSet([0.5], [0.0])


def test_premium_matrix_entries():
    knots = np.array([0.0, 0.5, 1.5])
    L = premium_matrix(knots, H)
    hp = H + 0.5
    assert L[0, 0] == pytest.approx(0.5**hp / hp)
    assert L[1, 0] == pytest.approx((1.5**hp - 1.0**hp) / hp)
    assert L[1, 1] == pytest.approx(1.0**hp / hp)
    assert L[0, 1] == 0.0


def test_constant_premium_rows_sum_to_full_integral():
    knots = np.array([0.0, 0.3, 0.7, 2.0])
    L = premium_matrix(knots, H)
    np.testing.assert_allclose(L.sum(axis=1), knots[1:] ** (H + 0.5) / (H + 0.5))


def test_round_trip():
    knots = np.array([0.0, 0.25, 0.5, 1.0, 2.0])
    lam = PiecewiseCurve(knots, [0.5, -0.2, 0.1, 0.3])
    p = np.array([0.04, 0.045, 0.05, 0.05])
    xi = PiecewiseCurve(knots, p * np.exp(premium_forward_map(lam, H, NU, RHO)))
    res = extract_premium(xi, p, H, NU, RHO)
    np.testing.assert_allclose(res.values, lam.values, atol=1e-12)
    assert res.residual < 1e-12


def test_normalization_tags():
    rho_bar = np.sqrt(1 - RHO**2)
    assert normalization_factor(2.0, RHO) == 0.5
    g = normalization_factor(NU, RHO, "gamma")
    e = normalization_factor(NU, RHO, "empirical")
    assert g / e == pytest.approx(rho_bar)
    with pytest.raises(ValueError):
        normalization_factor(NU, -1.0, "gamma")
    assert normalization_factor(NU, -1.0, "lambda") == 1.0
    with pytest.raises(ValueError):
        normalization_factor(NU, RHO, "other")


def test_extracted_values_scale_with_tag():
    knots = np.array([0.0, 0.5, 1.0])
    xi = PiecewiseCurve(knots, [0.05, 0.06])
    p = [0.04, 0.045]
    g = extract_premium(xi, p, H, NU, RHO, "gamma").values
    e = extract_premium(xi, p, H, NU, RHO, "empirical").values
    np.testing.assert_allclose(g, e * np.sqrt(1 - RHO**2))


def test_forecast_count_must_match():
    xi = PiecewiseCurve([0.0, 0.5, 1.0], [0.05, 0.06])
    with pytest.raises(ValueError):
        extract_premium(xi, [0.04], H, NU, RHO)
    with pytest.raises(ValueError):
        extract_premium(xi, [0.04, -0.01], H, NU, RHO)


def test_extraction_from_samples_reports_errors():
    rng = np.random.default_rng(8)
    knots = np.array([0.0, 0.5, 1.0])
    q = 0.05 * np.exp(rng.normal(-0.02, 0.2, size=(4000, 2)))
    p = 0.04 * np.exp(rng.normal(-0.02, 0.2, size=(4000, 2)))
    res = extract_premium_from_samples(q, p, knots, H, NU, RHO)
    assert res.se.shape == (2,)
    assert np.all(res.se > 0)
    assert res.values[0] > 0
