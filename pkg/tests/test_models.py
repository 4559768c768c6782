import numpy as np
import pytest
from scipy import integrate

from roughpremium.curves import PiecewiseCurve
from roughpremium.gauss import DriverConfig
from roughpremium.models import (
    DeterministicPremium,
    ItoDiffusionPremium,
    ModelParams,
    StateDependentPremium,
    conditional_correction,
    conditional_forward_variance,
    deterministic_drift,
    driver_variance,
    price_variance_swap,
    simulate_p_measure,
    simulate_q_measure,
    truncated_convolution,
)

H, NU, RHO = 0.1, 1.0, -0.7


def params(**kw):
    base = dict(H=H, nu=NU, rho=RHO, xi0=0.04, r=0.02, mu=0.02, compensated=True)
    base.update(kw)
    return ModelParams(**base)


def cfg(**kw):
    base = dict(n_steps=32, horizon=1.0, n_paths=4000, rho=RHO, H=H, seed=2024)
    base.update(kw)
    return DriverConfig(**base)


def test_params_validation():
    with pytest.raises(ValueError):
        params(rho=0.3)
    with pytest.raises(ValueError):
        params(xi0=-0.1)
    with pytest.raises(ValueError):
        params(nu=-1.0)
    assert params().xi0(3.0) == 0.04


def test_mismatched_driver_config_rejected():
    with pytest.raises(ValueError):
        simulate_p_measure(params(), cfg(H=0.2))


def test_zero_premium_reproduces_historical_paths_exactly():
    p_mkt = simulate_p_measure(params(), cfg(n_paths=300))
    q_mkt = simulate_q_measure(params(), DeterministicPremium(0.0), cfg(n_paths=300))
    np.testing.assert_array_equal(p_mkt.v, q_mkt.v)
    np.testing.assert_array_equal(p_mkt.S, q_mkt.S)
    assert (p_mkt.measure, q_mkt.measure) == ("P", "Q")


def test_deterministic_drift_against_quadrature():
    curve = PiecewiseCurve([0.0, 0.3, 0.8], [0.5, -0.2])
    grid = np.linspace(0, 1.2, 7)
    got = deterministic_drift(curve, grid, H)
    for t, g in zip(grid[1:], got[1:]):
        ref, _ = integrate.quad(curve, 0, t, weight="alg", wvar=(0.0, H - 0.5), limit=200)
        assert g == pytest.approx(ref, rel=1e-7)
    assert got[0] == 0.0


def test_driver_variance_schemes():
    c = cfg(n_steps=10)
    np.testing.assert_allclose(driver_variance(c), c.grid ** (2 * H) / (2 * H))
    left = driver_variance(cfg(n_steps=10, scheme="left"))
    assert left[1] == pytest.approx(0.1 ** (2 * H))


def test_compensated_variance_has_flat_mean():
    m = simulate_p_measure(params(), cfg())
    mean = m.v.mean(axis=0)
    se = m.v.std(axis=0) / np.sqrt(m.v.shape[0])
    assert np.all(np.abs(mean[1:] - 0.04) < 4 * se[1:])


def test_discounted_spot_is_martingale_under_q():
    m = simulate_q_measure(params(mu=0.1), DeterministicPremium(0.3), cfg())
    x = m.discounted[:, -1]
    assert abs(x.mean() - 1.0) < 4 * x.std() / np.sqrt(len(x))


def test_deterministic_premium_shifts_log_variance_pathwise():
    lam = 0.4
    c = cfg(n_paths=100)
    q = simulate_q_measure(params(), DeterministicPremium(lam), c)
    p = simulate_p_measure(params(), c)
    shift = np.log(q.v / p.v)
    np.testing.assert_allclose(shift, np.broadcast_to(NU * lam * c.grid ** (H + 0.5) / (H + 0.5), shift.shape), atol=1e-12)


def test_state_dependent_zero_matches_deterministic_zero():
    c = cfg(n_paths=200)
    a = simulate_q_measure(params(), StateDependentPremium(lambda t, v: 0.0 * v), c)
    b = simulate_q_measure(params(), DeterministicPremium(0.0), c)
    np.testing.assert_allclose(a.v, b.v, rtol=1e-14)
    assert a.lam.shape == (200, 32)


def test_ito_premium_uses_premium_correlation():
    prem = ItoDiffusionPremium(alpha=0.0, rho_x=0.4, normalize=False)
    m = simulate_q_measure(params(), prem, cfg(n_paths=100))
    assert m.rho_x == 0.4
    assert m.factor.shape == (100, 33)
    assert prem.coefficient(H) == pytest.approx(1.0 / (H + 0.5))


def test_ito_premium_alpha_range():
    with pytest.raises(ValueError):
        ItoDiffusionPremium(alpha=0.1)


def test_truncated_convolution_weights():
    dZ = np.ones((1, 4))
    got = truncated_convolution(dZ, 0.25, 2, 1.0, -0.4)
    ref = (1.0**0.6 - 0.5**0.6) / 0.6 / 0.25
    assert got[0] == pytest.approx(ref)
    assert truncated_convolution(dZ, 0.25, 0, 1.0, -0.4)[0] == 0.0


def test_conditional_correction_variants():
    tau = 0.7
    iso = conditional_correction(H, NU, 0.0, tau)
    assert iso == pytest.approx(conditional_correction(H, NU, 0.0, tau, "half_cross"))
    full = conditional_correction(H, NU, -0.5, tau) - iso
    half = conditional_correction(H, NU, -0.5, tau, "half_cross") - iso
    assert half == pytest.approx(full / 2)
    with pytest.raises(ValueError):
        conditional_correction(H, NU, 0.0, tau, "other")


def test_conditional_forward_variance_at_s_equals_t():
    prem = ItoDiffusionPremium(alpha=0.0, normalize=False)
    m = simulate_q_measure(params(), prem, cfg(n_paths=50))
    np.testing.assert_array_equal(conditional_forward_variance(params(), m, 1.0, 1.0), m.v[:, -1])
    with pytest.raises(ValueError):
        conditional_forward_variance(params(), m, 0.51, 1.0)


def test_variance_swap_without_premium_is_forward_variance():
    mean, se = price_variance_swap(params(), DeterministicPremium(0.0), cfg(), 1.0)
    assert abs(mean - 0.04) < 4 * se
    with pytest.raises(ValueError):
        price_variance_swap(params(), DeterministicPremium(0.0), cfg(), 0.3)
