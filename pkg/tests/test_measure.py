import numpy as np
import pytest

from roughpremium.gauss import DriverConfig
from roughpremium.measure import (
    GirsanovSpec,
    implied_premium,
    martingale_test,
    radon_nikodym_path,
    sharpe_ratio,
    sharpe_sign_check,
    stopped_process_diagnostics,
)
from roughpremium.models import DeterministicPremium, ModelParams, simulate_p_measure, simulate_q_measure

H, RHO = 0.1, -0.7


def market(n_paths=2000, **kw):
    base = dict(H=H, nu=0.8, rho=RHO, xi0=0.04, r=0.02, mu=0.06, compensated=True)
    base.update(kw)
    p = ModelParams(**base)
    c = DriverConfig(n_steps=32, horizon=1.0, n_paths=n_paths, rho=RHO, H=H, seed=77)
    return p, simulate_p_measure(p, c)


def test_density_is_one_without_prices_of_risk():
    p, m = market(200, mu=0.02)
    D = radon_nikodym_path(GirsanovSpec(0.0), p, m)
    np.testing.assert_array_equal(D.values, 1.0)


def test_density_has_unit_mean():
    p, m = market(20000)
    D = radon_nikodym_path(GirsanovSpec(0.5), p, m).values[:, -1]
    rep = martingale_test(D, 1.0, name="density")
    assert rep.passed, rep


def test_density_rejects_pricing_paths():
    p = ModelParams(H=H, nu=0.8, rho=RHO, xi0=0.04)
    c = DriverConfig(n_steps=8, horizon=1.0, n_paths=5, rho=RHO, H=H, seed=1)
    q = simulate_q_measure(p, DeterministicPremium(0.0), c)
    with pytest.raises(ValueError):
        radon_nikodym_path(GirsanovSpec(0.0), p, q)


def test_sharpe_ratio_sign():
    p, m = market(50)
    chi = sharpe_ratio(p, m)
    assert np.all(chi < 0)
    np.testing.assert_allclose(chi, -0.04 / np.sqrt(m.v[:, :-1]))


def test_gamma_bound_enforced_unless_stress():
    with pytest.raises(ValueError):
        GirsanovSpec(lambda t, v: v)
    spec = GirsanovSpec(lambda t, v: 10 * v, bound=0.5)
    with pytest.raises(ValueError):
        spec.values(0.0, np.array([0.1]))
    stressed = GirsanovSpec(lambda t, v: 10 * v, stress=True)
    np.testing.assert_allclose(stressed.values(0.0, np.array([0.1])), [1.0])


def test_implied_premium_combines_both_prices():
    p, _ = market(10)
    lam = implied_premium(GirsanovSpec(0.3), p).fn(0.0, np.array([0.04]))
    chi = (0.02 - 0.06) / 0.2
    np.testing.assert_allclose(lam, RHO * chi + np.sqrt(1 - RHO**2) * 0.3)


def test_martingale_test_verdicts():
    rng = np.random.default_rng(0)
    x = rng.normal(1.0, 1.0, 5000)
    assert martingale_test(x, 1.0).passed
    assert not martingale_test(x + 0.2, 1.0).passed
    with pytest.raises(ValueError):
        martingale_test(x[:10], 1.0)
    rep = martingale_test(x, 1.0, antithetic=2.0 - x)
    assert rep.antithetic_mean == pytest.approx(1.0)
    assert rep.row()[-1] == "pass"


def test_stopped_process_frequencies_are_monotone():
    p, m = market(3000)
    D = radon_nikodym_path(GirsanovSpec(0.2), p, m)
    rows = stopped_process_diagnostics(m, [0.5, 1.0, 2.0], D)
    freqs = [r["frequency"] for r in rows]
    assert freqs == sorted(freqs, reverse=True)
    assert all("weighted_frequency" in r for r in rows)
    with pytest.raises(ValueError):
        stopped_process_diagnostics(m, [1.0, 0.5])


def test_sharpe_sign_check_reports():
    p, m = market(100)
    out = sharpe_sign_check(p, m)
    # rho < 0 and chi < 0 make the weighted integral positive on every path
    assert out["violation_rate"] == 1.0
    assert out["sup_max"] > 0
