import numpy as np
import pytest
from scipy import integrate, special

from roughpremium.forecast import forecast_constant, forecast_driver, forecast_variance, forecast_weights
from roughpremium.gfo import SampledPath
from roughpremium.models import ModelParams


def history(values, horizon=1.0):
    values = np.asarray(values, dtype=float)
    return SampledPath.uniform(horizon, values.shape[-1] - 1, values)


def test_zero_history_gives_zero_mean():
    res = forecast_driver(history(np.zeros(51)), 0.1, 0.1)
    assert res.mean == 0.0
    assert res.var == pytest.approx(forecast_constant(0.1) * 0.1**0.2 / 0.2)


def test_linear_in_history():
    rng = np.random.default_rng(2)
    a, b = rng.normal(size=(2, 41))
    fa = forecast_driver(history(a), 0.05, 0.2).mean
    fb = forecast_driver(history(b), 0.05, 0.2).mean
    fab = forecast_driver(history(2 * a - b), 0.05, 0.2).mean
    assert fab == pytest.approx(2 * fa - fb, abs=1e-12)


def test_several_paths_at_once():
    rng = np.random.default_rng(3)
    z = rng.normal(size=(3, 21))
    res = forecast_driver(history(z), 0.1, 0.1)
    assert res.mean.shape == (3,)
    assert res.mean[1] == pytest.approx(forecast_driver(history(z[1]), 0.1, 0.1).mean)


def test_weights_total_mass_closed_form():
    H, delta, t = 0.15, 0.02, 2.0
    w = forecast_weights(200, t / 200, delta, H)
    c = 0.5 - H
    total = np.cos(H * np.pi) / np.pi * special.beta(c, H + 0.5) * special.betainc(c, H + 0.5, t / (t + delta))
    assert w.sum() == pytest.approx(total, rel=1e-12)
    # a constant history over an infinite past is forecast as itself
    assert forecast_weights(50, 1e4, 1.0, H).sum() == pytest.approx(1.0, abs=1e-3)


def test_weights_against_quadrature_for_linear_history():
    H, delta, t = 0.1, 0.1, 1.0
    f = lambda s: 0.3 + 2.0 * s
    grid = np.linspace(0, t, 11)
    w = forecast_weights(10, 0.1, delta, H)
    pref = np.cos(H * np.pi) / np.pi * delta ** (H + 0.5)
    ref, _ = integrate.quad(lambda s: f(s) / (t - s + delta), 0, t, weight="alg", wvar=(0.0, -H - 0.5))
    assert w @ f(grid) == pytest.approx(pref * ref, rel=1e-9)


def test_forecast_constant_value():
    H = 0.1
    expected = special.gamma(1.4) / (special.gamma(0.6) * special.gamma(1.8))
    assert forecast_constant(H) == pytest.approx(expected)
    assert 0 < forecast_constant(H) < 1


def test_input_checks():
    with pytest.raises(ValueError):
        forecast_weights(10, 0.1, 0.0, 0.1)
    with pytest.raises(ValueError):
        forecast_weights(10, 0.1, 0.1, 0.5)


def test_variance_forecast_from_zero_history():
    p = ModelParams(H=0.1, nu=1.2, rho=-0.7, xi0=0.04)
    res = forecast_variance(history(np.zeros(11)), 0.25, p)
    assert res.v_forecast == pytest.approx(0.04 * np.exp(0.5 * 1.44 * res.var))
    pc = ModelParams(H=0.1, nu=1.2, rho=-0.7, xi0=0.04, compensated=True)
    resc = forecast_variance(history(np.zeros(11)), 0.25, pc)
    assert resc.v_forecast == pytest.approx(res.v_forecast * np.exp(-0.5 * 1.44 * 1.25**0.2 / 0.2))


def test_mean_tracks_exact_gaussian_projection():
    # zero-anchored fBm with Var = t**(2H) / (2H); the exact conditional mean is a linear solve
    from scipy.linalg import cholesky, solve

    H, delta, t, n = 0.2, 1 / 12, 1.0, 256
    times = np.append(np.linspace(t / n, t, n), t + delta)
    s, u = np.meshgrid(times, times, indexing="ij")
    cov = (s ** (2 * H) + u ** (2 * H) - np.abs(s - u) ** (2 * H)) / (4 * H)
    X = (cholesky(cov, lower=True) @ np.random.default_rng(1).standard_normal((n + 1, 1000))).T
    hist = np.column_stack([np.zeros(len(X)), X[:, :-1]])
    approx = forecast_driver(history(hist, t), delta, H).mean
    beta = solve(cov[:-1, :-1], cov[:-1, -1])
    exact = X[:, :-1] @ beta
    cond_sd = np.sqrt(cov[-1, -1] - cov[:-1, -1] @ beta)
    assert np.sqrt(np.mean((approx - exact) ** 2)) < 0.1 * cond_sd
