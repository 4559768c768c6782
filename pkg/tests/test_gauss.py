import numpy as np
import pytest

from roughpremium.gauss import (
    CHUNK_SIZE,
    DriverConfig,
    exact_residual_factor,
    iter_driver_chunks,
    path_normals,
    rl_covariance,
    rng_stream,
    simulate_drivers,
    volterra_cholesky_paths,
)
from roughpremium.gauss import _rl_covariance_quadrature


def cfg(**kw):
    base = dict(n_steps=16, horizon=1.0, n_paths=8, rho=-0.7, H=0.1, seed=11)
    base.update(kw)
    return DriverConfig(**base)


def test_streams_are_reproducible_and_distinct():
    a = rng_stream(5, 3).random(4)
    np.testing.assert_array_equal(a, rng_stream(5, 3).random(4))
    assert not np.allclose(a, rng_stream(5, 4).random(4))
    assert not np.allclose(a, rng_stream(6, 3).random(4))
    with pytest.raises(ValueError):
        rng_stream(-1, 0)


def test_antithetic_normals_are_negated():
    np.testing.assert_array_equal(path_normals(1, 2, 8, antithetic=True), -path_normals(1, 2, 8))


def test_path_output_independent_of_batching():
    full = simulate_drivers(cfg(n_paths=CHUNK_SIZE + 40))
    tail = simulate_drivers(cfg(n_paths=50, first_path=CHUNK_SIZE - 10))
    np.testing.assert_array_equal(full.Z_H[CHUNK_SIZE - 10 :], tail.Z_H)
    np.testing.assert_array_equal(full.dW[CHUNK_SIZE - 10 :], tail.dW)


def test_worker_count_does_not_change_paths():
    c = cfg(n_paths=2 * CHUNK_SIZE + 3, n_steps=4)
    one = simulate_drivers(c, workers=1)
    three = simulate_drivers(c, workers=3)
    np.testing.assert_array_equal(one.Z_H, three.Z_H)
    assert [len(p.path_index) for p in iter_driver_chunks(c)] == [CHUNK_SIZE, CHUNK_SIZE, 3]


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(rho=1.2)
    with pytest.raises(ValueError):
        cfg(H=0.6)
    with pytest.raises(ValueError):
        cfg(scheme="midpoint")
    assert cfg().rho_bar == pytest.approx(np.sqrt(0.51))


@pytest.mark.parametrize("s,t", [(0.3, 0.3), (0.2, 0.9), (0.9, 0.2), (0.05, 1.0)])
@pytest.mark.parametrize("H", [0.07, 0.3])
def test_hypergeometric_covariance_matches_quadrature(s, t, H):
    assert rl_covariance(s, t, H) == pytest.approx(_rl_covariance_quadrature(s, t, H, 48), rel=1e-8)


def test_covariance_at_origin_is_zero():
    assert rl_covariance(0.0, 0.5, 0.1) == 0.0


def test_exact_residual_factor_is_lower_triangular():
    L = exact_residual_factor(12, 0.1, 0.2)
    np.testing.assert_array_equal(L, np.tril(L))
    assert np.all(np.isfinite(L))


def test_driver_components_have_expected_correlation():
    d = simulate_drivers(cfg(n_paths=4000, n_steps=8, rho_x=0.5))
    dz = d.dZ.ravel()
    assert np.corrcoef(d.dW.ravel(), dz)[0, 1] == pytest.approx(-0.7, abs=0.02)
    assert np.corrcoef(d.dX.ravel(), dz)[0, 1] == pytest.approx(0.5, abs=0.02)
    assert d.X.shape == (4000, 9)


def test_exact_scheme_terminal_variance():
    d = simulate_drivers(cfg(n_paths=20000, n_steps=8, H=0.2))
    var = d.Z_H[:, -1].var()
    assert var == pytest.approx(1.0 / 0.4, rel=0.04)


def test_cholesky_oracle_limits_and_shapes():
    with pytest.raises(ValueError):
        volterra_cholesky_paths(cfg(n_steps=300))
    Z, W = volterra_cholesky_paths(cfg(n_steps=6, n_paths=3))
    assert Z.shape == W.shape == (3, 7)
    assert np.all(Z[:, 0] == 0)
