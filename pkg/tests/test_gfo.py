import numpy as np
import pytest
from scipy import integrate

from roughpremium.gfo import (
    GfoKind,
    SampledPath,
    causal_convolution,
    gfo_apply_deterministic,
    gfo_half_plus,
    gfo_stochastic_convolution,
    kernel_weighted_integral,
)
from roughpremium.kernels import HolderIndices, PowerLawKernel


def test_sampled_path_requires_uniform_grid():
    with pytest.raises(ValueError):
        SampledPath(np.array([0.0, 0.1, 0.3]), np.zeros(3))
    with pytest.raises(ValueError):
        SampledPath(np.array([0.0, 0.1]), np.zeros(3))


def test_gfo_kind_branches():
    assert GfoKind(-0.2, 0.5).branch == "derivative_outside"
    assert GfoKind(0.3, 0.5).branch == "derivative_inside"
    with pytest.raises(ValueError):
        GfoKind(-0.6, 0.5)
    with pytest.raises(ValueError):
        GfoKind(0.5, 0.5)


def test_causal_convolution_matches_loop():
    rng = np.random.default_rng(3)
    w, x = rng.normal(size=6), rng.normal(size=(2, 6))
    out = causal_convolution(w, x)
    ref = np.zeros((2, 7))
    for i in range(1, 7):
        for j in range(i):
            ref[:, i] += x[:, j] * w[i - 1 - j]
    np.testing.assert_allclose(out, ref, atol=1e-14)
    np.testing.assert_allclose(causal_convolution(w, x[0]), ref[0], atol=1e-14)


def test_alpha_zero_is_increment_from_start():
    path = SampledPath.uniform(1.0, 50, np.sin(np.linspace(0, 3, 51)) + 2.0)
    out = gfo_apply_deterministic(GfoKind(0.0, 0.5), path, "linear")
    np.testing.assert_allclose(out.values, path.values - path.values[0], atol=1e-13)


def test_step_interpolation_is_sum_of_jumps():
    # single jump of size 2 at t_3 on a grid of step 0.25
    vals = np.array([1.0, 1.0, 1.0, 3.0, 3.0, 3.0])
    path = SampledPath.uniform(1.25, 5, vals)
    out = gfo_apply_deterministic(GfoKind(-0.3, 0.5), path, "step").values
    t = path.grid
    expected = np.where(t > t[3], 2.0 * np.clip(t - t[3], 1e-300, None) ** -0.3, 0.0)
    np.testing.assert_allclose(out, expected, rtol=1e-13)


def test_linear_gfo_of_linear_path_is_exact():
    alpha = 0.2
    path = SampledPath.uniform(2.0, 8, 3.0 * np.linspace(0, 2, 9))
    out = gfo_apply_deterministic(GfoKind(alpha, 0.5), path, "linear").values
    t = path.grid
    np.testing.assert_allclose(out, 3.0 * t ** (alpha + 1) / (alpha + 1), rtol=1e-13)


def test_half_plus_constant_premium():
    H = HolderIndices(0.1)
    lam = np.full(101, 0.7)
    lam[0] = 0.0
    with pytest.raises(ValueError):
        gfo_half_plus(SampledPath.uniform(1.0, 100, np.full(101, 0.7)), H)
    with pytest.warns(UserWarning):
        out = gfo_half_plus(SampledPath.uniform(1.0, 100, np.full(101, 0.7)), H, strict=False)
    np.testing.assert_allclose(out.values[-1], 0.7 / H.plus, rtol=1e-13)
    # a zero start only changes the first cell
    first = gfo_half_plus(SampledPath.uniform(1.0, 100, lam), H).values[-1]
    assert first == pytest.approx(0.7 / H.plus - 0.7 * (1.0**0.6 - 0.99**0.6) / 0.6, rel=1e-12)


def test_kernel_weighted_integral_linear_against_quad():
    f = lambda s: 1.0 + s**2
    n, T, e = 40, 1.0, -0.35
    grid = np.linspace(0, T, n + 1)
    got = kernel_weighted_integral(f(grid), T / n, e, "linear")[-1]
    ref, _ = integrate.quad(f, 0, T, weight="alg", wvar=(0.0, e))
    assert got == pytest.approx(ref, rel=1e-4)
    with pytest.raises(ValueError):
        kernel_weighted_integral(f(grid), T / n, e, "cubic")


def test_stochastic_convolution_left_point():
    dZ = np.array([1.0, -2.0, 0.5])
    out = gfo_stochastic_convolution(PowerLawKernel(-0.4), dZ, 0.5)
    k = lambda x: x**-0.4
    assert out[0] == 0.0
    assert out[2] == pytest.approx(1.0 * k(1.0) - 2.0 * k(0.5))
    assert out[3] == pytest.approx(1.0 * k(1.5) - 2.0 * k(1.0) + 0.5 * k(0.5))
