"""Generalised fractional operators on uniformly sampled paths.

For a kernel ``k(x) = x**alpha h(x)`` and a path ``f`` with ``g = f - f(0)``,
integration by parts turns both branches of the operator into

    (G^alpha f)(t) = int_0^t g'(s) k(t - s) ds ,

which is exact for piecewise-linear ``g`` once the cell integrals of ``k`` are
known in closed form. No finite differences of singular integrals appear.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .kernels import (
    GammaKernel,
    HolderIndices,
    KernelSpec,
    kernel_eval,
    kernel_interval_integral,
    power_first_moments,
    power_moments,
)

__all__ = [
    "SampledPath",
    "GfoKind",
    "causal_convolution",
    "cell_moments",
    "gfo_apply_deterministic",
    "gfo_half_plus",
    "gfo_stochastic_convolution",
    "kernel_weighted_integral",
]

Interpolation = Literal["linear", "step"]


@dataclass(frozen=True)
class SampledPath:
    """Values on a uniform grid ``0 = t_0 < ... < t_N``.

    ``values`` has the grid along its last axis; leading axes index paths.
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or len(grid) < 2:
            raise ValueError("grid must be one-dimensional with at least two points")
        if values.shape[-1] != len(grid):
            raise ValueError(f"values carry {values.shape[-1]} points, grid has {len(grid)}")
        steps = np.diff(grid)
        if np.any(steps <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-12 * max(abs(grid[-1]), 1.0):
            raise ValueError("grid must be uniform")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, horizon: float, n_steps: int, values) -> "SampledPath":
        return cls(np.linspace(0.0, horizon, n_steps + 1), values)

    @property
    def dt(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def n_steps(self) -> int:
        return len(self.grid) - 1


@dataclass(frozen=True)
class GfoKind:
    """Operator exponent ``alpha`` for inputs of Hölder order ``beta``.

    ``alpha`` in ``(-beta, 0)`` is the derivative-outside branch, ``[0, 1 - beta)``
    the derivative-inside one. ``decay`` > 0 multiplies the power kernel by
    ``exp(-decay x)``.
    """

    alpha: float
    beta: float
    decay: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"Hölder order must lie in (0, 1], got {self.beta}")
        if not -self.beta < self.alpha < 1.0 - self.beta:
            raise ValueError(
                f"alpha={self.alpha} outside ({-self.beta}, {1.0 - self.beta}) for beta={self.beta}"
            )
        if self.decay < 0:
            raise ValueError("decay must be nonnegative")

    @property
    def branch(self) -> str:
        return "derivative_outside" if self.alpha < 0 else "derivative_inside"


def causal_convolution(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``out[..., i] = sum_{j < i} x[..., j] * weights[i - 1 - j]``, with ``out[..., 0] = 0``.

    ``x`` has ``N`` cells along its last axis and the output ``N + 1`` grid points.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    w = np.asarray(weights, dtype=float)[:n]
    out = np.zeros(x.shape[:-1] + (n + 1,))
    if x.ndim == 1:
        out[1:] = np.convolve(x, w)[:n]
        return out
    # upper-triangular Toeplitz: M[j, i] = w[i - j] for j <= i
    idx = np.arange(n)
    lag = idx[None, :] - idx[:, None]
    M = np.where(lag >= 0, w[np.clip(lag, 0, n - 1)], 0.0)
    out[..., 1:] = x @ M
    return out


def cell_moments(exponent: float, dt: float, n: int, decay: float = 0.0) -> np.ndarray:
    """Cell integrals of ``x**exponent exp(-decay x)`` over ``[m dt, (m+1) dt]``."""
    if decay == 0:
        return power_moments(exponent, dt, n)
    spec = GammaKernel(H=exponent + 0.5, beta=decay)
    T = n * dt
    return np.array([kernel_interval_integral(spec, T, T - (m + 1) * dt, T - m * dt) for m in range(n)])


def gfo_apply_deterministic(
    kind: GfoKind, path: SampledPath, interpolation: Interpolation = "linear"
) -> SampledPath:
    """Apply ``G^alpha`` to a sampled deterministic path.

    ``interpolation="linear"`` treats the path as piecewise linear between grid
    points; ``"step"`` as right-continuous piecewise constant, in which case
    the operator reduces to a sum of kernel values at the jump times.
    """
    f = path.values
    if not np.all(np.isfinite(f[..., 0])):
        raise ValueError("initial value must be finite")
    g = f - f[..., :1]
    n, dt = path.n_steps, path.dt
    if interpolation == "linear":
        slopes = np.diff(g, axis=-1) / dt
        w = cell_moments(kind.alpha, dt, n, kind.decay)
        out = causal_convolution(w, slopes)
    elif interpolation == "step":
        jumps = np.diff(g, axis=-1)  # jumps[c] happens at t_{c+1}
        kvals = kernel_eval(_as_spec(kind), np.arange(1, n + 1) * dt)
        # a jump at t_{c+1} is felt strictly after it, at lag t_i - t_{c+1}
        conv = causal_convolution(kvals, jumps)
        out = np.zeros_like(g)
        out[..., 1:] = conv[..., :-1]
    else:
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return SampledPath(path.grid, out)


def _as_spec(kind: GfoKind) -> KernelSpec:
    if kind.decay > 0:
        return GammaKernel(H=kind.alpha + 0.5, beta=kind.decay)
    return _RawPower(kind.alpha)


@dataclass(frozen=True)
class _RawPower:
    # power kernel without the (-1/2, 1/2) restriction; operators use exponents up to 1
    alpha: float

    @property
    def exponent(self) -> float:
        return self.alpha

    @property
    def decay(self) -> float:
        return 0.0


def gfo_half_plus(
    lambda_path: SampledPath,
    H: HolderIndices,
    interpolation: Interpolation = "step",
    strict: bool = True,
) -> SampledPath:
    """``int_0^t (t - s)**(H - 1/2) lambda_s ds`` on every grid point.

    ``interpolation="step"`` reads ``values[j]`` as the constant value on
    ``[t_j, t_{j+1})``; ``"linear"`` interpolates linearly between grid points.
    Both use exact cell moments of the kernel.

    With ``strict=True`` a nonzero initial value is rejected, since the
    operator identity behind this integral assumes ``lambda_0 = 0``. Set
    ``strict=False`` to accept it (a warning is still emitted).
    """
    lam = lambda_path.values
    if np.any(lam[..., 0] != 0):
        if strict:
            raise ValueError("premium path must start at 0; pass strict=False to override")
        warnings.warn("premium path does not start at 0", stacklevel=2)
    return SampledPath(lambda_path.grid, kernel_weighted_integral(lam, lambda_path.dt, H.minus, interpolation))


def kernel_weighted_integral(values: np.ndarray, dt: float, exponent: float, interpolation: Interpolation = "step"):
    """``int_0^{t_i} (t_i - s)**exponent f(s) ds`` for ``f`` sampled on a uniform grid."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1] - 1
    w0 = power_moments(exponent, dt, n)
    out = causal_convolution(w0, values[..., :-1])
    if interpolation == "linear":
        slopes = np.diff(values, axis=-1) / dt
        out = out + causal_convolution(power_first_moments(exponent, dt, n), slopes)
    elif interpolation != "step":
        raise ValueError(f"unknown interpolation {interpolation!r}")
    return out


def gfo_stochastic_convolution(kernel: KernelSpec, increments: np.ndarray, dt: float) -> np.ndarray:
    """Left-point Itô convolution ``sum_{j < i} k(t_i - t_j) dZ_j``.

    The nearest lag is ``dt`` so the kernel singularity is never touched.
    Returns ``N + 1`` grid values with a zero initial value.
    """
    increments = np.asarray(increments, dtype=float)
    n = increments.shape[-1]
    w = kernel_eval(kernel, np.arange(1, n + 1) * dt)
    return causal_convolution(w, increments)
