"""Conditional forecast of the rough driver and of instantaneous variance.

Given a history of ``Z^H`` on ``[0, t]`` the predictor of ``Z^H_{t+D}`` is

    cos(H pi) / pi * D**(H + 1/2) * int_0^t Z_s / ((t - s + D) (t - s)**(H + 1/2)) ds

with Gaussian error of variance ``C_H D**(2H) / (2H)``. The history is
interpolated linearly between grid points and every cell integral is
evaluated in closed form through the incomplete Beta function, so the
``(t - s)**(-H - 1/2)`` singularity at ``s = t`` costs nothing.

The predictor is exact for an infinite past; starting the integral at 0
truncates it, which leaves a small bias for short histories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .gfo import SampledPath
from .models import ModelParams

__all__ = ["ForecastResult", "forecast_constant", "forecast_weights", "forecast_driver", "forecast_variance"]


def forecast_constant(H: float) -> float:
    """``C_H = Gamma(3/2 - H) / (Gamma(H + 1/2) Gamma(2 - 2H))``."""
    return float(special.gamma(1.5 - H) / (special.gamma(H + 0.5) * special.gamma(2 - 2 * H)))


@dataclass(frozen=True)
class ForecastResult:
    horizon: float
    mean: np.ndarray | float
    var: float
    v_forecast: np.ndarray | float | None = None


def _m0(x, delta, H):
    # int_0^x u**(-H-1/2) / (u + delta) du
    c, hp = 0.5 - H, H + 0.5
    x = np.asarray(x, dtype=float)
    return delta ** (-hp) * special.beta(c, hp) * special.betainc(c, hp, x / (x + delta))


def forecast_weights(n_steps: int, dt: float, delta: float, H: float) -> np.ndarray:
    """Weights ``w`` with ``mean = w @ Z[0..n_steps]`` for a linearly interpolated history."""
    if delta <= 0:
        raise ValueError(f"horizon must be positive, got {delta}")
    if not 0 < H < 0.5:
        raise ValueError(f"H must lie in (0, 1/2), got {H}")
    hp = H + 0.5
    # lag u = t - s; grid point s_i sits at lag u_i = (n - i) dt
    edges = np.arange(n_steps + 1) * dt  # lags 0, dt, ..., t
    M0 = _m0(edges, delta, H)
    M1 = edges ** (1 - hp) / (1 - hp) - delta * M0  # int_0^x u**(1/2-H) / (u + delta) du
    m0 = np.diff(M0)
    m1 = np.diff(M1)
    # on lag cell [u_k, u_{k+1}], Z is linear: Z = Z_near (u_{k+1} - u)/dt + Z_far (u - u_k)/dt
    near = (edges[1:] * m0 - m1) / dt
    far = (m1 - edges[:-1] * m0) / dt
    w_lag = np.zeros(n_steps + 1)
    w_lag[:-1] += near
    w_lag[1:] += far
    pref = np.cos(H * np.pi) / np.pi * delta**hp
    return pref * w_lag[::-1]  # back to time order s_0 .. s_n


def forecast_driver(history: SampledPath, delta: float, H: float) -> ForecastResult:
    """Conditional mean and variance of ``Z^H_{t + delta}`` given ``Z^H`` on ``[0, t]``.

    ``history.values`` may carry several paths along its leading axis.
    """
    w = forecast_weights(history.n_steps, history.dt, delta, H)
    mean = history.values @ w
    var = forecast_constant(H) * delta ** (2 * H) / (2 * H)
    return ForecastResult(delta, mean if np.ndim(mean) else float(mean), float(var))


def forecast_variance(history: SampledPath, delta: float, params: ModelParams) -> ForecastResult:
    """``E^P[v_{t+delta} | F_t] = prefactor * exp(nu mean + nu**2 var / 2)``.

    The prefactor is ``xi0(t + delta)``, times ``exp(-nu**2 (t + delta)**(2H) / (4H))``
    for a compensated model.
    """
    res = forecast_driver(history, delta, params.H)
    T = history.grid[-1] + delta
    pref = params.xi0(T)
    if params.compensated:
        pref = pref * np.exp(-0.5 * params.nu**2 * T ** (2 * params.H) / (2 * params.H))
    v = pref * np.exp(params.nu * np.asarray(res.mean) + 0.5 * params.nu**2 * res.var)
    return ForecastResult(delta, res.mean, res.var, v if np.ndim(v) else float(v))
