"""Roughness, vol-of-vol and correlation estimates from daily volatility data.

``(H, nu)`` come from the scaling of empirical moments of log-variance
increments, ``m(q, D) = mean |log v_{t+D} - log v_t|**q ~ K_q D**(q H)``.
Time lags are measured in years (``D = days / 252``) so that ``nu`` is on the
same scale as the model parameter. Variance is ``v = rv**2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy import special

__all__ = [
    "VolSeries",
    "RoughnessEstimate",
    "RhoEstimate",
    "DegenerateInputError",
    "DEFAULT_Q_SET",
    "DAYS_PER_YEAR",
    "increment_constant",
    "estimate_h_nu",
    "estimate_rho",
]

DEFAULT_Q_SET = (0.5, 1.0, 1.5, 2.0, 3.0)
DAYS_PER_YEAR = 252
MIN_WINDOW = 50


class DegenerateInputError(ValueError):
    """Raised when the data carry no variation to regress on."""


@dataclass(frozen=True)
class VolSeries:
    """Daily annualized realized volatility (0.2 means 20%)."""

    dates: np.ndarray
    rv: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        rv = np.asarray(self.rv, dtype=float)
        if dates.shape != rv.shape or rv.ndim != 1:
            raise ValueError("dates and rv must be one-dimensional and of equal length")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise ValueError("dates must be strictly increasing")
        if np.any(~np.isfinite(rv)) or np.any(rv <= 0):
            raise ValueError("realized volatility must be positive and finite")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "rv", rv)

    @classmethod
    def from_values(cls, rv, start: str = "2000-01-03") -> "VolSeries":
        """Attach consecutive business days to a bare array."""
        rv = np.asarray(rv, dtype=float)
        dates = np.busday_offset(np.datetime64(start, "D"), np.arange(len(rv)), roll="forward")
        return cls(dates, rv)

    @property
    def log_variance(self) -> np.ndarray:
        return 2.0 * np.log(self.rv)

    def __len__(self):
        return len(self.rv)


@dataclass(frozen=True)
class RoughnessEstimate:
    H_hat: float
    nu_hat: float
    window: tuple
    zeta: dict = field(default_factory=dict)  # q -> slope
    r2: dict = field(default_factory=dict)  # q -> R^2 of the log-log fit
    intercept: float = float("nan")  # q = 2 intercept, log of nu**2 * c_H


@dataclass(frozen=True)
class RhoEstimate:
    rho_hat: float
    raw: float
    clamped: bool
    window: tuple
    correlation: float


def increment_constant(H: float) -> float:
    """``Var(Z^H_{t+D} - Z^H_t) / D**(2H)`` for the stationary-increment limit (``t -> inf``).

    Equal to ``Gamma(H + 1/2)**2 / (Gamma(2H + 1) sin(pi H))``.
    """
    return float(special.gamma(H + 0.5) ** 2 / (special.gamma(2 * H + 1) * np.sin(np.pi * H)))


def _fit(x, y):
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return coef[0], coef[1], r2


def _window_bounds(n: int, window: int | None, step: int | None):
    if window is None:
        window = n
    if window < MIN_WINDOW:
        raise ValueError(f"window must hold at least {MIN_WINDOW} points, got {window}")
    if window > n:
        raise ValueError(f"window of {window} points exceeds series length {n}")
    step = step or 1
    return [(s, s + window) for s in range(0, n - window + 1, step)]


def _h_nu(logv: np.ndarray, q_set, delta_max: int):
    lags = np.arange(1, delta_max + 1)
    x = np.log(lags / DAYS_PER_YEAR)
    zeta, r2, intercepts = {}, {}, {}
    for q in q_set:
        m = np.array([np.mean(np.abs(logv[d:] - logv[:-d]) ** q) for d in lags])
        if np.any(m <= 0):
            raise DegenerateInputError("log-variance increments vanish; the series is constant at some lag")
        c, s, rr = _fit(x, np.log(m))
        zeta[q], r2[q], intercepts[q] = float(s), float(rr), float(c)
    qs = np.array(list(zeta))
    zs = np.array([zeta[q] for q in qs])
    H = float(qs @ zs / (qs @ qs))  # zeta_q = q H, fitted through the origin
    if not 0 < H < 1:
        raise DegenerateInputError(f"fitted roughness {H:.4g} lies outside (0, 1)")
    return H, zeta, r2, intercepts


def estimate_h_nu(
    series: VolSeries,
    window: int | None = None,
    q_set: Sequence[float] = DEFAULT_Q_SET,
    delta_max: int = 30,
    step: int | None = None,
) -> list[RoughnessEstimate]:
    """Rolling ``(H, nu)`` estimates.

    Parameters
    ----------
    series : VolSeries
    window : int, optional
        Number of observations per window; the whole series by default.
    q_set : sequence of float
        Moment orders.
    delta_max : int
        Largest lag in days.
    step : int, optional
        Shift between consecutive windows, 1 day by default.

    Returns
    -------
    list of RoughnessEstimate
        One per window. ``nu_hat`` solves ``m(2, D) = nu**2 c_H D**(2H)``
        with the fitted ``q = 2`` intercept and ``c_H`` from
        :func:`increment_constant`.
    """
    if len(q_set) == 0:
        raise ValueError("q_set must not be empty")
    if 2.0 not in q_set:
        q_set = tuple(q_set) + (2.0,)
    logv = series.log_variance
    out = []
    for a, b in _window_bounds(len(logv), window, step):
        if b - a <= delta_max:
            raise ValueError("window must be longer than the largest lag")
        H, zeta, r2, intercepts = _h_nu(logv[a:b], q_set, delta_max)
        nu = float(np.sqrt(np.exp(intercepts[2.0]) / increment_constant(H)))
        out.append(
            RoughnessEstimate(H, nu, (series.dates[a], series.dates[b - 1]), zeta, r2, intercepts[2.0])
        )
    return out


def estimate_rho(
    prices,
    vols: VolSeries,
    H_hat: float | Sequence[float],
    window: int | None = None,
    step: int | None = None,
    price_dates=None,
    convention: Literal["stationary", "origin"] = "stationary",
    log_prices: bool = False,
) -> list[RhoEstimate]:
    """Correlation proxy from normalized returns and log-variance increments.

    With ``e_i = (log S_i - log S_{i-1}) / sqrt(v_{i-1})`` and
    ``d_i = log v_i - log v_{i-1}`` the estimate is ``a(H) Corr(e, d)``.
    ``convention="stationary"`` uses ``a = (H + 1/2) sqrt(c_H)``, the exact
    inverse for increments far from the origin. ``"origin"`` uses
    ``a = (H + 1/2) / sqrt(2H)``, exact for the first increment after time 0
    and biased by ``sqrt(2 H c_H)`` in the stationary regime. Values outside
    ``[-1, 1]`` are clamped and flagged.

    ``H_hat`` is one value or one per window. Pass ``log_prices=True`` when
    ``prices`` already holds log prices.
    """
    prices = np.asarray(prices, dtype=float)
    if prices.shape != vols.rv.shape:
        raise ValueError("price and volatility series must be aligned")
    if price_dates is not None and not np.array_equal(np.asarray(price_dates, dtype="datetime64[D]"), vols.dates):
        raise ValueError("price and volatility dates differ")
    if not log_prices:
        if np.any(prices <= 0):
            raise ValueError("prices must be positive")
        prices = np.log(prices)
    v = vols.rv**2
    e = np.diff(prices) / np.sqrt(v[:-1])
    d = np.diff(np.log(v))
    bounds = _window_bounds(len(prices), window, step)
    Hs = np.broadcast_to(np.asarray(H_hat, dtype=float), (len(bounds),))
    out = []
    for (a, b), H in zip(bounds, Hs):
        ee, dd = e[a : b - 1], d[a : b - 1]
        if np.std(ee) == 0 or np.std(dd) == 0:
            raise DegenerateInputError("returns or log-variance increments are constant")
        corr = float(np.corrcoef(ee, dd)[0, 1])
        if convention == "stationary":
            scale = (H + 0.5) * np.sqrt(increment_constant(H))
        elif convention == "origin":
            scale = (H + 0.5) / np.sqrt(2 * H)
        else:
            raise ValueError(f"unknown convention {convention!r}")
        raw = float(scale * corr)
        rho = float(np.clip(raw, -1.0, 1.0))
        out.append(RhoEstimate(rho, raw, rho != raw, (vols.dates[a], vols.dates[b - 1]), corr))
    return out
