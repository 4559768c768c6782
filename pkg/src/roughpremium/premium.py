"""Forward variance from variance-swap quotes and piecewise-constant premium extraction.

With ``mu = r`` the pricing and historical forward variances differ by

    log(xi_0(T) / E^P[v_T]) = nu int_0^T (T - u)**(H - 1/2) lambda_u du .

For ``lambda`` constant on the quote partition this is a lower-triangular
linear system in the piece values, solved tenor by tenor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import solve_triangular

from .curves import PiecewiseCurve

__all__ = [
    "VarSwapQuoteSet",
    "ForwardVarianceCurve",
    "ExtractedPremium",
    "ArbitrageWarning",
    "bootstrap_forward_variance",
    "premium_matrix",
    "normalization_factor",
    "extract_premium",
    "premium_forward_map",
    "extract_premium_from_samples",
]

Normalization = Literal["lambda", "gamma", "empirical"]


class ArbitrageWarning(UserWarning):
    """Total implied variance decreases between two tenors."""


@dataclass(frozen=True)
class VarSwapQuoteSet:
    """Variance-swap strikes in volatility units; the fair variance is ``strike_vol**2``."""

    tenors: np.ndarray
    strike_vol: np.ndarray
    as_of: np.datetime64 | None = None

    def __post_init__(self):
        T = np.asarray(self.tenors, dtype=float)
        K = np.asarray(self.strike_vol, dtype=float)
        if T.ndim != 1 or T.shape != K.shape or len(T) == 0:
            raise ValueError("tenors and strikes must be nonempty one-dimensional arrays of equal length")
        if np.any(T <= 0):
            raise ValueError("tenors must be positive")
        d = np.diff(T)
        if np.any(d == 0):
            raise ValueError("duplicate tenors")
        if np.any(d < 0):
            raise ValueError("tenors must be sorted increasingly")
        if np.any(K <= 0):
            raise ValueError("strikes must be positive")
        object.__setattr__(self, "tenors", T)
        object.__setattr__(self, "strike_vol", K)

    @property
    def fair_variance(self) -> np.ndarray:
        return self.strike_vol**2


@dataclass(frozen=True)
class ForwardVarianceCurve:
    knots: np.ndarray  # 0 = T_0 < T_1 < ... < T_n
    xi: np.ndarray
    arbitrage: tuple = ()  # tenors whose forward variance is not positive

    @property
    def tenors(self) -> np.ndarray:
        return self.knots[1:]

    def curve(self) -> PiecewiseCurve:
        return PiecewiseCurve(self.knots, self.xi)

    def total_variance(self) -> np.ndarray:
        """``V_{T_i} T_i`` rebuilt from the pieces."""
        return np.cumsum(self.xi * np.diff(self.knots))


@dataclass(frozen=True)
class ExtractedPremium:
    knots: np.ndarray
    values: np.ndarray
    normalization: str
    residual: float = 0.0
    se: np.ndarray | None = field(default=None)

    def curve(self) -> PiecewiseCurve:
        return PiecewiseCurve(self.knots, self.values)


def bootstrap_forward_variance(quotes: VarSwapQuoteSet) -> ForwardVarianceCurve:
    """``xi_i = (V_i T_i - V_{i-1} T_{i-1}) / (T_i - T_{i-1})``.

    Nonpositive pieces are kept as computed, listed in ``arbitrage`` and
    reported through an :class:`ArbitrageWarning`.
    """
    knots = np.concatenate([[0.0], quotes.tenors])
    total = np.concatenate([[0.0], quotes.fair_variance * quotes.tenors])
    xi = np.diff(total) / np.diff(knots)
    bad = tuple(float(t) for t, x in zip(quotes.tenors, xi) if x <= 0)
    if bad:
        warnings.warn(f"nonpositive forward variance at tenors {bad}", ArbitrageWarning, stacklevel=2)
    return ForwardVarianceCurve(knots, xi, bad)


def premium_matrix(knots, H: float) -> np.ndarray:
    """``L[i, j] = int_{T_j}^{min(T_{j+1}, T_{i+1})} (T_{i+1} - u)**(H - 1/2) du`` (zero above the diagonal)."""
    knots = np.asarray(knots, dtype=float)
    if np.any(np.diff(knots) <= 0):
        raise ValueError("partition must be strictly increasing")
    hp = H + 0.5
    T = knots[1:][:, None]
    a = knots[:-1][None, :]
    b = np.minimum(knots[1:][None, :], T)
    L = (np.clip(T - a, 0, None) ** hp - np.clip(T - b, 0, None) ** hp) / hp
    return np.tril(L)


def normalization_factor(nu: float, rho: float, normalization: Normalization = "lambda") -> float:
    """Constant ``c`` in ``L lambda = c log(xi / E^P)``.

    ``"lambda"`` gives the premium ``lambda`` itself (``c = 1 / nu``),
    ``"gamma"`` the orthogonal price of risk ``gamma = lambda / rho_bar``
    (``c = 1 / (nu rho_bar)``) and ``"empirical"`` uses
    ``c = 1 / (nu (1 - rho**2))``. The last two differ by exactly ``rho_bar``.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    if normalization == "lambda":
        return 1.0 / nu
    if not -1 < rho < 1:
        raise ValueError("|rho| must be below 1")
    rho_bar = np.sqrt(1 - rho**2)
    if normalization == "gamma":
        return 1.0 / (nu * rho_bar)
    if normalization == "empirical":
        return 1.0 / (nu * rho_bar**2)
    raise ValueError(f"unknown normalization {normalization!r}")


def _check_xi(xi: ForwardVarianceCurve | PiecewiseCurve):
    knots = np.asarray(xi.knots, dtype=float)
    vals = np.asarray(xi.xi if isinstance(xi, ForwardVarianceCurve) else xi.values, dtype=float)
    if knots[0] != 0:
        raise ValueError("partition must start at 0")
    bad = [float(t) for t, x in zip(knots[1:], vals) if x <= 0]
    if bad:
        raise ValueError(f"nonpositive forward variance at tenors {bad}; extraction refused")
    return knots, vals


def extract_premium(
    xi: ForwardVarianceCurve | PiecewiseCurve,
    p_forecasts,
    H: float,
    nu: float,
    rho: float,
    normalization: Normalization = "lambda",
) -> ExtractedPremium:
    """Piecewise-constant premium on the partition of ``xi``.

    ``p_forecasts[i]`` is ``E^P[v_{T_i} | F_0]``; ``xi_0(T_i)`` is read as the
    left limit, i.e. the forward variance on ``[T_{i-1}, T_i)``.
    """
    knots, vals = _check_xi(xi)
    p = np.asarray(p_forecasts, dtype=float)
    if p.shape != vals.shape:
        raise ValueError(f"need {len(vals)} forecasts, got {p.shape}")
    if np.any(p <= 0):
        raise ValueError("historical forecasts must be positive")
    c = normalization_factor(nu, rho, normalization)
    rhs = c * np.log(vals / p)
    L = premium_matrix(knots, H)
    if np.any(np.diag(L) <= 0):
        raise ValueError("degenerate partition")
    lam = solve_triangular(L, rhs, lower=True)
    residual = float(np.max(np.abs(L @ lam - rhs)))
    return ExtractedPremium(knots, lam, normalization, residual)


def premium_forward_map(
    lam: PiecewiseCurve, H: float, nu: float, rho: float, normalization: Normalization = "lambda"
) -> np.ndarray:
    """Log-ratios ``log(xi_0(T_i) / E^P[v_{T_i}])`` implied by a premium on its own partition."""
    c = normalization_factor(nu, rho, normalization)
    return premium_matrix(lam.knots, H) @ lam.values / c


def extract_premium_from_samples(
    q_samples: np.ndarray,
    p_samples: np.ndarray,
    knots,
    H: float,
    nu: float,
    rho: float,
    normalization: Normalization = "lambda",
) -> ExtractedPremium:
    """Extract from Monte Carlo draws of ``v_{T_i}`` under Q and under P.

    ``q_samples`` and ``p_samples`` have shape ``(paths, tenors)`` and come
    from independent runs. Standard errors follow from the delta method
    applied path by path, which keeps the correlation across tenors.
    """
    q = np.asarray(q_samples, dtype=float)
    p = np.asarray(p_samples, dtype=float)
    qm, pm = q.mean(axis=0), p.mean(axis=0)
    knots = np.asarray(knots, dtype=float)
    res = extract_premium(PiecewiseCurve(knots, qm), pm, H, nu, rho, normalization)
    c = normalization_factor(nu, rho, normalization)
    L = premium_matrix(knots, H)
    cov = np.cov(q / qm, rowvar=False) / len(q) + np.cov(p / pm, rowvar=False) / len(p)
    Linv = solve_triangular(L, np.eye(len(L)), lower=True)
    J = c * Linv
    se = np.sqrt(np.diag(J @ np.atleast_2d(cov) @ J.T))
    return ExtractedPremium(res.knots, res.values, normalization, res.residual, se)
