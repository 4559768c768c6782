"""Monte Carlo checks for the change of measure between P and Q.

The density is the stochastic exponential of ``int chi dW + int gamma dW_perp``
with Sharpe ratio ``chi = (r - mu) / sqrt(v)``. Integrands are frozen at the
left end of each cell, so the discrete exponential is an exact martingale and
the induced shift of the drivers matches what :mod:`roughpremium.models`
simulates under Q with the premium ``lambda = rho chi + rho_bar gamma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .curves import PiecewiseCurve, as_curve
from .gfo import SampledPath, causal_convolution
from .kernels import power_moments
from .models import ModelParams, SimulatedMarket, StateDependentPremium

__all__ = [
    "GirsanovSpec",
    "MartingaleReport",
    "radon_nikodym_path",
    "sharpe_ratio",
    "implied_premium",
    "martingale_test",
    "stopped_process_diagnostics",
    "sharpe_sign_check",
]

MIN_PATHS = 1000


@dataclass(frozen=True)
class GirsanovSpec:
    """Orthogonal market price of risk ``gamma``.

    ``gamma`` is a curve, a constant, or a callable ``gamma(t, v)`` returning
    one value per path. ``bound`` is the declared ``sup |gamma|``; samples
    above it are rejected unless ``stress`` is set, in which case nothing is
    enforced and results are only reported.
    """

    gamma: PiecewiseCurve | float | Callable = 0.0
    bound: float | None = None
    stress: bool = False

    def __post_init__(self):
        if not callable(self.gamma) or isinstance(self.gamma, PiecewiseCurve):
            object.__setattr__(self, "gamma", as_curve(self.gamma))
        elif self.bound is None and not self.stress:
            raise ValueError("a state-dependent gamma needs a declared bound")

    def values(self, t: float, v: np.ndarray) -> np.ndarray:
        if isinstance(self.gamma, PiecewiseCurve):
            g = np.full(v.shape, self.gamma(t))
        else:
            g = np.broadcast_to(np.asarray(self.gamma(t, v), dtype=float), v.shape)
        if not self.stress:
            bound = self.bound if self.bound is not None else np.max(np.abs(self.gamma.values))
            if np.any(~np.isfinite(g)) or np.any(np.abs(g) > bound):
                raise ValueError(f"gamma exceeds its declared bound {bound} at t={t}")
        return g


def sharpe_ratio(params: ModelParams, market: SimulatedMarket) -> np.ndarray:
    """``chi`` per path and cell, from cell averages of ``r - mu`` and left-point variance."""
    grid = market.grid
    dt = grid[1] - grid[0]
    excess = (params.r.cell_integrals(grid) - params.mu.cell_integrals(grid)) / dt
    v = market.v[:, :-1]
    if np.any(v <= 0):
        raise ValueError("variance must be positive to define the Sharpe ratio")
    return excess / np.sqrt(v)


def radon_nikodym_path(spec: GirsanovSpec, params: ModelParams, market: SimulatedMarket) -> SampledPath:
    """Discrete density ``exp(sum(chi dW + gamma dW_perp) - 1/2 sum(chi**2 + gamma**2) dt)``.

    ``market`` must be simulated under P.
    """
    if market.measure != "P":
        raise ValueError("density is defined on historical-measure paths")
    grid = market.grid
    dt = grid[1] - grid[0]
    chi = sharpe_ratio(params, market)
    gam = np.column_stack([spec.values(t, market.v[:, j]) for j, t in enumerate(grid[:-1])])
    d = market.drivers
    incr = chi * d.dW + gam * d.dW_perp - 0.5 * (chi**2 + gam**2) * dt
    logD = np.zeros_like(market.v)
    np.cumsum(incr, axis=1, out=logD[:, 1:])
    return SampledPath(grid, np.exp(logD))


def implied_premium(spec: GirsanovSpec, params: ModelParams) -> StateDependentPremium:
    """``lambda = rho chi + rho_bar gamma`` as a premium for :func:`simulate_q_measure`."""
    rho, rho_bar = params.rho, params.rho_bar

    def fn(t, v):
        # mu and r are piecewise constant, so the cell average equals the left value on grid cells
        chi = (params.r(t) - params.mu(t)) / np.sqrt(v)
        return rho * chi + rho_bar * spec.values(t, v)

    return StateDependentPremium(fn)


@dataclass(frozen=True)
class MartingaleReport:
    name: str
    n: int
    mean: float
    se: float
    z: float
    passed: bool
    antithetic_mean: float | None = None
    antithetic_se: float | None = None

    def row(self) -> list:
        return [self.name, self.n, self.mean, self.se, self.z, "pass" if self.passed else "fail"]


def martingale_test(
    samples, target: float, antithetic=None, name: str = "", threshold: float = 3.0
) -> MartingaleReport:
    """Check ``E[samples] == target`` at ``threshold`` standard errors.

    ``antithetic`` holds the samples from the negated draws, path for path;
    when given, the pair averages form a second estimator that is reported
    alongside the plain one. The verdict uses the antithetic estimator if
    present.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if len(x) < MIN_PATHS:
        raise ValueError(f"need at least {MIN_PATHS} samples, got {len(x)}")
    mean = float(x.mean())
    se = float(x.std(ddof=1) / np.sqrt(len(x)))
    am = ase = None
    m, s = mean, se
    if antithetic is not None:
        y = np.asarray(antithetic, dtype=float).ravel()
        if y.shape != x.shape:
            raise ValueError("antithetic samples must pair up with the plain ones")
        pair = 0.5 * (x + y)
        am, ase = float(pair.mean()), float(pair.std(ddof=1) / np.sqrt(len(pair)))
        m, s = am, ase
    if s == 0:
        z = 0.0 if m == target else np.inf
    else:
        z = (m - target) / s
    return MartingaleReport(name, len(x), mean, se, float(z), bool(abs(z) <= threshold), am, ase)


def stopped_process_diagnostics(
    market: SimulatedMarket, levels: Sequence[float], density: SampledPath | None = None
) -> list[dict]:
    """Frequency of ``sup_t Y_t >= n`` for each level ``n``, with ``Y`` the Volterra driver.

    With ``density`` the frequencies are also reported under the shifted
    measure, i.e. weighted by the terminal density.
    """
    levels = np.asarray(levels, dtype=float)
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly increasing")
    peak = market.drivers.Z_H.max(axis=1)
    w = density.values[:, -1] if density is not None else None
    rows = []
    for n in levels:
        hit = peak >= n
        row = {"level": float(n), "frequency": float(hit.mean())}
        if w is not None:
            row["weighted_frequency"] = float(np.mean(w * hit))
        rows.append(row)
    return rows


def sharpe_sign_check(params: ModelParams, market: SimulatedMarket, tol: float = 0.0) -> dict:
    """Pathwise ``sup_t rho int_0^t (t - u)**(H - 1/2) chi_u du`` and the share of paths above ``tol``.

    This evaluates the sign condition on the Sharpe ratio; it does not decide
    whether a premium specification is admissible.
    """
    chi = sharpe_ratio(params, market)
    dt = market.grid[1] - market.grid[0]
    w = power_moments(params.H - 0.5, dt, chi.shape[1])
    s = params.rho * causal_convolution(w, chi)
    sup = s.max(axis=1)
    return {"sup_max": float(sup.max()), "violation_rate": float(np.mean(sup > tol))}
