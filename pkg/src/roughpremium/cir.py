"""Square-root premium factor: simulation, Riccati system and conditional forward variance.

The factor follows ``dY = kappa (theta - Y) dt + sigma sqrt(Y) dX``. With
``Z`` and ``X`` independent, the exponential moment

    B(t, T) = E[exp(nu int_t^T (T - u)**(H - 1/2) Y_u du) | F_t] = exp(-Y_t C(t, T) - A(t, T))

is exponential-affine, with ``C`` solving a Riccati equation whose source
term is singular at ``t = T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from .gauss import DriverConfig, simulate_drivers
from .gfo import SampledPath

__all__ = [
    "CirParams",
    "RiccatiSolution",
    "RiccatiDivergence",
    "simulate_cir",
    "cir_paths_from_increments",
    "cir_mean",
    "solve_riccati",
    "truncated_kernel_integral",
    "fcir_conditional_expectation",
    "fcir_expectation",
    "bond_price_mc",
]

RiccatiVariant = Literal["feynman_kac", "flipped_linear", "theta_linear"]


@dataclass(frozen=True)
class CirParams:
    kappa: float
    theta: float
    sigma: float
    y0: float

    def __post_init__(self):
        # zero values are accepted so that degenerate factors (sigma = 0, Y = 0) stay expressible
        if self.kappa < 0 or self.theta < 0 or self.sigma < 0:
            raise ValueError("kappa, theta and sigma must be nonnegative")
        if self.y0 < 0:
            raise ValueError(f"initial level must be nonnegative, got {self.y0}")

    @property
    def feller(self) -> bool:
        return 2 * self.kappa * self.theta >= self.sigma**2


class RiccatiDivergence(RuntimeError):
    """Raised when ``|C|`` exceeds the blow-up threshold; ``time`` is where it happened."""

    def __init__(self, time: float, T: float):
        super().__init__(f"Riccati solution diverges at t={time:.6g} (T={T:.6g})")
        self.time = time
        self.T = T


@dataclass(frozen=True)
class RiccatiSolution:
    T: float
    grid: np.ndarray
    C: np.ndarray
    A: np.ndarray
    variant: str = "feynman_kac"

    def at(self, t: float) -> tuple[float, float]:
        """``(C(t, T), A(t, T))`` for a grid time ``t``."""
        i = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[i] - t) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"t={t} is not on the solution grid")
        return float(self.C[i]), float(self.A[i])


def cir_paths_from_increments(p: CirParams, dX: np.ndarray, dt: float) -> np.ndarray:
    """Full-truncation Euler paths from Brownian increments; returns ``max(Y, 0)`` on the grid."""
    dX = np.atleast_2d(dX)
    n = dX.shape[1]
    y = np.full(dX.shape[0], float(p.y0))
    out = np.empty((dX.shape[0], n + 1))
    out[:, 0] = p.y0
    for j in range(n):
        yp = np.maximum(y, 0.0)
        y = y + p.kappa * (p.theta - yp) * dt + p.sigma * np.sqrt(yp) * dX[:, j]
        out[:, j + 1] = np.maximum(y, 0.0)
    return out


def simulate_cir(p: CirParams, cfg: DriverConfig, workers: int = 1) -> SampledPath:
    """CIR paths driven by the premium Brownian motion ``X`` of ``cfg``."""
    d = simulate_drivers(cfg, workers)
    return SampledPath(cfg.grid, cir_paths_from_increments(p, d.dX, cfg.dt))


def cir_mean(p: CirParams, t):
    """``E[Y_t] = theta + (y0 - theta) exp(-kappa t)``."""
    return p.theta + (p.y0 - p.theta) * np.exp(-p.kappa * np.asarray(t, dtype=float))


def _coefficients(p: CirParams, variant: RiccatiVariant):
    # d C / d tau = -nu k(tau) + a C + b C**2 and d A / d tau = c C, with tau = T - t
    half_s2 = 0.5 * p.sigma**2
    if variant == "feynman_kac":
        return -p.kappa, -half_s2, p.kappa * p.theta
    if variant == "flipped_linear":
        return p.kappa, -half_s2, -p.kappa * p.theta
    if variant == "theta_linear":
        return -p.theta, -half_s2, -p.kappa * p.theta
    raise ValueError(f"unknown Riccati variant {variant!r}")


def solve_riccati(
    p: CirParams,
    nu: float,
    H: float,
    T: float,
    n_steps: int,
    variant: RiccatiVariant = "feynman_kac",
    rtol: float = 1e-11,
    atol: float = 1e-13,
    blowup: float = 1e12,
) -> RiccatiSolution:
    """Solve for ``C(t, T)`` and ``A(t, T)`` on ``t_i = i T / n_steps``.

    ``"feynman_kac"`` is the system obtained from the Feynman-Kac equation of
    ``B(t, T)``::

        dC/dt = nu (T - t)**(H - 1/2) + kappa C + sigma**2 / 2 C**2,  dA/dt = -kappa theta C,

    with ``C(T, T) = A(T, T) = 0``. ``"flipped_linear"`` flips the sign of the
    linear term and of ``A``; ``"theta_linear"`` uses ``theta`` in place of
    ``kappa`` in the linear term and the flipped ``A``. Both alternatives exist
    only for comparison, and Monte Carlo bond prices reject them.

    In the variable ``x = (T - t)**(H + 1/2)`` the singular source becomes the
    constant ``-nu / (H + 1/2)``, so an explicit high-order integrator sees a
    smooth right-hand side. Divergence (``|C| > blowup``) raises
    :class:`RiccatiDivergence`.
    """
    if n_steps < 16:
        raise ValueError("need at least 16 steps")
    if not 0 < H < 0.5:
        raise ValueError(f"H must lie in (0, 1/2), got {H}")
    if T <= 0:
        raise ValueError("T must be positive")
    grid = np.linspace(0.0, T, n_steps + 1)
    if nu == 0:
        z = np.zeros_like(grid)
        return RiccatiSolution(T, grid, z, z.copy(), variant)
    a, b, c = _coefficients(p, variant)
    hp = H + 0.5
    q = 1.0 / hp

    def rhs(x, y):
        jac = q * x ** (q - 1.0)  # d tau / d x
        C = y[0]
        return [-nu * q + jac * (a * C + b * C * C), jac * c * C]

    def blown(x, y):
        return blowup - abs(y[0])

    blown.terminal = True
    tau = T - grid[::-1]  # increasing from 0
    x_eval = tau**hp
    sol = solve_ivp(
        rhs, (0.0, x_eval[-1]), [0.0, 0.0], method="DOP853", t_eval=x_eval, rtol=rtol, atol=atol, events=blown
    )
    if sol.status == 1 and len(sol.t_events[0]):
        raise RiccatiDivergence(T - sol.t_events[0][0] ** q, T)
    if not sol.success:
        raise RuntimeError(f"Riccati integration failed: {sol.message}")
    C = sol.y[0][::-1].copy()
    A = sol.y[1][::-1].copy()
    C[-1] = A[-1] = 0.0
    return RiccatiSolution(T, grid, C, A, variant)


def truncated_kernel_integral(Y: np.ndarray, dt: float, s_index: int, t: float, exponent: float) -> np.ndarray:
    """``int_0^{t_s} (t - u)**exponent Y_u du`` with ``Y`` linear between grid points."""
    Y = np.atleast_2d(Y)
    if s_index == 0:
        return np.zeros(Y.shape[0])
    tj = np.arange(s_index) * dt
    hi = t - tj  # x = t - u ranges over [t - t_{j+1}, t - t_j]
    lo = t - tj - dt
    if lo[-1] < -1e-12:
        raise ValueError("truncation time exceeds t")
    lo = np.maximum(lo, 0.0)
    e1, e2 = exponent + 1, exponent + 2
    m0 = (hi**e1 - lo**e1) / e1
    m1 = (hi**e2 - lo**e2) / e2  # int x**(e+1)
    # (u - t_j) = hi - x
    lin = hi * m0 - m1
    slopes = np.diff(Y[:, : s_index + 1], axis=1) / dt
    return Y[:, :s_index] @ m0 + slopes @ lin


def fcir_conditional_expectation(model, p: CirParams, market, s: float, t: float, n_riccati: int | None = None):
    """``E^Q[v_t | F_s]`` per path when the premium factor is a CIR process independent of ``Z``.

    ``market`` must come from :func:`roughpremium.models.simulate_q_measure`
    with a :class:`~roughpremium.models.CirPremium`. The Riccati system is
    solved with terminal time ``t`` on a grid containing ``s``.
    """
    if market.rho_x != 0:
        raise NotImplementedError("correlated premium and variance drivers admit no semi-analytic formula")
    if s > t:
        raise ValueError(f"s={s} exceeds t={t}")
    if market.factor is None:
        raise ValueError("market carries no simulated premium factor")
    from .models import truncated_convolution

    dt = market.grid[1] - market.grid[0]
    s_idx = int(round(s / dt))
    if abs(s_idx * dt - s) > 1e-9 * max(1.0, t):
        raise ValueError("s must lie on the simulation grid")
    H, nu = model.H, model.nu
    xi = model.xi0(t)
    if nu == 0:
        return np.full(market.v.shape[0], xi)
    gz = truncated_convolution(market.drivers.dZ, dt, s_idx, t, H - 0.5)
    gy = truncated_kernel_integral(market.factor, dt, s_idx, t, H - 0.5)
    C, A = _riccati_at(p, nu, H, s, t, n_riccati)
    Ys = market.factor[:, s_idx]
    expo = nu * (gz + gy) + 0.5 * nu**2 * (t - s) ** (2 * H) / (2 * H) - Ys * C - A
    if model.compensated:
        expo = expo - 0.5 * nu**2 * t ** (2 * H) / (2 * H)
    return xi * np.exp(expo)


def _riccati_at(p, nu, H, s, t, n):
    if s == t:
        return 0.0, 0.0
    n = n or 256
    sol = solve_riccati(p, nu, H, t - s, max(n, 16))
    # C(s, t) depends on t - s only
    return float(sol.C[0]), float(sol.A[0])


def fcir_expectation(model, p: CirParams, t: float) -> float:
    """Unconditional ``E^Q[v_t]`` under an independent CIR premium (the ``s = 0`` case)."""
    H, nu = model.H, model.nu
    if nu == 0 or t == 0:
        return float(model.xi0(t))
    C, A = _riccati_at(p, nu, H, 0.0, t, 256)
    expo = 0.5 * nu**2 * t ** (2 * H) / (2 * H) - p.y0 * C - A
    if model.compensated:
        expo -= 0.5 * nu**2 * t ** (2 * H) / (2 * H)
    return float(model.xi0(t) * np.exp(expo))


def bond_price_mc(p: CirParams, nu: float, H: float, cfg: DriverConfig, workers: int = 1) -> tuple[float, float]:
    """Monte Carlo ``E[exp(nu int_0^T (T - u)**(H - 1/2) Y_u du)]`` with ``T = cfg.horizon``."""
    from .gauss import iter_driver_chunks

    vals = []
    for d in iter_driver_chunks(cfg, workers):
        Y = cir_paths_from_increments(p, d.dX, cfg.dt)
        vals.append(np.exp(nu * truncated_kernel_integral(Y, cfg.dt, cfg.n_steps, cfg.horizon, H - 0.5)))
    x = np.concatenate(vals)
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(len(x)))
