"""Volterra kernels of convolution type and their exact moments.

Two parametric families are supported:

* power law  ``k(u) = u**alpha`` for ``u >= 0``, ``alpha in (-1/2, 1/2)``
* Gamma      ``k(u) = u**(H - 1/2) * exp(-beta * u)`` for ``u >= 0``

Both vanish for negative lags. With a negative exponent the kernel is
unbounded at ``u = 0``; pointwise evaluation there returns ``+inf`` and every
integration routine below works with antiderivatives or with Jacobi-weighted
quadrature, so no quadrature node ever sits on the singularity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

__all__ = [
    "HolderIndices",
    "PowerLawKernel",
    "GammaKernel",
    "KernelSpec",
    "kernel_eval",
    "kernel_interval_integral",
    "beta_fn",
    "kernel_cross_moment",
    "power_moments",
    "power_first_moments",
]


@dataclass(frozen=True)
class HolderIndices:
    """Hurst index ``H`` in (0, 1/2) with the shifted exponents ``H -/+ 1/2``."""

    H: float

    def __post_init__(self):
        if not 0.0 < self.H < 0.5:
            raise ValueError(f"H must lie in (0, 1/2), got {self.H}")

    @property
    def minus(self) -> float:
        return self.H - 0.5

    @property
    def plus(self) -> float:
        return self.H + 0.5


@dataclass(frozen=True)
class PowerLawKernel:
    """``k(u) = u**alpha`` on ``u >= 0``."""

    alpha: float

    def __post_init__(self):
        if not -0.5 < self.alpha < 0.5:
            raise ValueError(f"power-law exponent must lie in (-1/2, 1/2), got {self.alpha}")

    @property
    def exponent(self) -> float:
        return self.alpha

    @property
    def decay(self) -> float:
        return 0.0


@dataclass(frozen=True)
class GammaKernel:
    """``k(u) = u**(H - 1/2) * exp(-beta * u)`` on ``u >= 0``."""

    H: float
    beta: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.H < 1.0:
            raise ValueError(f"Gamma-kernel H must lie in (0, 1), got {self.H}")
        if self.beta < 0.0:
            raise ValueError(f"Gamma-kernel decay must be nonnegative, got {self.beta}")

    @property
    def exponent(self) -> float:
        return self.H - 0.5

    @property
    def decay(self) -> float:
        return self.beta


KernelSpec = PowerLawKernel | GammaKernel


def _power(lag, exponent):
    lag = np.asarray(lag, dtype=float)
    out = np.zeros_like(lag)
    pos = lag > 0
    out[pos] = lag[pos] ** exponent
    at0 = lag == 0
    if exponent < 0:
        out[at0] = np.inf
    elif exponent == 0:
        out[at0] = 1.0
    return out


def kernel_eval(spec: KernelSpec, lag):
    """Evaluate the kernel at ``lag`` (scalar or array).

    Negative lags give 0. At ``lag == 0`` a negative exponent gives ``+inf``,
    a zero exponent gives 1 and a positive exponent gives 0.
    """
    lag = np.asarray(lag, dtype=float)
    out = _power(lag, spec.exponent)
    if spec.decay > 0:
        pos = lag > 0
        out[pos] *= np.exp(-spec.decay * lag[pos])
    return out if out.ndim else float(out)


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, a: float):
    # nodes/weights for weight (1 + y)**a on [-1, 1]
    return special.roots_jacobi(n, 0.0, a)


def _gamma_antiderivative(x, a, beta, tol=1e-10, n_max=512):
    """``int_0^x u**a exp(-beta u) du`` by Gauss-Jacobi quadrature, node count doubled until ``tol``."""
    x = float(x)
    if x <= 0:
        return 0.0
    n = 8
    prev = None
    while True:
        y, w = _jacobi_rule(n, a)
        # u = x (1 + y) / 2, so u**a du = (x/2)**(a+1) (1+y)**a dy
        val = (0.5 * x) ** (a + 1) * np.dot(w, np.exp(-beta * 0.5 * x * (1 + y)))
        if prev is not None and abs(val - prev) <= tol:
            return float(val)
        if n >= n_max:
            return float(val)
        prev = val
        n *= 2


def kernel_interval_integral(spec: KernelSpec, t, a, b) -> float:
    """``int_a^b k(t - u) du`` for ``0 <= a <= b <= t``.

    Exact antiderivative for the power law and for the undamped Gamma kernel;
    adaptive Gauss-Jacobi quadrature (absolute tolerance 1e-10) when the Gamma
    kernel has a positive decay rate.
    """
    if a > b:
        raise ValueError(f"interval is reversed: a={a} > b={b}")
    if b > t:
        raise ValueError(f"upper limit {b} exceeds evaluation time {t}")
    if a < 0:
        raise ValueError(f"lower limit must be nonnegative, got {a}")
    if a == b:
        return 0.0
    e = spec.exponent
    hi, lo = t - a, t - b
    if spec.decay == 0:
        return (hi ** (e + 1) - lo ** (e + 1)) / (e + 1)
    return _gamma_antiderivative(hi, e, spec.decay) - _gamma_antiderivative(lo, e, spec.decay)


def beta_fn(x: float, y: float) -> float:
    """Euler Beta function ``B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)``."""
    if x <= 0 or y <= 0:
        raise ValueError(f"Beta function needs positive arguments, got ({x}, {y})")
    return float(special.beta(x, y))


def kernel_cross_moment(H: HolderIndices, alpha: float, t: float, u: float) -> float:
    """``int_u^t (t - s)**(H - 1/2) (s - u)**alpha ds = B(alpha + 1, H + 1/2) (t - u)**(alpha + H + 1/2)``."""
    if u > t:
        raise ValueError(f"u={u} exceeds t={t}")
    if not -0.5 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (-1/2, 1/2), got {alpha}")
    if u == t:
        return 0.0
    return beta_fn(alpha + 1.0, H.plus) * (t - u) ** (alpha + H.plus)


def power_moments(exponent: float, dt: float, n: int) -> np.ndarray:
    """Cell integrals ``w[m] = int_{m dt}^{(m+1) dt} x**exponent dx`` for ``m = 0..n-1``.

    On a uniform grid these are the exact weights of ``int k(t_i - u) f(u) du``
    for piecewise-constant ``f``: cell ``j`` contributes ``w[i - 1 - j]``.
    """
    edges = (np.arange(n + 1) * dt) ** (exponent + 1)
    return np.diff(edges) / (exponent + 1)


def power_first_moments(exponent: float, dt: float, n: int) -> np.ndarray:
    """``int`` over cell ``m`` of ``(d - x) x**exponent dx`` with ``d = (m+1) dt`` the far edge.

    With ``x = t_i - u`` and cell ``j = i - 1 - m`` this is the integral of
    ``(u - t_j) k(t_i - u)``, the linear part of a piecewise-linear integrand.
    """
    x = np.arange(n + 1) * dt
    d = x[1:]
    p1 = lambda z: z ** (exponent + 1) / (exponent + 1)
    p2 = lambda z: z ** (exponent + 2) / (exponent + 2)
    return d * (p1(x[1:]) - p1(x[:-1])) - (p2(x[1:]) - p2(x[:-1]))
