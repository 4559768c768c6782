"""Correlated Brownian drivers and the Riemann-Liouville driver on a uniform grid.

Every path owns a counter-based Philox stream keyed by ``(seed, path_index)``,
so the output of a path never depends on how paths are batched or on the
number of workers. Per path the stream is consumed in four fixed blocks of
``n_steps`` uniforms, turned into normals by the inverse CDF:

    block 0  W increments
    block 1  W_perp increments
    block 2  independent part of the premium driver X
    block 3  residual normals of the exact Volterra scheme

Two Volterra schemes are available. ``"left"`` is the plain left-point Riemann
sum ``sum_j k(t_i - t_j) dZ_j``. ``"exact"`` splits each cell integral into
its conditional mean given ``dZ_j`` (exact kernel moments) plus a Gaussian
residual independent of all Brownian increments; the residual covariance is
the exact covariance minus the part carried by the conditional means, so the
grid values have exactly the law of the continuous process.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, Literal

import numpy as np
from scipy import linalg, special

from .gfo import causal_convolution, gfo_stochastic_convolution
from .kernels import HolderIndices, PowerLawKernel, power_moments

__all__ = [
    "DriverConfig",
    "DriverPaths",
    "rng_stream",
    "path_normals",
    "simulate_drivers",
    "iter_driver_chunks",
    "volterra_path",
    "rl_covariance",
    "exact_residual_factor",
    "volterra_cholesky_paths",
    "CHUNK_SIZE",
]

CHUNK_SIZE = 2048
N_BLOCKS = 4
_U_FLOOR = 2.0**-54


@dataclass(frozen=True)
class DriverConfig:
    n_steps: int
    horizon: float
    n_paths: int
    rho: float
    H: float
    seed: int
    first_path: int = 0
    scheme: Literal["exact", "left"] = "exact"
    rho_x: float = 0.0  # correlation of the premium driver X with Z
    antithetic: bool = False

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")
        if not -1.0 <= self.rho_x <= 1.0:
            raise ValueError(f"rho_x must lie in [-1, 1], got {self.rho_x}")
        if self.scheme not in ("exact", "left"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        HolderIndices(self.H)

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.n_steps + 1)

    @property
    def indices(self) -> HolderIndices:
        return HolderIndices(self.H)

    @property
    def rho_bar(self) -> float:
        return float(np.sqrt(1.0 - self.rho**2))


@dataclass
class DriverPaths:
    """Brownian increments and the Volterra driver for a batch of paths.

    Arrays have shape ``(n_paths, n_steps)`` for increments and
    ``(n_paths, n_steps + 1)`` for path values.
    """

    grid: np.ndarray
    dW: np.ndarray
    dW_perp: np.ndarray
    dX: np.ndarray
    Z_H: np.ndarray
    rho: float
    path_index: np.ndarray

    @property
    def dZ(self) -> np.ndarray:
        rho_bar = np.sqrt(1.0 - self.rho**2)
        return self.rho * self.dW + rho_bar * self.dW_perp

    @staticmethod
    def _cum(dx):
        out = np.zeros(dx.shape[:-1] + (dx.shape[-1] + 1,))
        np.cumsum(dx, axis=-1, out=out[..., 1:])
        return out

    @property
    def W(self):
        return self._cum(self.dW)

    @property
    def W_perp(self):
        return self._cum(self.dW_perp)

    @property
    def Z(self):
        return self._cum(self.dZ)

    @property
    def X(self):
        return self._cum(self.dX)

    @property
    def n_paths(self) -> int:
        return self.dW.shape[0]


def rng_stream(seed: int, path_index: int) -> np.random.Generator:
    """Philox generator keyed by ``(seed, path_index)``; distinct keys give independent streams."""
    if not 0 <= seed < 2**64 or path_index < 0:
        raise ValueError("seed must be a 64-bit unsigned integer and path_index nonnegative")
    return np.random.Generator(np.random.Philox(key=(int(path_index) << 64) | int(seed)))


def path_normals(seed: int, path_index: int, n_steps: int, antithetic: bool = False) -> np.ndarray:
    """Standard normals of one path, shape ``(N_BLOCKS, n_steps)``."""
    u = rng_stream(seed, path_index).random(N_BLOCKS * n_steps)
    np.maximum(u, _U_FLOOR, out=u)
    z = special.ndtri(u).reshape(N_BLOCKS, n_steps)
    return -z if antithetic else z


def _chunk_bounds(cfg: DriverConfig):
    start, end = cfg.first_path, cfg.first_path + cfg.n_paths
    k = start // CHUNK_SIZE
    while start < end:
        stop = min(end, (k + 1) * CHUNK_SIZE)
        yield start, stop
        start = stop
        k += 1


def _simulate_chunk(cfg: DriverConfig, start: int, stop: int) -> DriverPaths:
    n = cfg.n_steps
    normals = np.stack([path_normals(cfg.seed, p, n, cfg.antithetic) for p in range(start, stop)])
    sq = np.sqrt(cfg.dt)
    dW = normals[:, 0] * sq
    dW_perp = normals[:, 1] * sq
    dZ = cfg.rho * dW + cfg.rho_bar * dW_perp
    dX = cfg.rho_x * dZ + np.sqrt(1.0 - cfg.rho_x**2) * normals[:, 2] * sq
    Z_H = volterra_path(cfg, dZ, normals[:, 3])
    return DriverPaths(cfg.grid, dW, dW_perp, dX, Z_H, cfg.rho, np.arange(start, stop))


def iter_driver_chunks(cfg: DriverConfig, workers: int = 1) -> Iterator[DriverPaths]:
    """Yield driver batches in path order.

    Batches are aligned to absolute multiples of ``CHUNK_SIZE`` so that the
    floating-point work on a path does not depend on ``workers``.
    """
    bounds = list(_chunk_bounds(cfg))
    if workers <= 1:
        for start, stop in bounds:
            yield _simulate_chunk(cfg, start, stop)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory proportional to the worker count
        pending = []
        for start, stop in bounds:
            pending.append(pool.submit(_simulate_chunk, cfg, start, stop))
            if len(pending) > workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def simulate_drivers(cfg: DriverConfig, workers: int = 1) -> DriverPaths:
    """Simulate all paths of ``cfg`` at once (memory ``~5 * n_paths * n_steps`` doubles)."""
    parts = list(iter_driver_chunks(cfg, workers))
    if len(parts) == 1:
        return parts[0]
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts])
    return DriverPaths(
        cfg.grid, cat("dW"), cat("dW_perp"), cat("dX"), cat("Z_H"), cfg.rho, cat("path_index")
    )


def volterra_path(cfg: DriverConfig, dZ: np.ndarray, residual_normals: np.ndarray | None = None) -> np.ndarray:
    """``Z^H(t_i) = int_0^{t_i} (t_i - s)**(H - 1/2) dZ_s`` on the grid of ``cfg``.

    ``residual_normals`` (same shape as ``dZ``) is required by the exact scheme.
    """
    H = cfg.indices
    if cfg.scheme == "left":
        return gfo_stochastic_convolution(PowerLawKernel(H.minus), dZ, cfg.dt)
    if residual_normals is None:
        raise ValueError("exact scheme needs residual normals")
    w = power_moments(H.minus, cfg.dt, cfg.n_steps) / cfg.dt
    out = causal_convolution(w, dZ)
    L = exact_residual_factor(cfg.n_steps, cfg.dt, cfg.H)
    out[..., 1:] += residual_normals @ L.T
    return out


def rl_covariance(s, t, H: float):
    """Exact ``Cov(Z^H_s, Z^H_t) = int_0^{min} (s-u)**(H-1/2) (t-u)**(H-1/2) du`` via the hypergeometric function."""
    a = H - 0.5
    s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
    lo, hi = np.minimum(s, t), np.maximum(s, t)
    d = hi - lo
    out = np.empty(lo.shape)
    diag = d == 0
    out[diag] = lo[diag] ** (2 * H) / (2 * H)
    off = ~diag & (lo > 0)
    lo_o, d_o = lo[off], d[off]
    out[off] = d_o**a * lo_o ** (a + 1) / (a + 1) * special.hyp2f1(-a, a + 1, a + 2, -lo_o / d_o)
    out[~diag & (lo == 0)] = 0.0
    return out if out.ndim else float(out)


@lru_cache(maxsize=8)
def exact_residual_factor(n_steps: int, dt: float, H: float) -> np.ndarray:
    """Lower Cholesky factor of the residual covariance of the exact scheme."""
    n = n_steps
    t = np.arange(1, n + 1) * dt
    iu = np.triu_indices(n)
    cov = np.empty((n, n))
    cov[iu] = rl_covariance(t[iu[0]], t[iu[1]], H)
    # part carried by the conditional means: sum_j dt * b_{i-1-j} b_{k-1-j}
    b = power_moments(H - 0.5, dt, n) / dt
    for d in range(n):
        c = np.cumsum(b[: n - d] * b[d:]) * dt
        rows = np.arange(n - d)
        cov[rows, rows + d] -= c
    cov = np.triu(cov) + np.triu(cov, 1).T
    return _robust_cholesky(cov)


def _robust_cholesky(cov: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(np.diag(cov))))
    for jitter in (0.0, 1e-14, 1e-12, 1e-10):
        try:
            return linalg.cholesky(cov + jitter * scale * np.eye(len(cov)), lower=True)
        except linalg.LinAlgError:
            continue
    w, v = linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _rl_covariance_quadrature(s: float, t: float, H: float, n_nodes: int = 24) -> float:
    """Same quantity as :func:`rl_covariance` by Gauss-Jacobi plus graded Gauss-Legendre."""
    a = H - 0.5
    lo, d = min(s, t), abs(t - s)
    if lo == 0:
        return 0.0
    if d == 0:
        return lo ** (2 * H) / (2 * H)
    # substitute x = lo - u; integrand x**a (x + d)**a on [0, lo]
    first = min(lo, d)
    y, w = special.roots_jacobi(n_nodes, 0.0, a)
    x = 0.5 * first * (1 + y)
    total = (0.5 * first) ** (a + 1) * np.dot(w, (x + d) ** a)
    yl, wl = np.polynomial.legendre.leggauss(n_nodes)
    left = first
    while left < lo:
        right = min(lo, 2 * left)
        x = 0.5 * (right - left) * yl + 0.5 * (right + left)
        total += 0.5 * (right - left) * np.dot(wl, x**a * (x + d) ** a)
        left = right
    return float(total)


def volterra_cholesky_paths(cfg: DriverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Exact joint samples of ``(Z^H(t_i), W(t_i))`` by Cholesky; small grids only.

    The covariance is assembled by quadrature, independently of the
    hypergeometric route used by the exact scheme. Returns ``(Z_H, W)`` with
    shapes ``(n_paths, n_steps + 1)``.
    """
    n = cfg.n_steps
    if n > 256:
        raise ValueError("Cholesky oracle is limited to n_steps <= 256")
    H = cfg.indices
    t = np.arange(1, n + 1) * cfg.dt
    czz = np.array([[_rl_covariance_quadrature(a, b, cfg.H) for b in t] for a in t])
    cww = np.minimum.outer(t, t)
    m = np.minimum.outer(t, t)
    czw = cfg.rho * (t[:, None] ** H.plus - (t[:, None] - m) ** H.plus) / H.plus
    cov = np.block([[czz, czw], [czw.T, cww]])
    L = _robust_cholesky(cov)
    Z_H = np.zeros((cfg.n_paths, n + 1))
    W = np.zeros((cfg.n_paths, n + 1))
    for k, p in enumerate(range(cfg.first_path, cfg.first_path + cfg.n_paths)):
        z = path_normals(cfg.seed, p, n, cfg.antithetic)[:2].ravel()
        x = L @ z
        Z_H[k, 1:] = x[:n]
        W[k, 1:] = x[n:]
    return Z_H, W


def with_paths(cfg: DriverConfig, n_paths: int, first_path: int = 0) -> DriverConfig:
    return replace(cfg, n_paths=n_paths, first_path=first_path)
