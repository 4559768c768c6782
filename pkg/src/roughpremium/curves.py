from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["PiecewiseCurve", "as_curve"]


@dataclass(frozen=True)
class PiecewiseCurve:
    """Right-open piecewise-constant function on ``0 = T_0 < T_1 < ... < T_n``.

    ``values[i]`` holds on ``[T_i, T_{i+1})``. The last value is extended flat
    beyond ``T_n`` and the first one before ``T_0``.
    """

    knots: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.ndim != 1 or values.ndim != 1:
            raise ValueError("knots and values must be one-dimensional")
        if len(knots) != len(values) + 1:
            raise ValueError("need exactly one more knot than values")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, value: float, horizon: float = 1.0) -> "PiecewiseCurve":
        return cls(np.array([0.0, horizon]), np.array([value]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.values) - 1)
        out = self.values[idx]
        return out if out.ndim else float(out)

    def left_limits(self) -> np.ndarray:
        """Value on the interval ending at each ``T_i``, ``i = 1..n``."""
        return self.values.copy()

    def cumulative(self, t):
        """``int_{T_0}^t curve(u) du`` with flat extension beyond the knots (``T_0`` is normally 0)."""
        t = np.asarray(t, dtype=float)
        k = self.knots
        at_knots = np.concatenate([[0.0], np.cumsum(self.values * np.diff(k))])
        idx = np.clip(np.searchsorted(k, t, side="right") - 1, 0, len(self.values) - 1)
        out = at_knots[idx] + self.values[idx] * (t - k[idx])
        return out if out.ndim else float(out)

    def cell_integrals(self, grid) -> np.ndarray:
        """Integrals over consecutive cells of ``grid``."""
        return np.diff(self.cumulative(np.asarray(grid, dtype=float)))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def as_curve(x) -> PiecewiseCurve:
    if isinstance(x, PiecewiseCurve):
        return x
    return PiecewiseCurve.constant(float(x))
