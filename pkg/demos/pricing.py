"""Variance under the historical and the pricing measure.

A constant premium lambda lifts log forward variance by
``nu * lambda * t**(H + 1/2) / (H + 1/2)``; the discounted spot stays a
martingale under the pricing measure.
"""

import numpy as np

from roughpremium.gauss import DriverConfig
from roughpremium.models import DeterministicPremium, ModelParams, price_variance_swap, simulate_q_measure

params = ModelParams(H=0.1, nu=0.8, rho=-0.7, xi0=0.04, r=0.02, mu=0.06, compensated=True)
cfg = DriverConfig(n_steps=64, horizon=1.0, n_paths=20_000, rho=-0.7, H=0.1, seed=7)

for lam in (0.0, 0.3):
    k, se = price_variance_swap(params, DeterministicPremium(lam), cfg, 1.0)
    print(f"lambda = {lam:.1f}: 1y variance-swap strike {k:.5f} +/- {se:.5f} (vol {np.sqrt(k):.4f})")

m = simulate_q_measure(params, DeterministicPremium(0.3), cfg)
x = m.discounted[:, -1]
print(f"E^Q[S_1 / B_1] = {x.mean():.4f} +/- {x.std() / np.sqrt(len(x)):.4f}")
print(f"log-variance lift at t=1: {0.8 * m.drift[-1]:.4f}   formula {0.8 * 0.3 / 0.6:.4f}")
