"""Square-root premium factor: Riccati solution against Monte Carlo bond prices."""

import numpy as np

from roughpremium.cir import CirParams, bond_price_mc, solve_riccati
from roughpremium.gauss import DriverConfig

H, nu = 0.1, 0.6
p = CirParams(kappa=1.0, theta=0.2, sigma=0.5, y0=0.15)
cfg = DriverConfig(n_steps=128, horizon=1.0, n_paths=20_000, rho=-0.5, H=H, seed=3)

for variant in ("feynman_kac", "flipped_linear", "theta_linear"):
    C, A = solve_riccati(p, nu, H, 1.0, 128, variant=variant).at(0.0)
    print(f"{variant:>15}: exp(-y0 C - A) = {np.exp(-p.y0 * C - A):.5f}")

mean, se = bond_price_mc(p, nu, H, cfg)
print(f"{'Monte Carlo':>15}: {mean:.5f} +/- {se:.5f}")
