"""Density process between the two measures and martingale diagnostics."""

import numpy as np

from roughpremium.gauss import DriverConfig
from roughpremium.measure import GirsanovSpec, martingale_test, radon_nikodym_path, stopped_process_diagnostics
from roughpremium.models import ModelParams, simulate_p_measure

params = ModelParams(H=0.1, nu=0.8, rho=-0.7, xi0=0.04, r=0.02, mu=0.06, compensated=True)
cfg = DriverConfig(n_steps=64, horizon=1.0, n_paths=20_000, rho=-0.7, H=0.1, seed=11)
market = simulate_p_measure(params, cfg)
D = radon_nikodym_path(GirsanovSpec(0.4), params, market)

for rep in (
    martingale_test(D.values[:, -1], 1.0, name="density"),
    martingale_test(D.values[:, -1] * market.discounted[:, -1], 1.0, name="weighted discounted spot"),
):
    print(f"{rep.name:>25}: mean {rep.mean:.4f}  se {rep.se:.4f}  z {rep.z:+.2f}  {'pass' if rep.passed else 'fail'}")

for row in stopped_process_diagnostics(market, [1.0, 2.0, 3.0], D):
    print(f"sup Z^H >= {row['level']:.0f}: frequency {row['frequency']:.4f}, under the new measure {row['weighted_frequency']:.4f}")
